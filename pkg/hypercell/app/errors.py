"""
Domain exceptions shared by every layer of the simulator.

Normal validation outcomes (channel legality, carrier pairing) are returned
as result objects; only broken inputs and infrastructure failures raise.
"""

from enum import Enum
from typing import List, Optional


class HypercellError(Exception):
    """Base class for all simulator errors."""


class RoleMismatchError(HypercellError):
    """A carrier handed to a pair check does not have the expected role."""


class DecodeErrorCode(str, Enum):
    BAD_MAGIC = "BAD_MAGIC"
    BAD_VERSION = "BAD_VERSION"
    UNKNOWN_TAG = "UNKNOWN_TAG"
    TRUNCATED = "TRUNCATED"
    TRAILING_BYTES = "TRAILING_BYTES"
    BAD_FIELD = "BAD_FIELD"


class DecodeError(HypercellError):
    def __init__(self, code: DecodeErrorCode, offset: int, detail: str = ""):
        self.code = code
        self.offset = offset
        self.detail = detail
        message = f"{code.value} at byte {offset}"
        if detail:
            message += f": {detail}"
        super().__init__(message)


class ScenarioError(HypercellError):
    """Scenario file could not be parsed or failed validation."""

    def __init__(self, messages: List[str]):
        self.messages = list(messages)
        super().__init__("; ".join(self.messages))


class TraceFormatError(HypercellError):
    def __init__(self, line_number: int, detail: str):
        self.line_number = line_number
        self.detail = detail
        super().__init__(f"line {line_number}: {detail}")


class TransportError(HypercellError):
    """UDP bind failure, missing datagram or a dead station process."""

    def __init__(self, message: str, port: Optional[int] = None):
        self.port = port
        super().__init__(message)
