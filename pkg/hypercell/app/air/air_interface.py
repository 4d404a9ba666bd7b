"""
Abstract Um air interface: the messages a handset and the base stations
exchange over the radio, each bound to the logical channel that carries it.

No fading, no collisions; an air event is delivered to whoever listens on
its carrier.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict

from app.air.um_channels import LogicalChannel


class AirKind(str, Enum):
    REGISTER_REQUEST = "REGISTER_REQUEST"
    REGISTER_RESULT = "REGISTER_RESULT"
    CHANNEL_REQUEST = "CHANNEL_REQUEST"
    PAGE = "PAGE"
    ASSIGNMENT = "ASSIGNMENT"
    ASSIGNMENT_REJECT = "ASSIGNMENT_REJECT"
    PAGING_ACK = "PAGING_ACK"
    LINK_REQUEST = "LINK_REQUEST"
    LINK_CONFIRM = "LINK_CONFIRM"
    TRAFFIC = "TRAFFIC"
    RELEASE = "RELEASE"


AIR_CHANNELS: Dict[AirKind, LogicalChannel] = {
    AirKind.REGISTER_REQUEST: LogicalChannel.RACH,
    AirKind.REGISTER_RESULT: LogicalChannel.AGCH,
    AirKind.CHANNEL_REQUEST: LogicalChannel.RACH,
    AirKind.PAGE: LogicalChannel.PCH,
    AirKind.ASSIGNMENT: LogicalChannel.AGCH,
    AirKind.ASSIGNMENT_REJECT: LogicalChannel.AGCH,
    AirKind.PAGING_ACK: LogicalChannel.FACCH,
    AirKind.LINK_REQUEST: LogicalChannel.FACCH,
    AirKind.LINK_CONFIRM: LogicalChannel.FACCH,
    AirKind.TRAFFIC: LogicalChannel.TCH,
    AirKind.RELEASE: LogicalChannel.FACCH,
}


@dataclass(frozen=True)
class AirEvent:
    """One burst on the air; `arfcn` is the carrier it is sent on."""
    kind: AirKind
    sender: str
    arfcn: int
    fields: Dict[str, Any] = field(default_factory=dict)

    @property
    def channel(self) -> LogicalChannel:
        return AIR_CHANNELS[self.kind]

    def get(self, key: str, default: Any = None) -> Any:
        return self.fields.get(key, default)


@dataclass(frozen=True)
class VisibleCarrier:
    """What a scanning handset sees of one station: its carrier and whether it broadcasts BCH."""
    station: str
    arfcn: int
    broadcasting: bool


# RACH access reference: 3 cause bits then 5 random bits
RA_CAUSE_ORIGINATING = 0b111
RA_CAUSE_PAGING_RESPONSE = 0b100


def random_reference(cause: int, random_bits: int) -> int:
    return ((cause & 0b111) << 5) | (random_bits & 0b11111)
