"""
Trace records: the timestamped protocol events every run produces.

Text form, one record per line:

    t=<us> actor=<ROLE:id> verb=<VERB> subject=<ROLE:id> k=v ...

Attribute order is preserved as emitted so that equal runs give byte-identical
files.
"""

import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, List, Optional, Tuple

from app.errors import TraceFormatError
from app.utils.entities import parse_entity

logger = logging.getLogger(__name__)


class Verb(str, Enum):
    # Flow arrows
    REGISTER = "REGISTER"
    PAGE = "PAGE"
    CHANNEL_REQUEST = "CHANNEL_REQUEST"
    APPOINTMENT = "APPOINTMENT"
    APPOINTMENT_RESPONSE = "APPOINTMENT_RESPONSE"
    WAKEUP = "WAKEUP"
    WAKEUP_ACK = "WAKEUP_ACK"
    ASSIGNMENT = "ASSIGNMENT"
    PAGING_ACK = "PAGING_ACK"
    LINK_ESTABLISH = "LINK_ESTABLISH"
    TRAFFIC = "TRAFFIC"
    RELEASE = "RELEASE"
    REJECT = "REJECT"
    # Bookkeeping
    SCAN = "SCAN"
    SCAN_FAILED = "SCAN_FAILED"
    RETUNE = "RETUNE"
    STATUS_REPORT = "STATUS_REPORT"
    # Guard violations
    UNREGISTERED_REQUEST = "UNREGISTERED_REQUEST"
    ORPHAN_RESPONSE = "ORPHAN_RESPONSE"
    ORPHAN_ASSIGNMENT = "ORPHAN_ASSIGNMENT"
    ORPHAN_WAKEUP_ACK = "ORPHAN_WAKEUP_ACK"
    PAGE_UNKNOWN_MS = "PAGE_UNKNOWN_MS"
    PAGE_IGNORED = "PAGE_IGNORED"
    ORIGINATE_IGNORED = "ORIGINATE_IGNORED"
    END_IGNORED = "END_IGNORED"
    APPOINTMENT_WHILE_ASLEEP = "APPOINTMENT_WHILE_ASLEEP"
    RELEASE_UNKNOWN = "RELEASE_UNKNOWN"
    LINK_BEFORE_PAGING_ACK = "LINK_BEFORE_PAGING_ACK"
    LINK_UNKNOWN = "LINK_UNKNOWN"
    DEAD_LETTER = "DEAD_LETTER"
    DROP_DUPLICATE = "DROP_DUPLICATE"
    DROP_STALE = "DROP_STALE"
    DECODE_ERROR = "DECODE_ERROR"


def _attr_text(value: Any) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, Enum):
        return str(value.value) if not isinstance(value.value, int) else value.name
    text = str(value)
    if not text or any(ch.isspace() or ch == "=" for ch in text):
        raise ValueError(f"attribute value {text!r} cannot be written to a trace line")
    return text


@dataclass(frozen=True)
class TraceRecord:
    time: int
    actor: str
    verb: Verb
    subject: str
    attrs: Tuple[Tuple[str, str], ...] = field(default_factory=tuple)

    @classmethod
    def of(cls, time: int, actor: str, verb: Verb, subject: str, **attrs) -> "TraceRecord":
        """Build a record; attribute values are rendered to text in keyword order."""
        rendered = tuple((key, _attr_text(value)) for key, value in attrs.items())
        return cls(time=time, actor=actor, verb=verb, subject=subject, attrs=rendered)

    def attr(self, key: str, default: Optional[str] = None) -> Optional[str]:
        for name, value in self.attrs:
            if name == key:
                return value
        return default

    def to_line(self) -> str:
        parts = [f"t={self.time}", f"actor={self.actor}", f"verb={self.verb.value}",
                 f"subject={self.subject}"]
        parts.extend(f"{key}={value}" for key, value in self.attrs)
        return " ".join(parts)

    def to_json(self) -> str:
        return json.dumps({
            "t": self.time,
            "actor": self.actor,
            "verb": self.verb.value,
            "subject": self.subject,
            "attrs": dict(self.attrs),
        })


_HEAD_KEYS = ("t", "actor", "verb", "subject")


def parse_line(line: str, line_number: int = 0) -> TraceRecord:
    tokens = line.split()
    if len(tokens) < len(_HEAD_KEYS):
        raise TraceFormatError(line_number, "expected t=, actor=, verb=, subject=")

    pairs: List[Tuple[str, str]] = []
    for token in tokens:
        key, sep, value = token.partition("=")
        if not sep or not key or not value:
            raise TraceFormatError(line_number, f"malformed field {token!r}")
        pairs.append((key, value))

    head = dict(pairs[:len(_HEAD_KEYS)])
    if tuple(key for key, _ in pairs[:len(_HEAD_KEYS)]) != _HEAD_KEYS:
        raise TraceFormatError(line_number, "fields must start with t, actor, verb, subject")
    try:
        time = int(head["t"])
        verb = Verb(head["verb"])
        parse_entity(head["actor"])
        parse_entity(head["subject"])
    except ValueError as e:
        raise TraceFormatError(line_number, str(e)) from None
    if time < 0:
        raise TraceFormatError(line_number, "negative timestamp")

    return TraceRecord(time=time, actor=head["actor"], verb=verb,
                       subject=head["subject"], attrs=tuple(pairs[len(_HEAD_KEYS):]))


def parse_trace(text: str) -> List[TraceRecord]:
    records = []
    previous = 0
    for number, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        record = parse_line(line, number)
        if record.time < previous:
            raise TraceFormatError(number, "timestamps go backwards")
        previous = record.time
        records.append(record)
    return records


def format_trace(records: Iterable[TraceRecord]) -> str:
    return "".join(record.to_line() + "\n" for record in records)


def write_trace(path: Path, records: Iterable[TraceRecord]):
    Path(path).write_text(format_trace(records), encoding="utf-8")


def read_trace(path: Path) -> List[TraceRecord]:
    return parse_trace(Path(path).read_text(encoding="utf-8"))


def count_verbs(records: Iterable[TraceRecord]) -> Counter:
    return Counter(record.verb for record in records)


class TraceRecorder:
    """Append-only record sink; rejects records that would go back in time."""

    def __init__(self):
        self.records: List[TraceRecord] = []

    def extend(self, records: Iterable[TraceRecord]):
        for record in records:
            if self.records and record.time < self.records[-1].time:
                raise ValueError(
                    f"record at t={record.time} after t={self.records[-1].time}: {record.verb.value}"
                )
            self.records.append(record)
