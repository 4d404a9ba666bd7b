"""
SBS <-> DBS coordination messages.

Payload records validate their fields at construction, so anything that
reaches the codec is in range.
"""

from dataclasses import dataclass
from enum import Enum, IntEnum
from typing import Union

MAGIC = b"HCN1"
PROTOCOL_VERSION = 1

U16_MAX = 0xFFFF
U32_MAX = 0xFFFFFFFF
MAX_SLOT = 7
LOAD_STEPS = 255


class MessageKind(IntEnum):
    CHANNEL_APPOINTMENT = 0x01
    APPOINTMENT_RESPONSE = 0x02
    WAKEUP_COMMAND = 0x03
    WAKEUP_ACK = 0x04
    LINK_RELEASE = 0x05
    STATUS_REPORT = 0x06


class ServiceKind(IntEnum):
    MO_CALL = 0x01
    MT_CALL = 0x02

    @property
    def label(self) -> str:
        return "MO" if self is ServiceKind.MO_CALL else "MT"


class PowerState(str, Enum):
    SLEEP = "SLEEP"
    WAKING = "WAKING"
    ACTIVE = "ACTIVE"


def _check_range(name: str, value: int, upper: int):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValueError(f"{name} must be an integer, got {value!r}")
    if not 0 <= value <= upper:
        raise ValueError(f"{name} must be in [0, {upper}], got {value}")


@dataclass(frozen=True)
class ChannelAppointment:
    ms_id: int
    service: ServiceKind
    slot: int

    def __post_init__(self):
        _check_range("ms_id", self.ms_id, U32_MAX)
        object.__setattr__(self, "service", ServiceKind(self.service))
        _check_range("slot", self.slot, MAX_SLOT)


@dataclass(frozen=True)
class AppointmentResponse:
    """Carrier and slot are meaningful only when `accept` is set; denials carry zeros."""
    accept: bool
    arfcn: int = 0
    slot: int = 0

    def __post_init__(self):
        if not isinstance(self.accept, bool):
            raise ValueError(f"accept must be a bool, got {self.accept!r}")
        _check_range("arfcn", self.arfcn, U16_MAX)
        _check_range("slot", self.slot, MAX_SLOT)

    @classmethod
    def deny(cls) -> "AppointmentResponse":
        return cls(accept=False)


@dataclass(frozen=True)
class WakeupCommand:
    dbs_id: int

    def __post_init__(self):
        _check_range("dbs_id", self.dbs_id, U32_MAX)


@dataclass(frozen=True)
class WakeupAck:
    dbs_id: int

    def __post_init__(self):
        _check_range("dbs_id", self.dbs_id, U32_MAX)


@dataclass(frozen=True)
class LinkRelease:
    ms_id: int

    def __post_init__(self):
        _check_range("ms_id", self.ms_id, U32_MAX)


@dataclass(frozen=True)
class StatusReport:
    """Power state plus load quantized to 1/255 steps."""
    power_state: PowerState
    load_level: int

    def __post_init__(self):
        state = PowerState(self.power_state)
        if state is PowerState.WAKING:
            raise ValueError("status reports carry SLEEP or ACTIVE only")
        object.__setattr__(self, "power_state", state)
        _check_range("load_level", self.load_level, LOAD_STEPS)

    @classmethod
    def from_load(cls, power_state: PowerState, load: float) -> "StatusReport":
        if not 0.0 <= load <= 1.0:
            raise ValueError(f"load must be a fraction in [0, 1], got {load}")
        return cls(power_state=power_state, load_level=int(round(load * LOAD_STEPS)))

    @property
    def load(self) -> float:
        return self.load_level / LOAD_STEPS


Payload = Union[
    ChannelAppointment, AppointmentResponse, WakeupCommand,
    WakeupAck, LinkRelease, StatusReport,
]

PAYLOAD_KINDS = {
    ChannelAppointment: MessageKind.CHANNEL_APPOINTMENT,
    AppointmentResponse: MessageKind.APPOINTMENT_RESPONSE,
    WakeupCommand: MessageKind.WAKEUP_COMMAND,
    WakeupAck: MessageKind.WAKEUP_ACK,
    LinkRelease: MessageKind.LINK_RELEASE,
    StatusReport: MessageKind.STATUS_REPORT,
}


@dataclass(frozen=True)
class ControlMessage:
    transaction_id: int
    payload: Payload

    def __post_init__(self):
        _check_range("transaction_id", self.transaction_id, U32_MAX)
        if type(self.payload) not in PAYLOAD_KINDS:
            raise ValueError(f"unsupported payload {type(self.payload).__name__}")

    @property
    def kind(self) -> MessageKind:
        return PAYLOAD_KINDS[type(self.payload)]


@dataclass(frozen=True)
class MessageHeader:
    sender_id: int
    seq: int
    transaction_id: int
    tag: MessageKind
    magic: bytes = MAGIC
    version: int = PROTOCOL_VERSION

    def __post_init__(self):
        if self.magic != MAGIC:
            raise ValueError(f"magic must be {MAGIC!r}, got {self.magic!r}")
        if self.version != PROTOCOL_VERSION:
            raise ValueError(f"version must be {PROTOCOL_VERSION}, got {self.version}")
        object.__setattr__(self, "tag", MessageKind(self.tag))
        _check_range("sender_id", self.sender_id, U16_MAX)
        _check_range("seq", self.seq, U32_MAX)
        _check_range("transaction_id", self.transaction_id, U32_MAX)

    @classmethod
    def for_message(cls, message: ControlMessage, sender_id: int, seq: int) -> "MessageHeader":
        return cls(sender_id=sender_id, seq=seq,
                   transaction_id=message.transaction_id, tag=message.kind)
