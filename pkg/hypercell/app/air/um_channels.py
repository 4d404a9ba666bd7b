"""
Um Channel Model - GSM logical channels and their signaling/data split.

Encodes:
- the logical channel taxonomy (BCH, CCCH, DCCH, TCH groups)
- which base-station role may carry each channel and functionality
- the permitted channel combinations on one physical channel
- TDMA slot timing (integer microseconds) and GSM-900 carrier frequencies
- the carrier pairing rule between a signaling and a data base station

Everything here is a pure function over immutable values.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, Iterable, List, Tuple

from app.errors import RoleMismatchError


class LogicalChannel(str, Enum):
    FCCH = "FCCH"
    SCH = "SCH"
    BCCH = "BCCH"
    PCH = "PCH"
    NCH = "NCH"
    RACH = "RACH"
    AGCH = "AGCH"
    SDCCH = "SDCCH"
    SACCH = "SACCH"
    FACCH = "FACCH"
    TCH = "TCH"


class ChannelGroup(str, Enum):
    BCH = "BCH"
    CCCH = "CCCH"
    DCCH = "DCCH"
    TCH_GROUP = "TCH_GROUP"


class Role(str, Enum):
    SBS = "SBS"
    DBS = "DBS"


class Functionality(str, Enum):
    SYNCHRONIZATION = "SYNCHRONIZATION"
    BROADCASTING = "BROADCASTING"
    PAGING = "PAGING"
    DATA_TRAFFIC = "DATA_TRAFFIC"


# =============================================================================
# Taxonomy and split tables
# =============================================================================

CHANNEL_GROUPS: Dict[LogicalChannel, ChannelGroup] = {
    LogicalChannel.FCCH: ChannelGroup.BCH,
    LogicalChannel.SCH: ChannelGroup.BCH,
    LogicalChannel.BCCH: ChannelGroup.BCH,
    LogicalChannel.PCH: ChannelGroup.CCCH,
    LogicalChannel.NCH: ChannelGroup.CCCH,
    LogicalChannel.RACH: ChannelGroup.CCCH,
    LogicalChannel.AGCH: ChannelGroup.CCCH,
    LogicalChannel.SDCCH: ChannelGroup.DCCH,
    LogicalChannel.SACCH: ChannelGroup.DCCH,
    LogicalChannel.FACCH: ChannelGroup.DCCH,
    LogicalChannel.TCH: ChannelGroup.TCH_GROUP,
}

_SBS_ONLY = frozenset({Role.SBS})
_DBS_ONLY = frozenset({Role.DBS})
_BOTH = frozenset({Role.SBS, Role.DBS})

# Logical channel separation: BCH and CCCH stay on the signaling BS,
# the traffic channel and its associated control channels move to the data BS,
# SDCCH lives on both.
_CHANNEL_ROLES: Dict[LogicalChannel, FrozenSet[Role]] = {
    LogicalChannel.SDCCH: _BOTH,
    LogicalChannel.SACCH: _DBS_ONLY,
    LogicalChannel.FACCH: _DBS_ONLY,
    LogicalChannel.TCH: _DBS_ONLY,
}

_FUNCTIONALITY_ROLES: Dict[Functionality, FrozenSet[Role]] = {
    Functionality.SYNCHRONIZATION: _SBS_ONLY,
    Functionality.BROADCASTING: _SBS_ONLY,
    Functionality.PAGING: _SBS_ONLY,
    Functionality.DATA_TRAFFIC: _DBS_ONLY,
}

FUNCTIONALITY_CHANNELS: Dict[Functionality, FrozenSet[LogicalChannel]] = {
    Functionality.SYNCHRONIZATION: frozenset({LogicalChannel.FCCH, LogicalChannel.SCH}),
    Functionality.BROADCASTING: frozenset({LogicalChannel.BCCH}),
    Functionality.PAGING: frozenset({LogicalChannel.PCH}),
    Functionality.DATA_TRAFFIC: frozenset({LogicalChannel.TCH}),
}

CCCH_CHANNELS = frozenset(c for c, g in CHANNEL_GROUPS.items() if g is ChannelGroup.CCCH)

PERMITTED_COMBINATIONS: Tuple[FrozenSet[LogicalChannel], ...] = (
    frozenset({LogicalChannel.TCH, LogicalChannel.SACCH}),
    frozenset({LogicalChannel.TCH, LogicalChannel.SACCH, LogicalChannel.FACCH}),
    frozenset({LogicalChannel.FCCH, LogicalChannel.SCH, LogicalChannel.BCCH}) | CCCH_CHANNELS,
    frozenset({LogicalChannel.SDCCH, LogicalChannel.SACCH}),
)

DEFAULT_CHANNELS: Dict[Role, FrozenSet[LogicalChannel]] = {
    Role.SBS: frozenset({
        LogicalChannel.FCCH, LogicalChannel.SCH, LogicalChannel.BCCH,
        LogicalChannel.PCH, LogicalChannel.NCH, LogicalChannel.RACH,
        LogicalChannel.AGCH, LogicalChannel.SDCCH,
    }),
    Role.DBS: frozenset({
        LogicalChannel.TCH, LogicalChannel.SACCH,
        LogicalChannel.FACCH, LogicalChannel.SDCCH,
    }),
}


def group_of(channel: LogicalChannel) -> ChannelGroup:
    return CHANNEL_GROUPS[channel]


def allowed_roles(channel: LogicalChannel) -> FrozenSet[Role]:
    """Roles that may carry `channel` under the signaling/data split."""
    if channel in _CHANNEL_ROLES:
        return _CHANNEL_ROLES[channel]
    group = group_of(channel)
    if group in (ChannelGroup.BCH, ChannelGroup.CCCH):
        return _SBS_ONLY
    return _DBS_ONLY


def functionality_roles(functionality: Functionality) -> FrozenSet[Role]:
    return _FUNCTIONALITY_ROLES[functionality]


@dataclass(frozen=True)
class ChannelValidation:
    """Result of checking a station's channel set against its role."""
    ok: bool
    violations: List[LogicalChannel] = field(default_factory=list)


def validate_bs_channels(role: Role, channels: Iterable[LogicalChannel]) -> ChannelValidation:
    """
    Check that every channel in `channels` may be carried by `role`.

    Each violating channel is listed once, in taxonomy order.
    """
    wanted = set(channels)
    violations = [c for c in LogicalChannel if c in wanted and role not in allowed_roles(c)]
    return ChannelValidation(ok=not violations, violations=violations)


def is_permitted_combination(channels: Iterable[LogicalChannel]) -> bool:
    return frozenset(channels) in PERMITTED_COMBINATIONS


# =============================================================================
# TDMA timing
# =============================================================================

SLOTS_PER_FRAME = 8
SLOT_DURATION_US = 577
FRAME_DURATION_US = SLOTS_PER_FRAME * SLOT_DURATION_US


@dataclass(frozen=True, order=True)
class FrameTime:
    frame_number: int
    slot: int

    def __post_init__(self):
        if self.frame_number < 0:
            raise ValueError(f"frame_number must be non-negative, got {self.frame_number}")
        if not 0 <= self.slot < SLOTS_PER_FRAME:
            raise ValueError(f"slot must be in [0, 7], got {self.slot}")


def slot_start_time(t: FrameTime) -> int:
    """Elapsed microseconds from frame 0 slot 0 to the start of `t`."""
    return (t.frame_number * SLOTS_PER_FRAME + t.slot) * SLOT_DURATION_US


def frame_time_at(elapsed_us: int) -> FrameTime:
    """The slot that contains the instant `elapsed_us`."""
    if elapsed_us < 0:
        raise ValueError(f"elapsed time must be non-negative, got {elapsed_us}")
    index = elapsed_us // SLOT_DURATION_US
    return FrameTime(index // SLOTS_PER_FRAME, index % SLOTS_PER_FRAME)


def next_slot_start(elapsed_us: int, slot: int) -> int:
    """First start of timeslot `slot` at or after `elapsed_us`."""
    current = frame_time_at(elapsed_us)
    candidate = slot_start_time(FrameTime(current.frame_number, slot))
    if candidate < elapsed_us:
        candidate += FRAME_DURATION_US
    return candidate


# =============================================================================
# Carriers
# =============================================================================

COLOR_CODE_MAX = 7


@dataclass(frozen=True)
class CarrierConfig:
    arfcn: int
    color_code: int
    role: Role

    def __post_init__(self):
        if self.arfcn < 0:
            raise ValueError(f"arfcn must be non-negative, got {self.arfcn}")
        if not 0 <= self.color_code <= COLOR_CODE_MAX:
            raise ValueError(f"color_code must be in [0, 7], got {self.color_code}")


class CarrierViolation(str, Enum):
    ARFCN_COLLISION = "ARFCN_COLLISION"
    COLOR_CODE_MISMATCH = "COLOR_CODE_MISMATCH"


@dataclass(frozen=True)
class CarrierValidation:
    ok: bool
    violations: List[CarrierViolation] = field(default_factory=list)


def validate_carrier_pair(sbs: CarrierConfig, dbs: CarrierConfig) -> CarrierValidation:
    """
    Both stations present one logical network: same color code, different ARFCNs.

    Raises RoleMismatchError when the inputs are not an (SBS, DBS) pair.
    """
    if sbs.role is not Role.SBS or dbs.role is not Role.DBS:
        raise RoleMismatchError(
            f"expected (SBS, DBS) carriers, got ({sbs.role.value}, {dbs.role.value})"
        )
    violations = []
    if sbs.color_code != dbs.color_code:
        violations.append(CarrierViolation.COLOR_CODE_MISMATCH)
    if sbs.arfcn == dbs.arfcn:
        violations.append(CarrierViolation.ARFCN_COLLISION)
    return CarrierValidation(ok=not violations, violations=violations)


def uplink_khz(arfcn: int) -> int:
    """GSM-900 uplink carrier in kHz (P-GSM 1..124, E-GSM 0 and 975..1023)."""
    if 0 <= arfcn <= 124:
        return 890_000 + 200 * arfcn
    if 975 <= arfcn <= 1023:
        return 890_000 + 200 * (arfcn - 1024)
    raise ValueError(f"ARFCN {arfcn} is outside the GSM-900 band")


def downlink_khz(arfcn: int) -> int:
    return uplink_khz(arfcn) + 45_000
