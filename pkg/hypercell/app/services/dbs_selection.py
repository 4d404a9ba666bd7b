"""
DBS selection: which data base station should serve the next call.

Rules, in order:
  1. an ACTIVE DBS below the high-load threshold (and not full): least loaded
  2. otherwise a sleeping DBS: wake the lowest id
  3. otherwise any ACTIVE DBS that is not full: least loaded
  4. otherwise reject
Ties go to the lowest dbs_id. WAKING stations are not candidates.
"""

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Mapping, Optional

from app.air.um_channels import CarrierConfig
from app.protocol.messages import PowerState


@dataclass
class DbsDescriptor:
    dbs_id: int
    power_state: PowerState
    carrier: CarrierConfig
    capacity: int
    occupied: int = 0

    def __post_init__(self):
        if self.capacity < 1:
            raise ValueError(f"capacity must be positive, got {self.capacity}")
        if not 0 <= self.occupied <= self.capacity:
            raise ValueError(f"occupied must be in [0, {self.capacity}], got {self.occupied}")
        if self.power_state is PowerState.SLEEP and self.occupied:
            raise ValueError("a sleeping DBS cannot hold links")

    @property
    def load(self) -> Fraction:
        return Fraction(self.occupied, self.capacity)


class DecisionKind(str, Enum):
    APPOINT = "APPOINT"
    WAKE_THEN_APPOINT = "WAKE_THEN_APPOINT"
    REJECT = "REJECT"


class RejectReason(str, Enum):
    NO_DBS_AVAILABLE = "NO_DBS_AVAILABLE"


@dataclass(frozen=True)
class AppointmentDecision:
    kind: DecisionKind
    dbs_id: Optional[int] = None
    reason: Optional[RejectReason] = None

    @classmethod
    def appoint(cls, dbs_id: int) -> "AppointmentDecision":
        return cls(DecisionKind.APPOINT, dbs_id=dbs_id)

    @classmethod
    def wake(cls, dbs_id: int) -> "AppointmentDecision":
        return cls(DecisionKind.WAKE_THEN_APPOINT, dbs_id=dbs_id)

    @classmethod
    def reject(cls) -> "AppointmentDecision":
        return cls(DecisionKind.REJECT, reason=RejectReason.NO_DBS_AVAILABLE)


def _least_loaded(candidates: Iterable[DbsDescriptor]) -> Optional[DbsDescriptor]:
    return min(candidates, key=lambda d: (d.load, d.dbs_id), default=None)


def select_dbs(registry: Mapping[int, DbsDescriptor], threshold: float,
               exclude: Iterable[int] = ()) -> AppointmentDecision:
    """Pure: identical registries give identical decisions."""
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold must be in [0, 1], got {threshold}")
    excluded = set(exclude)
    pool = [d for dbs_id, d in sorted(registry.items()) if dbs_id not in excluded]
    # Decimal reading of the threshold, so 4/5 load is not below "0.8"
    limit = Fraction(repr(float(threshold)))

    active = [d for d in pool if d.power_state is PowerState.ACTIVE and d.occupied < d.capacity]
    relaxed = _least_loaded(d for d in active if d.load < limit)
    if relaxed is not None:
        return AppointmentDecision.appoint(relaxed.dbs_id)

    sleepers = [d.dbs_id for d in pool if d.power_state is PowerState.SLEEP]
    if sleepers:
        return AppointmentDecision.wake(min(sleepers))

    busy = _least_loaded(active)
    if busy is not None:
        return AppointmentDecision.appoint(busy.dbs_id)
    return AppointmentDecision.reject()
