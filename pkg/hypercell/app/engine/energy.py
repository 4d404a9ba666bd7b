"""
Energy accounting for data base stations.

Each DBS's run is partitioned into power-state intervals; energy is the sum
of state power times interval length (watts x seconds = joules).
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional

from app.protocol.messages import PowerState

logger = logging.getLogger(__name__)

US_PER_SECOND = 1_000_000


@dataclass(frozen=True)
class StateInterval:
    state: PowerState
    start_us: int
    end_us: int

    @property
    def duration_us(self) -> int:
        return self.end_us - self.start_us


@dataclass
class DbsEnergy:
    dbs_id: int
    time_in_state_us: Dict[PowerState, int]
    joules: float


@dataclass
class EnergyReport:
    per_dbs: List[DbsEnergy] = field(default_factory=list)

    @property
    def total_joules(self) -> float:
        return sum(entry.joules for entry in self.per_dbs)

    def active_time_us(self) -> int:
        return sum(entry.time_in_state_us[PowerState.ACTIVE] for entry in self.per_dbs)


class EnergyLedger:
    def __init__(self, powers_w: Mapping[PowerState, float]):
        self.powers_w = {state: float(powers_w.get(state, 0.0)) for state in PowerState}
        self.intervals: Dict[int, List[StateInterval]] = {}
        self._open: Dict[int, tuple] = {}
        self.closed_at: Optional[int] = None

    def open(self, dbs_id: int, state: PowerState, at_us: int = 0):
        if dbs_id in self._open or dbs_id in self.intervals:
            raise ValueError(f"DBS {dbs_id} already tracked")
        self.intervals[dbs_id] = []
        self._open[dbs_id] = (state, at_us)

    def transition(self, dbs_id: int, state: PowerState, at_us: int):
        current, since = self._open[dbs_id]
        if at_us < since:
            raise ValueError(f"DBS {dbs_id}: transition at {at_us} before {since}")
        if state is current:
            return
        if at_us > since:
            self.intervals[dbs_id].append(StateInterval(current, since, at_us))
        self._open[dbs_id] = (state, at_us)
        logger.debug(f"DBS {dbs_id}: {current.value} -> {state.value} at {at_us} us")

    def close(self, at_us: int):
        """End every open interval at `at_us`; the ledger then covers [start, at_us] exactly."""
        for dbs_id, (state, since) in sorted(self._open.items()):
            end = max(at_us, since)
            if end > since:
                self.intervals[dbs_id].append(StateInterval(state, since, end))
        self._open.clear()
        self.closed_at = at_us


def energy_report(ledger: EnergyLedger) -> EnergyReport:
    report = EnergyReport()
    for dbs_id in sorted(ledger.intervals):
        time_in_state = {state: 0 for state in PowerState}
        for interval in ledger.intervals[dbs_id]:
            time_in_state[interval.state] += interval.duration_us
        joules = sum(ledger.powers_w[state] * us for state, us in time_in_state.items()) / US_PER_SECOND
        report.per_dbs.append(DbsEnergy(dbs_id=dbs_id, time_in_state_us=time_in_state, joules=joules))
    return report
