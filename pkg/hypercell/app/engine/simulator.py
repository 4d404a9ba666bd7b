"""
Deterministic discrete-event core.

One single-threaded loop pops events in (time, seq) order, hands each to its
target entity and routes what comes back: air bursts through the abstract
radio medium, coordination datagrams over the control link, timers back to
their owner and power changes into the energy ledger. Virtual time only.
"""

import logging
import random
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Set

from app.air.air_interface import AirEvent, AirKind, VisibleCarrier
from app.air.um_channels import Role
from app.engine.energy import EnergyLedger, EnergyReport, energy_report
from app.engine.event_queue import EventQueue, SimEvent
from app.engine.scenario import Scenario, StationSpec, Stimulus, StimulusAction
from app.engine.steps import (
    BROADCAST, AirEmission, Datagram, PowerChange, StepResult, TimerRequest,
)
from app.engine.trace import TraceRecord, TraceRecorder, Verb
from app.features.mobile_station import MobileStation, MsPhase
from app.protocol.messages import ServiceKind
from app.services.data_station import DataStation
from app.services.dbs_selection import DbsDescriptor
from app.services.signaling_station import SignalingStation
from app.utils.entities import MS, entity_id, parse_entity

logger = logging.getLogger(__name__)


# =============================================================================
# Queue payloads
# =============================================================================

@dataclass(frozen=True)
class AirDelivery:
    event: AirEvent


@dataclass(frozen=True)
class DatagramDelivery:
    datagram: Datagram
    sender: str


@dataclass(frozen=True)
class TimerFire:
    timer: TimerRequest


@dataclass(frozen=True)
class StimulusFire:
    stimulus: Stimulus


@dataclass
class RunResult:
    records: List[TraceRecord]
    energy: EnergyReport
    end_us: int
    ms_phases: Dict[str, MsPhase] = field(default_factory=dict)


# =============================================================================
# Station construction
# =============================================================================

def build_station(scenario: Scenario, spec: StationSpec):
    knobs = scenario.knobs
    if spec.role is Role.SBS:
        registry = [
            DbsDescriptor(dbs_id=d.id, power_state=d.power, carrier=d.carrier, capacity=d.capacity)
            for d in scenario.data_stations
        ]
        return SignalingStation(
            station_id=spec.id,
            carrier=spec.carrier,
            dbs_registry=registry,
            high_load_threshold=knobs.high_load_threshold,
            allowlist=knobs.admission_allowlist,
            channels=spec.channel_set,
        )
    return DataStation(
        station_id=spec.id,
        carrier=spec.carrier,
        sbs_id=scenario.sbs.id,
        capacity=spec.capacity,
        power_state=spec.power,
        wake_latency_us=knobs.wake_latency_us,
        idle_timeout_us=knobs.idle_timeout_us,
        channels=spec.channel_set,
    )


def build_stations(scenario: Scenario) -> Dict[str, object]:
    return {spec.entity: build_station(scenario, spec) for spec in scenario.stations}


StationFactory = Callable[[Scenario], Dict[str, object]]
Observer = Callable[["Simulator", int], None]


class Simulator:
    def __init__(
        self,
        scenario: Scenario,
        station_factory: StationFactory = build_stations,
        observers: Iterable[Observer] = (),
    ):
        self.scenario = scenario
        self.knobs = scenario.knobs
        self.queue = EventQueue()
        self.recorder = TraceRecorder()
        self.ledger = EnergyLedger(self.knobs.state_powers())
        self.observers = list(observers)
        self.removed: Set[str] = set()
        self.now = 0

        self.station_specs: Dict[str, StationSpec] = {s.entity: s for s in scenario.stations}
        self.stations = station_factory(scenario)
        # numeric coordination id -> entity, ARFCN -> entity listening on it
        self.station_ids = {s.id: s.entity for s in scenario.stations}
        self.arfcn_owner = {s.arfcn: s.entity for s in scenario.stations}

        self.mobiles: Dict[str, MobileStation] = {}
        for mobile in sorted(scenario.mobiles, key=lambda m: m.id):
            rng = random.Random(f"{self.knobs.seed}/{mobile.id}")
            self.mobiles[entity_id(MS, mobile.id)] = MobileStation(mobile.id, rng=rng)

        self.entities: Dict[str, object] = {**self.stations, **self.mobiles}

    # =========================================================================
    # Main loop
    # =========================================================================

    def run(self) -> RunResult:
        horizon = self.knobs.horizon_us
        for spec in self.scenario.data_stations:
            self.ledger.open(spec.id, spec.power, 0)

        for name, entity in self.entities.items():
            self._apply(name, entity.start(0))
        for stimulus in self.scenario.stimuli:
            self.queue.push(stimulus.t, stimulus.target, StimulusFire(stimulus))

        while self.queue:
            if horizon is not None and self.queue.peek_time() > horizon:
                break
            event = self.queue.pop()
            self.now = event.time
            self._dispatch(event)
            if not self.queue or self.queue.peek_time() != self.now:
                for observer in self.observers:
                    observer(self, self.now)

        end = horizon if horizon is not None else self.now
        self.ledger.close(end)
        logger.info(f"Run finished at {end} us with {len(self.recorder.records)} trace records")
        return RunResult(
            records=list(self.recorder.records),
            energy=energy_report(self.ledger),
            end_us=end,
            ms_phases={name: ms.phase for name, ms in self.mobiles.items()},
        )

    def _dispatch(self, event: SimEvent):
        payload = event.payload
        if isinstance(payload, StimulusFire):
            self._apply_stimulus(payload.stimulus)
            return

        target = event.target
        entity = self.entities.get(target)
        if isinstance(payload, TimerFire):
            if entity is not None and target not in self.removed:
                self._apply(target, entity.on_timer(payload.timer, self.now))
            return

        if entity is None or target in self.removed:
            sender = payload.event.sender if isinstance(payload, AirDelivery) else payload.sender
            self._dead_letter(sender, target, self._describe(payload))
            return
        if isinstance(payload, AirDelivery):
            self._apply(target, entity.on_air(payload.event, self.now))
        else:
            self._apply(target, entity.on_datagram(payload.datagram, self.now))

    def _apply(self, source: str, step: StepResult):
        self.recorder.extend(step.records)
        for emission in step.emissions:
            if isinstance(emission, AirEmission):
                self.deliver_air(source, emission)
            elif isinstance(emission, Datagram):
                self.deliver_control(source, emission)
            elif isinstance(emission, TimerRequest):
                self.queue.push(self.now + emission.delay_us, source, TimerFire(emission))
            elif isinstance(emission, PowerChange):
                self.ledger.transition(emission.dbs_id, emission.state, self.now)

    # =========================================================================
    # Stimuli
    # =========================================================================

    def _apply_stimulus(self, stimulus: Stimulus):
        target = stimulus.target
        action = stimulus.action
        if action is StimulusAction.REMOVE:
            logger.info(f"t={self.now}: removing {target}")
            self.removed.add(target)
            return
        if target in self.removed:
            logger.info(f"t={self.now}: {action.value} for removed {target} ignored")
            return

        entity = self.entities[target]
        if action is StimulusAction.POWER_ON:
            self._apply(target, entity.power_on_scan(self.now, self.visible_carriers()))
        elif action is StimulusAction.MO_CALL:
            self._apply(target, entity.originate(self.now, ServiceKind.MO_CALL, stimulus.duration_us))
        elif action is StimulusAction.MT_CALL:
            sbs = self.scenario.sbs.entity
            if sbs in self.removed:
                logger.info(f"t={self.now}: no SBS left to page {target}")
                return
            step = self.stations[sbs].page(self.now, stimulus.ms)
            # Only a page that went out carries a duration
            for emission in step.emissions:
                if isinstance(emission, AirEmission) and emission.event.kind is AirKind.PAGE:
                    entity.expect_terminated_call(emission.event.get("call"), stimulus.duration_us)
            self._apply(sbs, step)
        elif action is StimulusAction.DENY_NEXT_APPOINTMENT:
            self._apply(target, entity.deny_next_appointment(self.now))

    def visible_carriers(self) -> List[VisibleCarrier]:
        return [
            VisibleCarrier(station=spec.entity, arfcn=spec.arfcn, broadcasting=spec.role is Role.SBS)
            for spec in self.scenario.stations
            if spec.entity not in self.removed
        ]

    # =========================================================================
    # Delivery
    # =========================================================================

    def deliver_air(self, source: str, emission: AirEmission):
        event = emission.event
        at = self.now + self.knobs.air_delay_us

        if emission.to == BROADCAST:
            # Paging fan-out to every handset camped on the sender's carrier
            for name, ms in sorted(self.mobiles.items(), key=lambda item: parse_entity(item[0])[1]):
                if name not in self.removed and ms.camped_arfcn == event.arfcn:
                    self.queue.push(at, name, AirDelivery(event))
            return

        target = emission.to if emission.to is not None else self.arfcn_owner.get(event.arfcn)
        if target is None or target not in self.entities:
            self._dead_letter(source, target, event.kind.value, arfcn=event.arfcn)
            return
        self.queue.push(at, target, AirDelivery(event))

    def deliver_control(self, source: str, datagram: Datagram):
        target = self.station_ids.get(datagram.receiver)
        if target is None:
            self._dead_letter(source, None, "DATAGRAM", to=datagram.receiver)
            return
        self.queue.push(self.now + self.knobs.control_delay_us, target, DatagramDelivery(datagram, source))

    def _dead_letter(self, source: str, target: Optional[str], kind: str, **attrs):
        logger.info(f"t={self.now}: dead letter {kind} from {source} to {target}")
        record = TraceRecord.of(self.now, source, Verb.DEAD_LETTER, target or source, kind=kind, **attrs)
        self.recorder.extend([record])

    @staticmethod
    def _describe(payload) -> str:
        if isinstance(payload, AirDelivery):
            return payload.event.kind.value
        return "DATAGRAM"


def run_scenario(scenario: Scenario, observers: Iterable[Observer] = ()) -> RunResult:
    return Simulator(scenario, observers=observers).run()
