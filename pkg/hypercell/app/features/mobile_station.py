"""
Mobile Station (MS)

A plain GSM handset: it scans for the carrier that broadcasts BCH, camps on
it, asks for channels on RACH and follows whatever assignment it gets. It has
no idea that the station it camps on and the one carrying its call differ.

Phases: OFF -> SCANNING -> CAMPED -> REQUESTING -> ASSIGNED -> IN_CALL -> CAMPED,
plus REQUESTING -> CAMPED on reject and SCANNING -> SCANNING on a failed scan
or refused registration.
"""

import logging
import random
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, Optional

from app.air.air_interface import (
    RA_CAUSE_ORIGINATING, RA_CAUSE_PAGING_RESPONSE, AirEvent, AirKind, VisibleCarrier,
    random_reference,
)
from app.air.um_channels import LogicalChannel
from app.engine.steps import AirEmission, StepResult, TimerRequest
from app.engine.trace import Verb
from app.protocol.messages import ServiceKind
from app.utils.entities import MS, entity_id

logger = logging.getLogger(__name__)

_CALL_TIMER = "call_end"


class MsPhase(str, Enum):
    OFF = "OFF"
    SCANNING = "SCANNING"
    CAMPED = "CAMPED"
    REQUESTING = "REQUESTING"
    ASSIGNED = "ASSIGNED"
    IN_CALL = "IN_CALL"


@dataclass(frozen=True)
class ServingDbs:
    station: str
    arfcn: int
    slot: int


@dataclass
class OutstandingCall:
    call: str
    service: ServiceKind
    duration_us: int
    traffic_seen: bool = False


class MobileStation:
    def __init__(self, ms_id: int, rng: Optional[random.Random] = None):
        self.ms_id = ms_id
        self.entity = entity_id(MS, ms_id)
        self.phase = MsPhase.OFF
        self.camped_arfcn: Optional[int] = None
        self.camped_station: Optional[str] = None
        self.serving_dbs: Optional[ServingDbs] = None
        self.call: Optional[OutstandingCall] = None
        # Terminated call durations by page call id, set by the scenario
        self.terminated_duration_us: Dict[str, int] = {}
        self._rng = rng or random.Random(ms_id)
        self._originated = 0

    # =========================================================================
    # Power-on and camping
    # =========================================================================

    def power_on_scan(self, now: int, carriers: Iterable[VisibleCarrier]) -> StepResult:
        step = StepResult()
        if self.phase not in (MsPhase.OFF, MsPhase.SCANNING):
            logger.info(f"{self.entity}: already on ({self.phase.value})")
            return step

        self.phase = MsPhase.SCANNING
        broadcasting = sorted((c for c in carriers if c.broadcasting), key=lambda c: c.arfcn)
        if len(broadcasting) != 1:
            # Nothing to camp on, or no unique cell
            return step.trace(now, self.entity, Verb.SCAN_FAILED, self.entity, found=len(broadcasting))

        cell = broadcasting[0]
        step.trace(now, self.entity, Verb.SCAN, cell.station, arfcn=cell.arfcn)
        step.trace(now, self.entity, Verb.REGISTER, cell.station, ch=LogicalChannel.RACH)
        self.camped_station = cell.station
        self.camped_arfcn = cell.arfcn
        return step.emit(AirEmission(AirEvent(
            kind=AirKind.REGISTER_REQUEST, sender=self.entity, arfcn=cell.arfcn, fields={"ms": self.ms_id},
        )))

    def _on_register_result(self, event: AirEvent, now: int) -> StepResult:
        if self.phase is not MsPhase.SCANNING:
            return StepResult()
        if event.get("accepted"):
            self.phase = MsPhase.CAMPED
            logger.info(f"{self.entity}: camped on ARFCN {self.camped_arfcn}")
        else:
            self.camped_station = None
            self.camped_arfcn = None
            logger.info(f"{self.entity}: registration refused, still scanning")
        return StepResult()

    # =========================================================================
    # Call setup
    # =========================================================================

    def originate(self, now: int, service: ServiceKind = ServiceKind.MO_CALL,
                  duration_us: int = 0, call: Optional[str] = None) -> StepResult:
        step = StepResult()
        if self.phase is not MsPhase.CAMPED:
            return step.trace(now, self.entity, Verb.ORIGINATE_IGNORED, self.entity,
                              phase=self.phase, service=service.label)

        if call is None:
            self._originated += 1
            call = f"{self.ms_id}.{self._originated}"
        cause = RA_CAUSE_ORIGINATING if service is ServiceKind.MO_CALL else RA_CAUSE_PAGING_RESPONSE
        ra = random_reference(cause, self._rng.getrandbits(5))

        self.phase = MsPhase.REQUESTING
        self.call = OutstandingCall(call=call, service=service, duration_us=duration_us)
        step.trace(now, self.entity, Verb.CHANNEL_REQUEST, self.camped_station, ch=LogicalChannel.RACH,
                   call=call, service=service.label, ra=ra)
        return step.emit(AirEmission(AirEvent(
            kind=AirKind.CHANNEL_REQUEST, sender=self.entity, arfcn=self.camped_arfcn,
            fields={"ms": self.ms_id, "call": call, "service": service.name, "ra": ra},
        )))

    def expect_terminated_call(self, call: str, duration_us: int):
        self.terminated_duration_us[call] = duration_us

    def handle_paging(self, event: AirEvent, now: int) -> StepResult:
        if event.get("ms") != self.ms_id:
            return StepResult()
        duration = self.terminated_duration_us.pop(event.get("call"), 0)
        if self.phase is not MsPhase.CAMPED:
            step = StepResult()
            return step.trace(now, self.entity, Verb.PAGE_IGNORED, self.camped_station or self.entity,
                              call=event.get("call"), phase=self.phase)
        return self.originate(now, ServiceKind.MT_CALL, duration, call=event.get("call"))

    def handle_assignment(self, event: AirEvent, now: int) -> StepResult:
        step = StepResult()
        if self.phase is not MsPhase.REQUESTING or self.call is None or event.get("call") != self.call.call:
            return step.trace(now, self.entity, Verb.ORPHAN_ASSIGNMENT, event.sender, call=event.get("call"))

        if event.kind is AirKind.ASSIGNMENT_REJECT:
            logger.info(f"{self.entity}: call {self.call.call} rejected ({event.get('reason')})")
            self.phase = MsPhase.CAMPED
            self.call = None
            return step

        dbs = ServingDbs(station=event.get("dbs"), arfcn=event.get("arfcn"), slot=event.get("slot"))
        self.serving_dbs = dbs
        self.phase = MsPhase.ASSIGNED
        call = self.call.call
        step.trace(now, self.entity, Verb.RETUNE, dbs.station, arfcn=dbs.arfcn, slot=dbs.slot, call=call)

        if self.call.service is ServiceKind.MT_CALL:
            step.trace(now, self.entity, Verb.PAGING_ACK, dbs.station, ch=LogicalChannel.FACCH, call=call)
            step.emit(AirEmission(self._to_dbs(AirKind.PAGING_ACK, call=call)))
        return step.emit(AirEmission(self._to_dbs(AirKind.LINK_REQUEST, call=call)))

    def _on_link_confirm(self, event: AirEvent, now: int) -> StepResult:
        if self.phase is MsPhase.ASSIGNED and self.call and event.get("call") == self.call.call:
            self.phase = MsPhase.IN_CALL
        else:
            logger.warning(f"{self.entity}: stray link confirm in {self.phase.value}")
        return StepResult()

    def _on_traffic(self, event: AirEvent, now: int) -> StepResult:
        step = StepResult()
        if self.phase is not MsPhase.IN_CALL or self.call is None or self.call.traffic_seen:
            return step
        # Call duration counts from the first burst
        self.call.traffic_seen = True
        return step.emit(TimerRequest(self.call.duration_us, _CALL_TIMER, data=self.call.call))

    # =========================================================================
    # Teardown
    # =========================================================================

    def end_call(self, now: int) -> StepResult:
        step = StepResult()
        if self.phase is not MsPhase.IN_CALL:
            return step.trace(now, self.entity, Verb.END_IGNORED, self.entity, phase=self.phase)

        call = self.call.call
        step.trace(now, self.entity, Verb.RELEASE, self.serving_dbs.station, ch=LogicalChannel.FACCH, call=call)
        step.emit(AirEmission(self._to_dbs(AirKind.RELEASE, call=call)))
        self.phase = MsPhase.CAMPED
        self.serving_dbs = None
        self.call = None
        return step

    # =========================================================================
    # Entity interface
    # =========================================================================

    def start(self, now: int) -> StepResult:
        return StepResult()

    def on_air(self, event: AirEvent, now: int) -> StepResult:
        if event.kind is AirKind.REGISTER_RESULT:
            return self._on_register_result(event, now)
        if event.kind is AirKind.PAGE:
            return self.handle_paging(event, now)
        if event.kind in (AirKind.ASSIGNMENT, AirKind.ASSIGNMENT_REJECT):
            return self.handle_assignment(event, now)
        if event.kind is AirKind.LINK_CONFIRM:
            return self._on_link_confirm(event, now)
        if event.kind is AirKind.TRAFFIC:
            return self._on_traffic(event, now)
        logger.warning(f"{self.entity}: ignoring {event.kind.value} from {event.sender}")
        return StepResult()

    def on_timer(self, timer: TimerRequest, now: int) -> StepResult:
        if timer.name == _CALL_TIMER:
            if self.call is None or self.call.call != timer.data:
                return StepResult()
            return self.end_call(now)
        logger.warning(f"{self.entity}: unknown timer {timer.name}")
        return StepResult()

    def _to_dbs(self, kind: AirKind, **fields) -> AirEvent:
        fields["ms"] = self.ms_id
        return AirEvent(kind=kind, sender=self.entity, arfcn=self.serving_dbs.arfcn, fields=fields)
