"""
Data Base Station (DBS)

Silent until appointed: carries traffic channels (TCH with its SACCH/FACCH)
for the handsets the SBS sends its way, and sleeps when idle.

Power path: SLEEP -> WAKING -> ACTIVE on a wake-up command (after the wake
latency), ACTIVE -> SLEEP once no link has existed for the idle timeout.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional

from app.air.air_interface import AirEvent, AirKind
from app.air.um_channels import CarrierConfig, LogicalChannel, next_slot_start
from app.engine.steps import AirEmission, Datagram, PowerChange, StepResult, TimerRequest
from app.engine.trace import Verb
from app.protocol.endpoint import ControlEndpoint
from app.protocol.messages import (
    AppointmentResponse, ChannelAppointment, ControlMessage, LinkRelease,
    PowerState, ServiceKind, StatusReport, WakeupAck, WakeupCommand,
)
from app.utils.entities import DBS, MS, SBS, entity_id

logger = logging.getLogger(__name__)

MAX_CAPACITY = 8

_WAKE_TIMER = "wake_complete"
_IDLE_TIMER = "idle"
_TRAFFIC_TIMER = "traffic"


@dataclass
class ActiveLink:
    ms_id: int
    slot: int
    service: ServiceKind
    transaction_id: int
    call: Optional[str] = None
    paging_acked: bool = False
    established: bool = False


class DataStation:
    def __init__(
        self,
        station_id: int,
        carrier: CarrierConfig,
        sbs_id: int,
        capacity: int,
        power_state: PowerState,
        wake_latency_us: int,
        idle_timeout_us: int,
        channels: Iterable[LogicalChannel] = (),
    ):
        if not 1 <= capacity <= MAX_CAPACITY:
            raise ValueError(f"capacity must be in [1, {MAX_CAPACITY}], got {capacity}")
        if power_state is PowerState.WAKING:
            raise ValueError("a DBS starts either ACTIVE or SLEEP")

        self.station_id = station_id
        self.entity = entity_id(DBS, station_id)
        self.carrier = carrier
        self.channels = frozenset(channels)
        self.sbs_id = sbs_id
        self.sbs = entity_id(SBS, sbs_id)
        self.capacity = capacity
        self.power_state = power_state
        self.wake_latency_us = wake_latency_us
        self.idle_timeout_us = idle_timeout_us

        self.active_links: Dict[int, ActiveLink] = {}
        self.pending_wake_txns: List[int] = []
        self.deny_next = False
        self._idle_token = 0

        self.endpoint = ControlEndpoint(station_id, self.entity, {sbs_id: self.sbs})

    @property
    def occupied(self) -> int:
        return len(self.active_links)

    @property
    def established(self) -> int:
        return sum(1 for link in self.active_links.values() if link.established)

    @property
    def load(self) -> float:
        return self.occupied / self.capacity

    # =========================================================================
    # Entity interface
    # =========================================================================

    def start(self, now: int) -> StepResult:
        step = StepResult()
        if self.power_state is PowerState.ACTIVE:
            step.emit(self._arm_idle())
        return step

    def on_datagram(self, datagram: Datagram, now: int) -> StepResult:
        message, header, step = self.endpoint.incoming(datagram, now)
        if message is None:
            return step
        if isinstance(message.payload, ChannelAppointment):
            return step.merge(self.handle_appointment(now, message))
        if isinstance(message.payload, WakeupCommand):
            return step.merge(self.power_transition(now, message))
        logger.warning(f"{self.entity}: unexpected {message.kind.name} from SBS")
        return step

    def on_air(self, event: AirEvent, now: int) -> StepResult:
        ms_id = event.get("ms")
        if event.kind is AirKind.PAGING_ACK:
            return self._on_paging_ack(ms_id, now)
        if event.kind is AirKind.LINK_REQUEST:
            return self._on_link_request(ms_id, event.get("call"), now)
        if event.kind is AirKind.RELEASE:
            return self.release(now, ms_id)
        logger.warning(f"{self.entity}: ignoring {event.kind.value} from {event.sender}")
        return StepResult()

    def on_timer(self, timer: TimerRequest, now: int) -> StepResult:
        if timer.name == _WAKE_TIMER:
            return self._finish_wake(now)
        if timer.name == _IDLE_TIMER:
            return self._on_idle(timer.token, now)
        if timer.name == _TRAFFIC_TIMER:
            return self._send_traffic(timer.data, now)
        logger.warning(f"{self.entity}: unknown timer {timer.name}")
        return StepResult()

    def deny_next_appointment(self, now: int) -> StepResult:
        logger.info(f"{self.entity}: will deny the next appointment")
        self.deny_next = True
        return StepResult()

    # =========================================================================
    # Appointments
    # =========================================================================

    def handle_appointment(self, now: int, message: ControlMessage) -> StepResult:
        appointment: ChannelAppointment = message.payload
        txn = message.transaction_id
        step = StepResult()

        if self.power_state is not PowerState.ACTIVE:
            step.trace(now, self.entity, Verb.APPOINTMENT_WHILE_ASLEEP, self.sbs,
                       txn=txn, power=self.power_state)
            return step.merge(self._respond(now, txn, AppointmentResponse.deny()))

        if self.deny_next:
            self.deny_next = False
            return self._respond(now, txn, AppointmentResponse.deny())

        slot = self._lowest_free_slot()
        if slot is None or appointment.ms_id in self.active_links:
            return self._respond(now, txn, AppointmentResponse.deny())

        self.active_links[appointment.ms_id] = ActiveLink(
            ms_id=appointment.ms_id, slot=slot, service=appointment.service, transaction_id=txn,
        )
        self._idle_token += 1
        step.merge(self._respond(now, txn, AppointmentResponse(accept=True, arfcn=self.carrier.arfcn, slot=slot)))
        return step.merge(self._status_report(now))

    def _lowest_free_slot(self) -> Optional[int]:
        used = {link.slot for link in self.active_links.values()}
        return next((slot for slot in range(self.capacity) if slot not in used), None)

    def _respond(self, now: int, txn: int, response: AppointmentResponse) -> StepResult:
        step = StepResult()
        if response.accept:
            step.trace(now, self.entity, Verb.APPOINTMENT_RESPONSE, self.sbs, txn=txn,
                       accept=True, arfcn=response.arfcn, slot=response.slot)
        else:
            step.trace(now, self.entity, Verb.APPOINTMENT_RESPONSE, self.sbs, txn=txn, accept=False)
        return step.emit(self.endpoint.outgoing(self.sbs_id, ControlMessage(txn, response)))

    # =========================================================================
    # Power
    # =========================================================================

    def power_transition(self, now: int, message: ControlMessage) -> StepResult:
        txn = message.transaction_id
        step = StepResult()
        if self.power_state is PowerState.ACTIVE:
            return self._ack_wake(now, txn)

        self.pending_wake_txns.append(txn)
        if self.power_state is PowerState.SLEEP:
            logger.info(f"{self.entity}: waking up, ready in {self.wake_latency_us} us")
            self.power_state = PowerState.WAKING
            step.emit(PowerChange(self.station_id, PowerState.WAKING))
            step.emit(TimerRequest(self.wake_latency_us, _WAKE_TIMER))
        return step

    def _finish_wake(self, now: int) -> StepResult:
        step = StepResult()
        if self.power_state is not PowerState.WAKING:
            return step
        self.power_state = PowerState.ACTIVE
        step.emit(PowerChange(self.station_id, PowerState.ACTIVE))
        for txn in self.pending_wake_txns:
            step.merge(self._ack_wake(now, txn))
        self.pending_wake_txns.clear()
        step.merge(self._status_report(now))
        return step.emit(self._arm_idle())

    def _ack_wake(self, now: int, txn: int) -> StepResult:
        step = StepResult()
        step.trace(now, self.entity, Verb.WAKEUP_ACK, self.sbs, txn=txn)
        return step.emit(self.endpoint.outgoing(self.sbs_id, ControlMessage(txn, WakeupAck(self.station_id))))

    def _arm_idle(self) -> TimerRequest:
        self._idle_token += 1
        return TimerRequest(self.idle_timeout_us, _IDLE_TIMER, token=self._idle_token)

    def _on_idle(self, token: int, now: int) -> StepResult:
        step = StepResult()
        if token != self._idle_token or self.active_links or self.power_state is not PowerState.ACTIVE:
            return step
        logger.info(f"{self.entity}: idle for {self.idle_timeout_us} us, going to sleep")
        self.power_state = PowerState.SLEEP
        step.emit(PowerChange(self.station_id, PowerState.SLEEP))
        return step.merge(self._status_report(now))

    def _status_report(self, now: int) -> StepResult:
        report = StatusReport.from_load(self.power_state, self.load)
        step = StepResult()
        step.trace(now, self.entity, Verb.STATUS_REPORT, self.sbs,
                   power=report.power_state, level=report.load_level)
        return step.emit(self.endpoint.outgoing(self.sbs_id, ControlMessage(0, report)))

    # =========================================================================
    # Direct link with the handset
    # =========================================================================

    def _on_paging_ack(self, ms_id: int, now: int) -> StepResult:
        link = self.active_links.get(ms_id)
        if link is None or link.service is not ServiceKind.MT_CALL:
            logger.warning(f"{self.entity}: paging ack from MS {ms_id} without an MT appointment")
        else:
            link.paging_acked = True
        return StepResult()

    def _on_link_request(self, ms_id: int, call: Optional[str], now: int) -> StepResult:
        step = StepResult()
        ms = entity_id(MS, ms_id)
        link = self.active_links.get(ms_id)
        if link is None:
            return step.trace(now, self.entity, Verb.LINK_UNKNOWN, ms, ch=LogicalChannel.FACCH, call=call)
        if link.service is ServiceKind.MT_CALL and not link.paging_acked:
            return step.trace(now, self.entity, Verb.LINK_BEFORE_PAGING_ACK, ms,
                              ch=LogicalChannel.FACCH, call=call)

        link.call = call
        link.established = True
        step.trace(now, self.entity, Verb.LINK_ESTABLISH, ms, ch=LogicalChannel.FACCH, call=call, slot=link.slot)
        step.emit(AirEmission(self._air(AirKind.LINK_CONFIRM, ms=ms_id, call=call, slot=link.slot), to=ms))
        # First burst at the next start of the assigned timeslot, strictly later
        first_burst = next_slot_start(now + 1, link.slot)
        return step.emit(TimerRequest(first_burst - now, _TRAFFIC_TIMER, data=ms_id))

    def _send_traffic(self, ms_id: int, now: int) -> StepResult:
        step = StepResult()
        link = self.active_links.get(ms_id)
        if link is None or not link.established:
            return step
        ms = entity_id(MS, ms_id)
        step.trace(now, self.entity, Verb.TRAFFIC, ms, ch=LogicalChannel.TCH, call=link.call, slot=link.slot)
        return step.emit(AirEmission(self._air(AirKind.TRAFFIC, ms=ms_id, call=link.call, slot=link.slot), to=ms))

    def release(self, now: int, ms_id: int) -> StepResult:
        step = StepResult()
        link = self.active_links.pop(ms_id, None)
        if link is None:
            return step.trace(now, self.entity, Verb.RELEASE_UNKNOWN, entity_id(MS, ms_id),
                              ch=LogicalChannel.FACCH)

        logger.debug(f"{self.entity}: slot {link.slot} freed by MS {ms_id}")
        step.emit(self.endpoint.outgoing(self.sbs_id, ControlMessage(link.transaction_id, LinkRelease(ms_id))))
        step.merge(self._status_report(now))
        if not self.active_links:
            step.emit(self._arm_idle())
        return step

    def _air(self, kind: AirKind, **fields) -> AirEvent:
        return AirEvent(kind=kind, sender=self.entity, arfcn=self.carrier.arfcn, fields=fields)
