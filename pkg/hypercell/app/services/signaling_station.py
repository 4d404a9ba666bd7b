"""
Signaling Base Station (SBS)

Owns control coverage: broadcast, camping admission, paging and random
access. Every call starts here; the SBS picks a data base station, appoints
it over the coordination link (waking it first when needed) and hands the
resulting channel to the handset on AGCH.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Iterable, Optional, Set

from app.air.air_interface import AirEvent, AirKind
from app.air.um_channels import CarrierConfig, LogicalChannel
from app.engine.steps import BROADCAST, AirEmission, Datagram, StepResult, TimerRequest
from app.engine.trace import Verb
from app.protocol.endpoint import ControlEndpoint
from app.protocol.messages import (
    MAX_SLOT, AppointmentResponse, ChannelAppointment, ControlMessage, LinkRelease,
    PowerState, ServiceKind, StatusReport, WakeupAck, WakeupCommand,
)
from app.services.dbs_selection import DbsDescriptor, DecisionKind, select_dbs
from app.utils.entities import DBS, MS, SBS, entity_id

logger = logging.getLogger(__name__)


@dataclass
class RegistrationRecord:
    ms_id: int
    registered_at: int


@dataclass
class PendingTransaction:
    ms_id: int
    service: ServiceKind
    dbs_id: int
    call: str
    retried: bool = False
    waking: bool = False


class SignalingStation:
    def __init__(
        self,
        station_id: int,
        carrier: CarrierConfig,
        dbs_registry: Iterable[DbsDescriptor],
        high_load_threshold: float,
        allowlist: Optional[Iterable[int]] = None,
        channels: Iterable[LogicalChannel] = (),
    ):
        self.station_id = station_id
        self.entity = entity_id(SBS, station_id)
        self.carrier = carrier
        self.channels = frozenset(channels)
        self.high_load_threshold = high_load_threshold
        # None means open admission
        self.allowlist: Optional[Set[int]] = set(allowlist) if allowlist is not None else None

        self.registry: Dict[int, DbsDescriptor] = {d.dbs_id: d for d in dbs_registry}
        self.registered_ms: Dict[int, RegistrationRecord] = {}
        self.pending_txns: Dict[int, PendingTransaction] = {}
        self.page_counts: Dict[int, int] = {}
        self._next_txn = 1

        peers = {dbs_id: entity_id(DBS, dbs_id) for dbs_id in self.registry}
        self.endpoint = ControlEndpoint(station_id, self.entity, peers)

    # =========================================================================
    # Entity interface
    # =========================================================================

    def start(self, now: int) -> StepResult:
        logger.info(f"{self.entity} on ARFCN {self.carrier.arfcn} with {len(self.registry)} DBS(s)")
        return StepResult()

    def on_timer(self, timer: TimerRequest, now: int) -> StepResult:
        logger.warning(f"{self.entity}: unexpected timer {timer.name}")
        return StepResult()

    def on_air(self, event: AirEvent, now: int) -> StepResult:
        if event.kind is AirKind.REGISTER_REQUEST:
            return self._on_register(event, now)
        if event.kind is AirKind.CHANNEL_REQUEST:
            return self.handle_channel_request(
                now, event.get("ms"), ServiceKind[event.get("service")], event.get("call"),
            )
        logger.warning(f"{self.entity}: ignoring {event.kind.value} from {event.sender}")
        return StepResult()

    def on_datagram(self, datagram: Datagram, now: int) -> StepResult:
        message, header, step = self.endpoint.incoming(datagram, now)
        if message is None:
            return step
        peer = self.endpoint.peer_entity(header.sender_id)
        payload = message.payload

        if isinstance(payload, AppointmentResponse):
            return step.merge(self.handle_appointment_response(now, header.sender_id, message))
        if isinstance(payload, WakeupAck):
            return step.merge(self._on_wakeup_ack(now, header.sender_id, message))
        if isinstance(payload, StatusReport):
            self._on_status_report(header.sender_id, payload)
            return step
        if isinstance(payload, LinkRelease):
            logger.info(f"{self.entity}: {peer} released the link of MS {payload.ms_id}")
            return step

        logger.warning(f"{self.entity}: unexpected {message.kind.name} from {peer}")
        return step

    # =========================================================================
    # Admission
    # =========================================================================

    def handle_registration(self, ms_id: int, now: int = 0) -> bool:
        """Accept iff admission is open or the MS is on the allowlist; re-registration is fine."""
        if self.allowlist is not None and ms_id not in self.allowlist:
            logger.info(f"{self.entity}: registration of MS {ms_id} refused")
            return False
        self.registered_ms.setdefault(ms_id, RegistrationRecord(ms_id, now))
        return True

    def _on_register(self, event: AirEvent, now: int) -> StepResult:
        ms_id = event.get("ms")
        accepted = self.handle_registration(ms_id, now)
        ms = entity_id(MS, ms_id)
        step = StepResult()
        step.trace(now, self.entity, Verb.REGISTER, ms, ch=LogicalChannel.AGCH,
                   result="ACCEPT" if accepted else "REJECT")
        step.emit(AirEmission(self._air(AirKind.REGISTER_RESULT, accepted=accepted, ms=ms_id), to=ms))
        return step

    # =========================================================================
    # Paging and call setup
    # =========================================================================

    def page(self, now: int, ms_id: int) -> StepResult:
        step = StepResult()
        ms = entity_id(MS, ms_id)
        if ms_id not in self.registered_ms:
            return step.trace(now, self.entity, Verb.PAGE_UNKNOWN_MS, ms)

        # Stateless: every page is a fresh emission with its own call id
        count = self.page_counts.get(ms_id, 0) + 1
        self.page_counts[ms_id] = count
        call = f"{ms_id}.p{count}"
        step.trace(now, self.entity, Verb.PAGE, ms, ch=LogicalChannel.PCH, call=call)
        step.emit(AirEmission(self._air(AirKind.PAGE, ms=ms_id, call=call), to=BROADCAST))
        return step

    def handle_channel_request(self, now: int, ms_id: int, service: ServiceKind, call: str) -> StepResult:
        step = StepResult()
        ms = entity_id(MS, ms_id)
        if ms_id not in self.registered_ms:
            return step.trace(now, self.entity, Verb.UNREGISTERED_REQUEST, ms,
                              ch=LogicalChannel.RACH, call=call)
        return self._dispatch(now, ms_id, service, call, exclude=(), retried=False)

    def _dispatch(self, now: int, ms_id: int, service: ServiceKind, call: str,
                  exclude: Iterable[int], retried: bool) -> StepResult:
        decision = select_dbs(self.registry, self.high_load_threshold, exclude=exclude)
        logger.debug(f"{self.entity}: call {call} -> {decision.kind.value} {decision.dbs_id}")

        if decision.kind is DecisionKind.REJECT:
            return self._reject(now, ms_id, call, decision.reason.value)

        txn = self._new_txn()
        pending = PendingTransaction(ms_id=ms_id, service=service, dbs_id=decision.dbs_id,
                                     call=call, retried=retried)
        self.pending_txns[txn] = pending

        if decision.kind is DecisionKind.WAKE_THEN_APPOINT:
            pending.waking = True
            self.registry[decision.dbs_id].power_state = PowerState.WAKING
            step = StepResult()
            step.trace(now, self.entity, Verb.WAKEUP, entity_id(DBS, decision.dbs_id),
                       call=call, txn=txn)
            message = ControlMessage(txn, WakeupCommand(dbs_id=decision.dbs_id))
            return step.emit(self.endpoint.outgoing(decision.dbs_id, message))

        return self._appoint(now, txn, pending)

    def _appoint(self, now: int, txn: int, pending: PendingTransaction) -> StepResult:
        descriptor = self.registry[pending.dbs_id]
        # Hint only: the DBS picks the actual slot
        slot_hint = min(descriptor.occupied, MAX_SLOT)
        appointment = ChannelAppointment(ms_id=pending.ms_id, service=pending.service, slot=slot_hint)

        step = StepResult()
        step.trace(now, self.entity, Verb.APPOINTMENT, entity_id(DBS, pending.dbs_id),
                   call=pending.call, txn=txn, service=pending.service.label, slot=slot_hint)
        return step.emit(self.endpoint.outgoing(pending.dbs_id, ControlMessage(txn, appointment)))

    def _reject(self, now: int, ms_id: int, call: str, reason: str) -> StepResult:
        ms = entity_id(MS, ms_id)
        step = StepResult()
        step.trace(now, self.entity, Verb.REJECT, ms, ch=LogicalChannel.AGCH, call=call, reason=reason)
        return step.emit(AirEmission(self._air(AirKind.ASSIGNMENT_REJECT, ms=ms_id, call=call, reason=reason), to=ms))

    # =========================================================================
    # Coordination link
    # =========================================================================

    def handle_appointment_response(self, now: int, dbs_id: int, message: ControlMessage) -> StepResult:
        step = StepResult()
        txn = message.transaction_id
        pending = self.pending_txns.get(txn)
        if pending is None or pending.waking or pending.dbs_id != dbs_id:
            return step.trace(now, self.entity, Verb.ORPHAN_RESPONSE, entity_id(DBS, dbs_id), txn=txn)

        del self.pending_txns[txn]
        response: AppointmentResponse = message.payload
        if not response.accept:
            if pending.retried:
                return self._reject(now, pending.ms_id, pending.call, "NO_DBS_AVAILABLE")
            # A DBS that fell asleep before the appointment arrived can still be woken
            asleep = self.registry[dbs_id].power_state is PowerState.SLEEP
            return self._dispatch(now, pending.ms_id, pending.service, pending.call,
                                  exclude=() if asleep else (dbs_id,), retried=True)

        descriptor = self.registry[dbs_id]
        descriptor.occupied = min(descriptor.occupied + 1, descriptor.capacity)
        ms = entity_id(MS, pending.ms_id)
        dbs = entity_id(DBS, dbs_id)
        step.trace(now, self.entity, Verb.ASSIGNMENT, ms, ch=LogicalChannel.AGCH, call=pending.call,
                   dbs=dbs, arfcn=response.arfcn, slot=response.slot)
        step.emit(AirEmission(self._air(
            AirKind.ASSIGNMENT, ms=pending.ms_id, call=pending.call, service=pending.service.name,
            dbs=dbs, arfcn=response.arfcn, slot=response.slot,
        ), to=ms))
        return step

    def _on_wakeup_ack(self, now: int, dbs_id: int, message: ControlMessage) -> StepResult:
        txn = message.transaction_id
        pending = self.pending_txns.get(txn)
        if pending is None or not pending.waking or pending.dbs_id != dbs_id:
            step = StepResult()
            return step.trace(now, self.entity, Verb.ORPHAN_WAKEUP_ACK, entity_id(DBS, dbs_id), txn=txn)

        pending.waking = False
        self.registry[dbs_id].power_state = PowerState.ACTIVE
        # Same transaction carries on into the appointment
        return self._appoint(now, txn, pending)

    def _on_status_report(self, dbs_id: int, report: StatusReport):
        descriptor = self.registry.get(dbs_id)
        if descriptor is None:
            logger.warning(f"{self.entity}: status report from unknown DBS {dbs_id}")
            return
        if descriptor.power_state is PowerState.WAKING and report.power_state is PowerState.SLEEP:
            # Sent before our wake-up command arrived
            return
        descriptor.power_state = report.power_state
        descriptor.occupied = round(report.load_level * descriptor.capacity / 255)
        logger.debug(f"{self.entity}: DBS {dbs_id} now {descriptor.power_state.value} "
                     f"{descriptor.occupied}/{descriptor.capacity}")

    # =========================================================================
    # Helpers
    # =========================================================================

    def _new_txn(self) -> int:
        txn = self._next_txn
        self._next_txn += 1
        return txn

    def _air(self, kind: AirKind, **fields) -> AirEvent:
        return AirEvent(kind=kind, sender=self.entity, arfcn=self.carrier.arfcn, fields=fields)
