"""
Trace and state predicates every run must satisfy: functionality and
channel placement, per-call causality, handsets only talking to a DBS they
were assigned, and slot conservation at every simulated instant.
"""

import logging
from typing import Dict, Iterable, List, Set

from app.air.air_interface import AirKind
from app.air.um_channels import LogicalChannel, Role, allowed_roles
from app.engine.conformance import group_calls
from app.engine.event_queue import SimEvent
from app.engine.simulator import AirDelivery
from app.engine.trace import TraceRecord, Verb
from app.features.mobile_station import MsPhase
from app.protocol.messages import PowerState
from app.services.data_station import DataStation
from app.utils.entities import DBS, MS, SBS, is_station, role_of

logger = logging.getLogger(__name__)

# Verbs tied to one functionality, and the role that alone may perform them
_FUNCTIONALITY_ACTORS = {
    Verb.PAGE: SBS,
    Verb.LINK_ESTABLISH: DBS,
    Verb.TRAFFIC: DBS,
}

# (earlier, later) pairs that must keep their order within a call
_CAUSAL_EDGES = (
    (Verb.PAGE, Verb.CHANNEL_REQUEST),
    (Verb.CHANNEL_REQUEST, Verb.APPOINTMENT),
    (Verb.APPOINTMENT, Verb.APPOINTMENT_RESPONSE),
    (Verb.APPOINTMENT_RESPONSE, Verb.ASSIGNMENT),
    (Verb.ASSIGNMENT, Verb.PAGING_ACK),
    (Verb.ASSIGNMENT, Verb.LINK_ESTABLISH),
    (Verb.PAGING_ACK, Verb.LINK_ESTABLISH),
    (Verb.LINK_ESTABLISH, Verb.TRAFFIC),
    (Verb.TRAFFIC, Verb.RELEASE),
)


def check_placement(records: Iterable[TraceRecord]) -> List[str]:
    """Functionality placement and channel placement, one message per offending record."""
    violations = []
    for record in records:
        owner = _FUNCTIONALITY_ACTORS.get(record.verb)
        if owner is not None and role_of(record.actor) != owner:
            violations.append(f"{record.to_line()}: {record.verb.value} must come from a {owner}")

        channel_name = record.attr("ch")
        if channel_name is None:
            continue
        channel = LogicalChannel(channel_name)
        station = record.actor if is_station(record.actor) else record.subject
        if not is_station(station):
            violations.append(f"{record.to_line()}: {channel.value} record without a base station end")
            continue
        if Role(role_of(station)) not in allowed_roles(channel):
            violations.append(f"{record.to_line()}: {channel.value} not allowed on {role_of(station)}")
    return violations


def check_causality(records: Iterable[TraceRecord]) -> List[str]:
    """Within every call, effects never precede their causes."""
    violations = []
    for call, call_records in group_calls(records).items():
        first: Dict[Verb, int] = {}
        for index, record in enumerate(call_records):
            first.setdefault(record.verb, index)
        for earlier, later in _CAUSAL_EDGES:
            if later in first and earlier in first and first[later] < first[earlier]:
                violations.append(f"call {call}: {later.value} before {earlier.value}")
        if Verb.TRAFFIC in first and Verb.LINK_ESTABLISH not in first:
            violations.append(f"call {call}: TRAFFIC without LINK_ESTABLISH")
        violations.extend(_wake_order(call, call_records))
    return violations


def _wake_order(call: str, call_records: List[TraceRecord]) -> List[str]:
    """A woken DBS is appointed only after its WAKEUP_ACK for the same transaction."""
    positions: Dict[tuple, int] = {}
    for index, record in enumerate(call_records):
        positions.setdefault((record.verb, record.attr("txn")), index)
    violations = []
    for (verb, txn), index in positions.items():
        if verb is not Verb.WAKEUP:
            continue
        ack = positions.get((Verb.WAKEUP_ACK, txn))
        appointment = positions.get((Verb.APPOINTMENT, txn))
        if ack is not None and ack < index:
            violations.append(f"call {call}: WAKEUP_ACK before WAKEUP (txn {txn})")
        if appointment is not None and (ack is None or appointment < ack):
            violations.append(f"call {call}: APPOINTMENT before WAKEUP_ACK (txn {txn})")
    return violations


def check_assigned_before_contact(records: Iterable[TraceRecord]) -> List[str]:
    """A handset addresses a DBS only after an ASSIGNMENT naming that DBS reached it."""
    assigned: Dict[str, Set[str]] = {}
    violations = []
    for record in records:
        if record.verb is Verb.ASSIGNMENT:
            assigned.setdefault(record.subject, set()).add(record.attr("dbs"))
        elif role_of(record.actor) == MS and role_of(record.subject) == DBS:
            if record.subject not in assigned.get(record.actor, set()):
                violations.append(f"{record.to_line()}: {record.actor} never assigned to {record.subject}")
    return violations


def check_trace_invariants(records: List[TraceRecord]) -> List[str]:
    return check_placement(records) + check_causality(records) + check_assigned_before_contact(records)


class ConservationMonitor:
    """
    Simulator observer: at the end of every instant, established links summed
    over DBSs equal the handsets in a call plus link confirmations and releases
    still in the air, and every DBS load stays in range.
    """

    def __init__(self):
        self.violations: List[str] = []
        self.instants = 0

    def __call__(self, simulator, now: int):
        self.instants += 1
        data_stations = [s for s in simulator.stations.values() if isinstance(s, DataStation)]
        established = sum(s.established for s in data_stations)
        in_call = sum(
            1 for name, ms in simulator.mobiles.items()
            if ms.phase is MsPhase.IN_CALL and name not in simulator.removed
        )
        in_flight = sum(1 for event in simulator.queue.pending() if _settles_link(event, simulator.removed))
        if established != in_call + in_flight:
            self.violations.append(f"t={now}: {established} established link(s) but {in_call} MS(s) in call "
                                   f"and {in_flight} in the air")

        for station in data_stations:
            if not 0 <= station.occupied <= station.capacity:
                self.violations.append(f"t={now}: {station.entity} holds {station.occupied}/{station.capacity}")
            if station.power_state is PowerState.SLEEP and station.occupied:
                self.violations.append(f"t={now}: {station.entity} asleep with {station.occupied} link(s)")


def _settles_link(event: SimEvent, removed: Set[str]) -> bool:
    """An air delivery that will move a handset into or out of its call."""
    if not isinstance(event.payload, AirDelivery):
        return False
    air = event.payload.event
    if air.kind is AirKind.LINK_CONFIRM:
        return event.target not in removed
    return air.kind is AirKind.RELEASE and air.sender not in removed
