"""
Conformance checking of traces against the call-flow templates.

Records are grouped per call: directly by their `call` attribute, or through
their `txn` when the SBS opened that transaction for a call. Each call's
template verbs (plus the wake-up pair) must then read exactly like the
template, in order. Timestamps play no part.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from app.engine.trace import TraceRecord, Verb
from app.utils.entities import SBS, role_of

logger = logging.getLogger(__name__)

MO_TEMPLATE: Tuple[Verb, ...] = (
    Verb.CHANNEL_REQUEST, Verb.APPOINTMENT, Verb.APPOINTMENT_RESPONSE,
    Verb.ASSIGNMENT, Verb.LINK_ESTABLISH, Verb.TRAFFIC,
)
MT_TEMPLATE: Tuple[Verb, ...] = (
    Verb.PAGE, Verb.CHANNEL_REQUEST, Verb.APPOINTMENT, Verb.APPOINTMENT_RESPONSE,
    Verb.ASSIGNMENT, Verb.PAGING_ACK, Verb.LINK_ESTABLISH, Verb.TRAFFIC,
)
TEMPLATES: Dict[str, Tuple[Verb, ...]] = {"mo": MO_TEMPLATE, "mt": MT_TEMPLATE}
WAKE_VERBS: Tuple[Verb, ...] = (Verb.WAKEUP, Verb.WAKEUP_ACK)

# SBS records that bind a transaction id to a call
_TXN_OPENERS = (Verb.APPOINTMENT, Verb.WAKEUP)


def call_kind(call: str) -> str:
    """MT calls are numbered by the paging SBS as "<ms>.p<n>"."""
    _, _, number = call.partition(".")
    return "mt" if number.startswith("p") else "mo"


def group_calls(records: Iterable[TraceRecord]) -> Dict[str, List[TraceRecord]]:
    groups: Dict[str, List[TraceRecord]] = {}
    txn_calls: Dict[str, str] = {}
    for record in records:
        call = record.attr("call")
        txn = record.attr("txn")
        if call is not None:
            if txn is not None and record.verb in _TXN_OPENERS and role_of(record.actor) == SBS:
                txn_calls[txn] = call
        elif txn is not None:
            call = txn_calls.get(txn)
        if call is not None:
            groups.setdefault(call, []).append(record)
    return groups


def expected_sequences(template: Sequence[Verb]) -> List[Tuple[Verb, ...]]:
    plain = tuple(template)
    at = plain.index(Verb.APPOINTMENT)
    return [plain, plain[:at] + WAKE_VERBS + plain[at:]]


@dataclass
class CallFailure:
    call: str
    actual: Tuple[Verb, ...]
    detail: str

    def describe(self) -> str:
        verbs = " ".join(v.value for v in self.actual) or "(nothing)"
        return f"call {self.call}: {self.detail} [{verbs}]"


@dataclass
class Verdict:
    template: str
    checked_calls: List[str] = field(default_factory=list)
    failures: List[CallFailure] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(self.checked_calls) and not self.failures

    def describe(self) -> str:
        if not self.checked_calls:
            return f"FAIL: no {self.template.upper()} calls in trace"
        if self.failures:
            lines = [f"FAIL: {len(self.failures)} of {len(self.checked_calls)} {self.template.upper()} call(s)"]
            lines.extend(f"  {failure.describe()}" for failure in self.failures)
            return "\n".join(lines)
        return f"PASS: {len(self.checked_calls)} {self.template.upper()} call(s) conform"


def _first_violation(actual: Tuple[Verb, ...], template: Sequence[Verb]) -> str:
    """Name the edge where `actual` leaves the closest allowed sequence."""
    wake = Verb.WAKEUP in actual or Verb.WAKEUP_ACK in actual
    expected = expected_sequences(template)[1 if wake else 0]
    for index, (want, got) in enumerate(zip(expected, actual)):
        if want is not got:
            after = expected[index - 1].value if index else "start"
            return f"expected {want.value} after {after}, got {got.value}"
    if len(actual) < len(expected):
        after = expected[len(actual) - 1].value if actual else "start"
        return f"missing {expected[len(actual)].value} after {after}"
    return f"unexpected {actual[len(expected)].value} after {expected[-1].value}"


def check_call(call: str, records: Iterable[TraceRecord], template: Sequence[Verb]) -> Optional[CallFailure]:
    kept = set(template) | set(WAKE_VERBS)
    actual = tuple(r.verb for r in records if r.verb in kept)
    if actual in expected_sequences(template):
        return None
    return CallFailure(call=call, actual=actual, detail=_first_violation(actual, template))


def check_trace(records: Iterable[TraceRecord], template: str) -> Verdict:
    if template not in TEMPLATES:
        raise ValueError(f"unknown template {template!r}, expected one of {sorted(TEMPLATES)}")
    verdict = Verdict(template=template)
    for call, call_records in group_calls(records).items():
        if call_kind(call) != template:
            continue
        verdict.checked_calls.append(call)
        failure = check_call(call, call_records, TEMPLATES[template])
        if failure is not None:
            logger.debug(failure.describe())
            verdict.failures.append(failure)
    return verdict
