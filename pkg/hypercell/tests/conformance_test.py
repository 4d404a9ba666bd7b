import io
import os
import random
import re
import sys
import tempfile
import unittest
from pathlib import Path

# Add hypercell to sys.path
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from app.commands.check import cmd_check
from app.engine.conformance import (
    MO_TEMPLATE, MT_TEMPLATE, WAKE_VERBS, call_kind, check_call, check_trace, group_calls,
)
from app.engine.trace import TraceRecord, Verb, write_trace

MO_PATTERN = re.compile(
    r"^CHANNEL_REQUEST (WAKEUP WAKEUP_ACK )?APPOINTMENT APPOINTMENT_RESPONSE "
    r"ASSIGNMENT LINK_ESTABLISH TRAFFIC$"
)
MT_PATTERN = re.compile(
    r"^PAGE CHANNEL_REQUEST (WAKEUP WAKEUP_ACK )?APPOINTMENT APPOINTMENT_RESPONSE "
    r"ASSIGNMENT PAGING_ACK LINK_ESTABLISH TRAFFIC$"
)
# Verbs a call may carry that the templates ignore
NOISE = (Verb.RETUNE, Verb.RELEASE, Verb.STATUS_REPORT, Verb.DROP_DUPLICATE)


def records_for(call, verbs):
    return [TraceRecord.of(n, "SBS:0", verb, "MS:100", call=call) for n, verb in enumerate(verbs)]


def corrupt(rng, verbs, template):
    verbs = list(verbs)
    choice = rng.randrange(5)
    if choice == 0 and verbs:
        del verbs[rng.randrange(len(verbs))]
    elif choice == 1 and len(verbs) > 1:
        i, j = rng.sample(range(len(verbs)), 2)
        verbs[i], verbs[j] = verbs[j], verbs[i]
    elif choice == 2:
        verbs.insert(rng.randrange(len(verbs) + 1), rng.choice(list(template) + list(WAKE_VERBS)))
    elif choice == 3:
        verbs.insert(rng.randrange(len(verbs) + 1), rng.choice(WAKE_VERBS))
    else:
        verbs.insert(rng.randrange(len(verbs) + 1), rng.choice(NOISE))
    return verbs


def valid_sequence(rng, template):
    verbs = list(template)
    if rng.random() < 0.5:
        at = verbs.index(Verb.APPOINTMENT)
        verbs[at:at] = list(WAKE_VERBS)
    for _ in range(rng.randrange(3)):
        verbs.insert(rng.randrange(len(verbs) + 1), rng.choice(NOISE))
    return verbs


def oracle(verbs, template, pattern):
    kept = set(template) | set(WAKE_VERBS)
    return bool(pattern.match(" ".join(v.value for v in verbs if v in kept)))


class TemplateTests(unittest.TestCase):

    def test_mo_call_passes(self):
        verdict = check_trace(records_for("100.1", MO_TEMPLATE + (Verb.RELEASE,)), "mo")
        self.assertTrue(verdict.passed)
        self.assertEqual(verdict.describe(), "PASS: 1 MO call(s) conform")

    def test_mt_call_passes(self):
        verdict = check_trace(records_for("200.p1", MT_TEMPLATE), "mt")
        self.assertTrue(verdict.passed)

    def test_wake_variant_passes(self):
        """The wake-up pair may sit between the request and the appointment."""
        verbs = (Verb.CHANNEL_REQUEST,) + WAKE_VERBS + MO_TEMPLATE[1:]
        self.assertTrue(check_trace(records_for("100.1", verbs), "mo").passed)

    def test_wake_pair_elsewhere_fails(self):
        verbs = MO_TEMPLATE[:3] + WAKE_VERBS + MO_TEMPLATE[3:]
        verdict = check_trace(records_for("100.1", verbs), "mo")
        self.assertFalse(verdict.passed)
        self.assertIn("expected WAKEUP after CHANNEL_REQUEST, got APPOINTMENT", verdict.failures[0].detail)

    def test_no_calls_is_a_failure(self):
        """An empty trace, or one with only the other kind of call, does not pass."""
        self.assertFalse(check_trace([], "mo").passed)
        verdict = check_trace(records_for("200.p1", MT_TEMPLATE), "mo")
        self.assertFalse(verdict.passed)
        self.assertEqual(verdict.describe(), "FAIL: no MO calls in trace")

    def test_failure_names_first_broken_edge(self):
        verbs = [v for v in MO_TEMPLATE if v is not Verb.APPOINTMENT_RESPONSE]
        failure = check_call("100.1", records_for("100.1", verbs), MO_TEMPLATE)
        self.assertEqual(failure.detail, "expected APPOINTMENT_RESPONSE after APPOINTMENT, got ASSIGNMENT")
        self.assertIn("CHANNEL_REQUEST APPOINTMENT ASSIGNMENT", failure.describe())

        failure = check_call("100.1", records_for("100.1", MO_TEMPLATE[:4]), MO_TEMPLATE)
        self.assertEqual(failure.detail, "missing LINK_ESTABLISH after ASSIGNMENT")

        failure = check_call("100.1", records_for("100.1", MO_TEMPLATE + (Verb.TRAFFIC,)), MO_TEMPLATE)
        self.assertEqual(failure.detail, "unexpected TRAFFIC after TRAFFIC")

    def test_one_bad_call_fails_the_trace(self):
        records = records_for("100.1", MO_TEMPLATE) + records_for("101.1", MO_TEMPLATE[:-1])
        records = [TraceRecord(time=n, actor=r.actor, verb=r.verb, subject=r.subject, attrs=r.attrs)
                   for n, r in enumerate(records)]
        verdict = check_trace(records, "mo")
        self.assertEqual(verdict.checked_calls, ["100.1", "101.1"])
        self.assertEqual([f.call for f in verdict.failures], ["101.1"])
        self.assertTrue(verdict.describe().startswith("FAIL: 1 of 2 MO call(s)"))

    def test_unknown_template(self):
        with self.assertRaises(ValueError):
            check_trace([], "sms")

    def test_call_kind(self):
        self.assertEqual(call_kind("100.1"), "mo")
        self.assertEqual(call_kind("100.p3"), "mt")


class CheckCommandTests(unittest.TestCase):

    def check_file(self, records, template):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "call.hcn-trace"
            write_trace(path, records)
            out = io.StringIO()
            code = cmd_check(path, template, out=out, err=io.StringIO())
        return code, out.getvalue()

    def test_traffic_before_link_establish(self):
        """An MO call whose traffic starts before the link is up fails at that edge."""
        verbs = (Verb.CHANNEL_REQUEST, Verb.APPOINTMENT, Verb.APPOINTMENT_RESPONSE, Verb.ASSIGNMENT,
                 Verb.TRAFFIC, Verb.LINK_ESTABLISH)
        records = records_for("100.1", verbs)
        failure = check_call("100.1", records, MO_TEMPLATE)
        self.assertEqual(failure.detail, "expected LINK_ESTABLISH after ASSIGNMENT, got TRAFFIC")

        code, text = self.check_file(records, "mo")
        self.assertEqual(code, 1)
        self.assertIn("FAIL: 1 of 1 MO call(s)", text)
        self.assertIn("expected LINK_ESTABLISH after ASSIGNMENT, got TRAFFIC", text)

    def test_paging_ack_after_link_establish(self):
        verbs = (Verb.PAGE, Verb.CHANNEL_REQUEST, Verb.APPOINTMENT, Verb.APPOINTMENT_RESPONSE,
                 Verb.ASSIGNMENT, Verb.LINK_ESTABLISH, Verb.PAGING_ACK, Verb.TRAFFIC)
        records = records_for("100.p1", verbs)
        failure = check_call("100.p1", records, MT_TEMPLATE)
        self.assertEqual(failure.detail, "expected PAGING_ACK after ASSIGNMENT, got LINK_ESTABLISH")

        code, text = self.check_file(records, "mt")
        self.assertEqual(code, 1)
        self.assertIn("call 100.p1: expected PAGING_ACK after ASSIGNMENT, got LINK_ESTABLISH", text)


class GroupingTests(unittest.TestCase):

    def test_transaction_records_join_their_call(self):
        """DBS records carry only txn; the SBS appointment binds it to the call."""
        records = [
            TraceRecord.of(0, "MS:100", Verb.CHANNEL_REQUEST, "SBS:0", call="100.1"),
            TraceRecord.of(1, "SBS:0", Verb.WAKEUP, "DBS:2", call="100.1", txn=4),
            TraceRecord.of(2, "DBS:2", Verb.WAKEUP_ACK, "SBS:0", txn=4),
            TraceRecord.of(3, "SBS:0", Verb.APPOINTMENT, "DBS:2", call="100.1", txn=4),
            TraceRecord.of(4, "DBS:2", Verb.APPOINTMENT_RESPONSE, "SBS:0", txn=4, accept=True),
            TraceRecord.of(5, "DBS:1", Verb.APPOINTMENT_RESPONSE, "SBS:0", txn=9, accept=True),
        ]
        groups = group_calls(records)
        self.assertEqual(list(groups), ["100.1"])
        self.assertEqual([r.time for r in groups["100.1"]], [0, 1, 2, 3, 4])

    def test_transaction_ids_bound_only_by_the_sbs(self):
        records = [
            TraceRecord.of(0, "DBS:1", Verb.APPOINTMENT, "SBS:0", call="100.1", txn=1),
            TraceRecord.of(1, "DBS:1", Verb.APPOINTMENT_RESPONSE, "SBS:0", txn=1),
        ]
        self.assertEqual([r.time for r in group_calls(records)["100.1"]], [0])


class OracleTests(unittest.TestCase):

    def test_agrees_with_regular_expression(self):
        """1000 seeded traces, about half corrupted, judged the same way as the regex."""
        rng = random.Random(2024)
        for case in range(1000):
            template, pattern, name, call = (
                (MO_TEMPLATE, MO_PATTERN, "mo", "100.1") if case % 2 == 0
                else (MT_TEMPLATE, MT_PATTERN, "mt", "100.p1")
            )
            verbs = valid_sequence(rng, template)
            if rng.random() < 0.5:
                verbs = corrupt(rng, verbs, template)
            expected = oracle(verbs, template, pattern)
            verdict = check_trace(records_for(call, verbs), name)
            self.assertEqual(verdict.passed, expected, f"case {case}: {[v.value for v in verbs]}")


if __name__ == '__main__':
    unittest.main()
