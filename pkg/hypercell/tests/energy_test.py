import os
import sys
import unittest

# Add hypercell to sys.path
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from app.engine.energy import EnergyLedger, StateInterval, energy_report
from app.engine.summary import format_summary, summarize, summary_json_lines
from app.engine.trace import TraceRecord, Verb
from app.protocol.messages import PowerState

DEFAULT_POWERS = {PowerState.SLEEP: 5.0, PowerState.WAKING: 30.0, PowerState.ACTIVE: 50.0}
SECOND = 1_000_000


class EnergyLedgerTests(unittest.TestCase):

    def test_asleep_whole_run(self):
        """10 s at 5 W is 50 J."""
        ledger = EnergyLedger(DEFAULT_POWERS)
        ledger.open(1, PowerState.SLEEP, 0)
        ledger.close(10 * SECOND)
        report = energy_report(ledger)
        self.assertAlmostEqual(report.total_joules, 50.0)
        self.assertEqual(report.per_dbs[0].time_in_state_us[PowerState.SLEEP], 10 * SECOND)

    def test_zero_power_never_active(self):
        ledger = EnergyLedger({PowerState.SLEEP: 0.0})
        ledger.open(1, PowerState.SLEEP, 0)
        ledger.close(10 * SECOND)
        report = energy_report(ledger)
        self.assertEqual(report.total_joules, 0.0)
        self.assertEqual(report.active_time_us(), 0)

    def test_sleep_then_active(self):
        """4 s SLEEP at 5 W plus 6 s ACTIVE at 50 W is 320 J."""
        ledger = EnergyLedger(DEFAULT_POWERS)
        ledger.open(1, PowerState.SLEEP, 0)
        ledger.transition(1, PowerState.ACTIVE, 4 * SECOND)
        ledger.close(10 * SECOND)
        self.assertAlmostEqual(energy_report(ledger).total_joules, 320.0)

    def test_partition_and_repeated_state(self):
        """Intervals tile the run; re-entering the current state adds nothing."""
        ledger = EnergyLedger(DEFAULT_POWERS)
        ledger.open(1, PowerState.ACTIVE, 0)
        ledger.transition(1, PowerState.ACTIVE, 100)
        ledger.transition(1, PowerState.SLEEP, 300)
        ledger.transition(1, PowerState.WAKING, 300)
        ledger.transition(1, PowerState.ACTIVE, 700)
        ledger.close(1000)
        intervals = ledger.intervals[1]
        self.assertEqual([i.state for i in intervals], [PowerState.ACTIVE, PowerState.WAKING, PowerState.ACTIVE])
        self.assertEqual(sum(i.duration_us for i in intervals), 1000)
        self.assertEqual(intervals[0].end_us, intervals[1].start_us)

    def test_bad_transitions(self):
        ledger = EnergyLedger(DEFAULT_POWERS)
        ledger.open(1, PowerState.ACTIVE, 100)
        with self.assertRaises(ValueError):
            ledger.transition(1, PowerState.SLEEP, 50)
        with self.assertRaises(ValueError):
            ledger.open(1, PowerState.SLEEP, 0)
        ledger.close(200)
        self.assertEqual(ledger.intervals[1], [StateInterval(PowerState.ACTIVE, 100, 200)])


class SummaryTests(unittest.TestCase):

    def test_counts_and_rendering(self):
        """Attempted, connected and rejected calls come from the trace verbs."""
        records = [
            TraceRecord.of(0, "MS:1", Verb.CHANNEL_REQUEST, "SBS:0", call="1.1"),
            TraceRecord.of(1, "MS:2", Verb.CHANNEL_REQUEST, "SBS:0", call="2.1"),
            TraceRecord.of(2, "SBS:0", Verb.REJECT, "MS:2", call="2.1"),
            TraceRecord.of(3, "DBS:1", Verb.TRAFFIC, "MS:1", call="1.1"),
        ]
        ledger = EnergyLedger(DEFAULT_POWERS)
        ledger.open(1, PowerState.ACTIVE, 0)
        ledger.close(2 * SECOND)
        summary = summarize(records, energy_report(ledger), 2 * SECOND)
        self.assertEqual((summary.attempted, summary.connected, summary.rejected), (2, 1, 1))

        text = format_summary(summary)
        self.assertIn("calls attempted", text)
        self.assertIn("DBS:1", text)
        self.assertIn("100.000", text)

        lines = summary_json_lines(summary)
        self.assertEqual(len(lines), 2)
        self.assertIn('"kind": "summary"', lines[0])


if __name__ == '__main__':
    unittest.main()
