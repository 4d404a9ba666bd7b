import io
import json
import os
import socket
import sys
import tempfile
import unittest
from pathlib import Path

# Add hypercell to sys.path
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from app.commands.check import cmd_check
from app.commands.run_config import RunConfig
from app.commands.simulate import cmd_run
from app.commands.validate import cmd_validate
from main import main

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"
MO = str(SCENARIO_DIR / "mo.hcn-scn")


class CommandLineTests(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def run_mo(self, name="mo.hcn-trace", *extra):
        trace = self.dir / name
        code = main(["run", "--scenario", MO, "--trace-out", str(trace), *extra])
        return code, trace

    def test_run_then_check(self):
        """run exits 0 and writes a trace that passes its own template and fails the other."""
        code, trace = self.run_mo()
        self.assertEqual(code, 0)
        self.assertTrue(trace.exists())
        self.assertEqual(main(["check", "--trace", str(trace), "--template", "mo"]), 0)
        self.assertEqual(main(["check", "--trace", str(trace), "--template", "mt"]), 1)

    def test_same_seed_same_file(self):
        _, first = self.run_mo("a.hcn-trace", "--seed", "4")
        _, second = self.run_mo("b.hcn-trace", "--seed", "4")
        self.assertEqual(first.read_bytes(), second.read_bytes())

    def test_invalid_inputs(self):
        """Missing scenario, broken trace and bad options all exit 2."""
        self.assertEqual(main(["run", "--scenario", str(self.dir / "none.hcn-scn")]), 2)

        garbage = self.dir / "garbage.hcn-trace"
        garbage.write_text("this is not a trace\n", encoding="utf-8")
        self.assertEqual(main(["check", "--trace", str(garbage), "--template", "mo"]), 2)
        self.assertEqual(main(["check", "--trace", str(self.dir / "none"), "--template", "mo"]), 2)

        code, _ = self.run_mo("x.hcn-trace", "--horizon", "-5")
        self.assertEqual(code, 2)
        code, _ = self.run_mo("y.hcn-trace", "--sbs-port", "6000", "--dbs-port-base", "6000")
        self.assertEqual(code, 2)

    def test_validate(self):
        self.assertEqual(main(["validate", "--scenario", MO]), 0)
        broken = self.dir / "broken.hcn-scn"
        broken.write_text("[stations]\nrole=BTS id=0 arfcn=1 color_code=1\n", encoding="utf-8")
        self.assertEqual(main(["validate", "--scenario", str(broken)]), 2)

    def test_split_run_port_conflict(self):
        """An occupied SBS port exits 3."""
        blocker = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        blocker.bind(("127.0.0.1", 47800))
        try:
            code = main(["split-run", "--scenario", MO, "--trace-out", str(self.dir / "s.hcn-trace"),
                         "--sbs-port", "47800", "--dbs-port-base", "47801"])
        finally:
            blocker.close()
        self.assertEqual(code, 3)


class CommandOutputTests(unittest.TestCase):

    def test_run_json_lines(self):
        """Records first, then the summary and one energy line per DBS."""
        out = io.StringIO()
        with tempfile.TemporaryDirectory() as tmp:
            config = RunConfig(scenario=Path(MO), trace_out=Path(tmp) / "mo.hcn-trace", json_lines=True)
            self.assertEqual(cmd_run(config, out=out, err=io.StringIO()), 0)
        lines = [json.loads(line) for line in out.getvalue().splitlines()]
        self.assertEqual(lines[0]["verb"], "SCAN")
        self.assertEqual(lines[-2]["kind"], "summary")
        self.assertEqual(lines[-2]["attempted"], 1)
        self.assertEqual(lines[-1]["station"], "DBS:1")

    def test_run_text_summary(self):
        out = io.StringIO()
        with tempfile.TemporaryDirectory() as tmp:
            config = RunConfig(scenario=Path(MO), trace_out=Path(tmp) / "mo.hcn-trace")
            cmd_run(config, out=out, err=io.StringIO())
        text = out.getvalue()
        self.assertIn("records)", text)
        self.assertIn("calls connected", text)

    def test_check_json(self):
        with tempfile.TemporaryDirectory() as tmp:
            trace = Path(tmp) / "mo.hcn-trace"
            cmd_run(RunConfig(scenario=Path(MO), trace_out=trace), out=io.StringIO(), err=io.StringIO())
            out = io.StringIO()
            self.assertEqual(cmd_check(trace, "mo", json_lines=True, out=out, err=io.StringIO()), 0)
        verdict = json.loads(out.getvalue())
        self.assertEqual((verdict["passed"], verdict["calls"], verdict["failures"]), (True, ["100.1"], []))

    def test_validate_lists_stations(self):
        out = io.StringIO()
        cmd_validate(Path(MO), out=out, err=io.StringIO())
        text = out.getvalue()
        self.assertIn("valid", text)
        self.assertIn("SBS:0", text)
        self.assertIn("UL 900.0 MHz / DL 945.0 MHz", text)
        self.assertIn("capacity=7 power=ACTIVE", text)
        self.assertIn("2 mobile(s)", text)


if __name__ == '__main__':
    unittest.main()
