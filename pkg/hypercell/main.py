"""
hypercell command line

    python main.py run --scenario scenarios/mo.hcn-scn --seed 1
    python main.py split-run --scenario scenarios/wakeup.hcn-scn
    python main.py check --trace mo.hcn-trace --template mo
    python main.py validate --scenario scenarios/deny.hcn-scn

Exit codes: 0 ok, 1 conformance FAIL, 2 invalid input, 3 transport failure.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError

import hypercell_config as config
from app.commands.check import cmd_check
from app.commands.run_config import EXIT_INVALID, RunConfig, Transport
from app.commands.simulate import cmd_run, cmd_split_run
from app.commands.validate import cmd_validate
from app.engine.conformance import TEMPLATES

logger = logging.getLogger(__name__)


def _add_run_arguments(parser: argparse.ArgumentParser, transport: bool):
    parser.add_argument("--scenario", type=Path, required=True, help="scenario file (.hcn-scn)")
    parser.add_argument("--seed", type=int, help="override the scenario seed")
    if transport:
        parser.add_argument("--transport", choices=[t.value for t in Transport], default=Transport.INPROC.value)
    parser.add_argument("--trace-out", type=Path, help="trace path (default <scenario>.hcn-trace)")
    parser.add_argument("--horizon", type=int, dest="horizon_us", help="stop after this many microseconds")
    parser.add_argument("--json-lines", action="store_true", help="print records and summary as JSON lines")
    parser.add_argument("--sbs-port", type=int, default=config.SBS_PORT)
    parser.add_argument("--dbs-port-base", type=int, default=config.DBS_PORT_BASE)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hypercell", description="Hyper-cellular GSM SBS/DBS simulator")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v info, -vv debug")
    sub = parser.add_subparsers(dest="command", required=True)

    _add_run_arguments(sub.add_parser("run", help="run a scenario"), transport=True)
    _add_run_arguments(sub.add_parser("split-run", help="run with one process per station over UDP"), transport=False)

    check = sub.add_parser("check", help="check a trace against a call-flow template")
    check.add_argument("--trace", type=Path, required=True)
    check.add_argument("--template", choices=sorted(TEMPLATES), required=True)
    check.add_argument("--json-lines", action="store_true")

    validate = sub.add_parser("validate", help="validate a scenario file")
    validate.add_argument("--scenario", type=Path, required=True)
    return parser


def _log_level(verbosity: int) -> int:
    if verbosity >= 2:
        return logging.DEBUG
    if verbosity == 1:
        return logging.INFO
    return getattr(logging, config.LOG_LEVEL.upper(), logging.WARNING)


def _run_config(args: argparse.Namespace) -> Optional[RunConfig]:
    try:
        return RunConfig(
            scenario=args.scenario,
            seed=args.seed,
            transport=getattr(args, "transport", Transport.UDP.value),
            trace_out=args.trace_out,
            horizon_us=args.horizon_us,
            verbosity=args.verbose,
            json_lines=args.json_lines,
            sbs_port=args.sbs_port,
            dbs_port_base=args.dbs_port_base,
        )
    except ValidationError as e:
        for item in e.errors():
            location = ".".join(str(p) for p in item["loc"])
            print(f"invalid option {location}: {item['msg']}" if location else item["msg"], file=sys.stderr)
        return None


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=_log_level(args.verbose), format="%(levelname)s %(name)s: %(message)s")

    if args.command == "check":
        return cmd_check(args.trace, args.template, json_lines=args.json_lines)
    if args.command == "validate":
        return cmd_validate(args.scenario)

    run_config = _run_config(args)
    if run_config is None:
        return EXIT_INVALID
    if args.command == "split-run":
        return cmd_split_run(run_config)
    return cmd_run(run_config)


if __name__ == "__main__":
    sys.exit(main())
