"""
`run` and `split-run`: execute a scenario, write its trace and print a summary.
"""

import logging
import sys
from typing import TextIO

from app.commands.run_config import EXIT_INVALID, EXIT_OK, EXIT_TRANSPORT, RunConfig, Transport
from app.engine.scenario import load_scenario
from app.engine.simulator import RunResult, run_scenario
from app.engine.station_host import run_split
from app.engine.summary import format_summary, summarize, summary_json_lines
from app.engine.trace import write_trace
from app.errors import ScenarioError, TransportError

logger = logging.getLogger(__name__)


def cmd_run(config: RunConfig, out: TextIO = sys.stdout, err: TextIO = sys.stderr) -> int:
    try:
        scenario = load_scenario(config.scenario).with_overrides(seed=config.seed, horizon_us=config.horizon_us)
    except ScenarioError as e:
        for message in e.messages:
            print(f"invalid scenario {config.scenario}: {message}", file=err)
        return EXIT_INVALID

    try:
        if config.transport is Transport.UDP:
            result = run_split(scenario, host=config.host, sbs_port=config.sbs_port,
                               dbs_port_base=config.dbs_port_base, timeout_s=config.udp_timeout_s)
        else:
            result = run_scenario(scenario)
    except TransportError as e:
        print(f"transport failure: {e}", file=err)
        return EXIT_TRANSPORT

    trace_path = config.trace_path()
    write_trace(trace_path, result.records)
    logger.info(f"Trace with {len(result.records)} records written to {trace_path}")
    _report(result, config, out)
    return EXIT_OK


def cmd_split_run(config: RunConfig, out: TextIO = sys.stdout, err: TextIO = sys.stderr) -> int:
    return cmd_run(config.model_copy(update={"transport": Transport.UDP}), out=out, err=err)


def _report(result: RunResult, config: RunConfig, out: TextIO):
    summary = summarize(result.records, result.energy, result.end_us)
    if config.json_lines:
        for record in result.records:
            print(record.to_json(), file=out)
        for line in summary_json_lines(summary):
            print(line, file=out)
        return
    print(f"trace: {config.trace_path()} ({len(result.records)} records)", file=out)
    print(format_summary(summary), file=out)
