import json
import logging
import sys
from pathlib import Path
from typing import TextIO

from app.commands.run_config import EXIT_FAIL, EXIT_INVALID, EXIT_OK
from app.engine.conformance import check_trace
from app.engine.trace import read_trace
from app.errors import TraceFormatError

logger = logging.getLogger(__name__)


def cmd_check(trace_path: Path, template: str, json_lines: bool = False,
              out: TextIO = sys.stdout, err: TextIO = sys.stderr) -> int:
    """Check a trace file against the mo/mt call-flow template."""
    try:
        records = read_trace(trace_path)
    except FileNotFoundError:
        print(f"no such trace file: {trace_path}", file=err)
        return EXIT_INVALID
    except TraceFormatError as e:
        print(f"unparseable trace {trace_path}: {e}", file=err)
        return EXIT_INVALID

    verdict = check_trace(records, template)
    if json_lines:
        print(json.dumps({
            "template": template,
            "passed": verdict.passed,
            "calls": verdict.checked_calls,
            "failures": [f.describe() for f in verdict.failures],
        }), file=out)
    else:
        print(verdict.describe(), file=out)
    return EXIT_OK if verdict.passed else EXIT_FAIL
