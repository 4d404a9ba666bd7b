import json
from dataclasses import dataclass
from typing import Iterable, List

from app.engine.energy import EnergyReport
from app.engine.trace import TraceRecord, Verb, count_verbs
from app.protocol.messages import PowerState
from app.utils.entities import DBS, entity_id


@dataclass
class RunSummary:
    attempted: int
    connected: int
    rejected: int
    pages: int
    wakeups: int
    end_us: int
    energy: EnergyReport


def summarize(records: Iterable[TraceRecord], energy: EnergyReport, end_us: int) -> RunSummary:
    counts = count_verbs(records)
    return RunSummary(
        attempted=counts[Verb.CHANNEL_REQUEST],
        connected=counts[Verb.TRAFFIC],
        rejected=counts[Verb.REJECT],
        pages=counts[Verb.PAGE],
        wakeups=counts[Verb.WAKEUP],
        end_us=end_us,
        energy=energy,
    )


def format_summary(summary: RunSummary) -> str:
    rows = [
        ("run length (us)", summary.end_us),
        ("calls attempted", summary.attempted),
        ("calls connected", summary.connected),
        ("calls rejected", summary.rejected),
        ("pages", summary.pages),
        ("wake-ups", summary.wakeups),
    ]
    width = max(len(label) for label, _ in rows)
    lines = [f"{label:<{width}}  {value}" for label, value in rows]

    if summary.energy.per_dbs:
        lines.append("")
        lines.append(f"{'station':<8} {'SLEEP us':>12} {'WAKING us':>12} {'ACTIVE us':>12} {'energy J':>12}")
        for entry in summary.energy.per_dbs:
            states = entry.time_in_state_us
            lines.append(
                f"{entity_id(DBS, entry.dbs_id):<8} {states[PowerState.SLEEP]:>12} "
                f"{states[PowerState.WAKING]:>12} {states[PowerState.ACTIVE]:>12} {entry.joules:>12.3f}"
            )
        lines.append(f"{'total':<8} {'':>12} {'':>12} {'':>12} {summary.energy.total_joules:>12.3f}")
    return "\n".join(lines)


def summary_json_lines(summary: RunSummary) -> List[str]:
    """One JSON object for the run totals, then one per DBS."""
    lines = [json.dumps({
        "kind": "summary",
        "end_us": summary.end_us,
        "attempted": summary.attempted,
        "connected": summary.connected,
        "rejected": summary.rejected,
        "pages": summary.pages,
        "wakeups": summary.wakeups,
        "total_joules": summary.energy.total_joules,
    })]
    for entry in summary.energy.per_dbs:
        lines.append(json.dumps({
            "kind": "energy",
            "station": entity_id(DBS, entry.dbs_id),
            "time_in_state_us": {state.value: us for state, us in entry.time_in_state_us.items()},
            "joules": entry.joules,
        }))
    return lines
