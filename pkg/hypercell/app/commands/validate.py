import logging
import sys
from pathlib import Path
from typing import TextIO

from app.air.um_channels import downlink_khz, uplink_khz
from app.commands.run_config import EXIT_INVALID, EXIT_OK
from app.engine.scenario import load_scenario
from app.errors import ScenarioError

logger = logging.getLogger(__name__)


def _band(arfcn: int) -> str:
    try:
        return f"UL {uplink_khz(arfcn) / 1000:.1f} MHz / DL {downlink_khz(arfcn) / 1000:.1f} MHz"
    except ValueError:
        return "outside GSM-900"


def cmd_validate(scenario_path: Path, out: TextIO = sys.stdout, err: TextIO = sys.stderr) -> int:
    try:
        scenario = load_scenario(scenario_path)
    except ScenarioError as e:
        for message in e.messages:
            print(f"invalid scenario {scenario_path}: {message}", file=err)
        return EXIT_INVALID

    print(f"{scenario_path}: valid", file=out)
    for station in scenario.stations:
        channels = ",".join(sorted(c.value for c in station.channel_set))
        extra = f" capacity={station.capacity} power={station.power.value}" if station.role.value == "DBS" else ""
        print(f"  {station.entity:<8} ARFCN {station.arfcn:>4} ({_band(station.arfcn)}) "
              f"cc={station.color_code}{extra} [{channels}]", file=out)
    print(f"  {len(scenario.mobiles)} mobile(s), {len(scenario.stimuli)} stimulus record(s)", file=out)
    return EXIT_OK
