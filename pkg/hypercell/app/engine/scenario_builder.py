"""
Seeded builder for randomized stress scenarios: mixed MO/MT traffic,
scripted denials and quiet gaps long enough for data stations to fall
asleep and be woken again.
"""

import logging
import random
from typing import List

from app.air.um_channels import Role
from app.engine.scenario import Knobs, MobileSpec, Scenario, StationSpec, Stimulus, StimulusAction
from app.protocol.messages import PowerState

logger = logging.getLogger(__name__)

STRESS_CALLS = 100
STRESS_MOBILES = 20
STRESS_IDLE_TIMEOUT_US = 3_000_000
FIRST_MS_ID = 100


def build_stress_scenario(seed: int, calls: int = STRESS_CALLS, mobiles: int = STRESS_MOBILES,
                          deny_every: int = 10) -> Scenario:
    rng = random.Random(seed)
    stations = [
        StationSpec(role=Role.SBS, id=0, arfcn=50, color_code=1),
        StationSpec(role=Role.DBS, id=1, arfcn=60, color_code=1, capacity=4, power=PowerState.ACTIVE),
        StationSpec(role=Role.DBS, id=2, arfcn=70, color_code=1, capacity=4, power=PowerState.ACTIVE),
        StationSpec(role=Role.DBS, id=3, arfcn=80, color_code=1, capacity=3, power=PowerState.SLEEP),
    ]
    ms_ids = [FIRST_MS_ID + n for n in range(mobiles)]
    stimuli: List[Stimulus] = [
        Stimulus(t=n * 1_000, action=StimulusAction.POWER_ON, ms=ms_id) for n, ms_id in enumerate(ms_ids)
    ]

    t = 500_000
    for number in range(calls):
        # Mostly short gaps, now and then a pause longer than the idle timeout
        if rng.random() < 0.08:
            t += rng.randint(STRESS_IDLE_TIMEOUT_US + 500_000, STRESS_IDLE_TIMEOUT_US + 2_000_000)
        else:
            t += rng.randint(20_000, 400_000)

        if deny_every and number % deny_every == deny_every - 1:
            stimuli.append(Stimulus(t=t, action=StimulusAction.DENY_NEXT_APPOINTMENT, dbs=rng.randint(1, 3)))

        action = StimulusAction.MO_CALL if rng.random() < 0.6 else StimulusAction.MT_CALL
        stimuli.append(Stimulus(
            t=t, action=action, ms=rng.choice(ms_ids), duration_us=rng.randint(300_000, 4_000_000),
        ))

    logger.info(f"Stress scenario seed={seed}: {calls} calls over {t} us")
    return Scenario(
        knobs=Knobs(seed=seed, idle_timeout_us=STRESS_IDLE_TIMEOUT_US),
        stations=stations,
        mobiles=[MobileSpec(id=ms_id) for ms_id in ms_ids],
        stimuli=stimuli,
    )
