"""
What a state machine hands back to the event loop after consuming one input.

Entities never touch the queue or the clock: they return emissions (air
bursts, coordination datagrams, timer requests, power changes) plus the
trace records they produced, and the loop does the routing.
"""

from dataclasses import dataclass, field
from typing import Any, List, Optional, Union

from app.air.air_interface import AirEvent
from app.engine.trace import TraceRecord, Verb
from app.protocol.messages import PowerState

# Air emission target meaning "every handset camped on the sender's carrier"
BROADCAST = "*"


@dataclass(frozen=True)
class AirEmission:
    """`to` is a handset id, BROADCAST, or None for the station listening on event.arfcn."""
    event: AirEvent
    to: Optional[str] = None


@dataclass(frozen=True)
class Datagram:
    """A coordination datagram; `data` is None when the bytes travel over a real socket."""
    sender: int
    receiver: int
    seq: int
    data: Optional[bytes] = None


@dataclass(frozen=True)
class TimerRequest:
    delay_us: int
    name: str
    token: int = 0
    data: Any = None


@dataclass(frozen=True)
class PowerChange:
    dbs_id: int
    state: PowerState


Emission = Union[AirEmission, Datagram, TimerRequest, PowerChange]


@dataclass
class StepResult:
    emissions: List[Emission] = field(default_factory=list)
    records: List[TraceRecord] = field(default_factory=list)

    def emit(self, emission: Emission) -> "StepResult":
        self.emissions.append(emission)
        return self

    def trace(self, time: int, actor: str, verb: Verb, subject: str, **attrs) -> "StepResult":
        self.records.append(TraceRecord.of(time, actor, verb, subject, **attrs))
        return self

    def merge(self, other: "StepResult") -> "StepResult":
        self.emissions.extend(other.emissions)
        self.records.extend(other.records)
        return self
