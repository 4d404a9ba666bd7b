import heapq
import itertools
from dataclasses import dataclass, field
from typing import Any, Iterator, List, Optional, Tuple


@dataclass(frozen=True)
class SimEvent:
    time: int
    seq: int
    target: str
    payload: Any = field(compare=False)


class EventQueue:
    """Min-heap of events ordered by (time, seq); seq is assigned at push and never reused."""

    def __init__(self):
        self._heap: List[Tuple[int, int, SimEvent]] = []
        self._counter = itertools.count()

    def push(self, time: int, target: str, payload: Any) -> SimEvent:
        if time < 0:
            raise ValueError(f"event time must be non-negative, got {time}")
        event = SimEvent(time=time, seq=next(self._counter), target=target, payload=payload)
        heapq.heappush(self._heap, (event.time, event.seq, event))
        return event

    def pop(self) -> SimEvent:
        return heapq.heappop(self._heap)[2]

    def peek_time(self) -> Optional[int]:
        return self._heap[0][0] if self._heap else None

    def pending(self) -> Iterator[SimEvent]:
        """Queued events, unordered."""
        return (entry[2] for entry in self._heap)

    def __len__(self) -> int:
        return len(self._heap)

    def __bool__(self) -> bool:
        return bool(self._heap)
