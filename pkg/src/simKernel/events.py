"""
Simulation events and the time-ordered queue.
"""

import heapq
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Tuple

from protocol import Message, Timer


class EventKind(str, Enum):
    DELIVER = "deliver"
    TIMER = "timer"
    WAKE = "wake"
    CRASH = "crash"
    PARTITION = "partition"
    JOIN = "join"


@dataclass(frozen=True)
class SimEvent:
    """Something that happens at ``time``; ``seq`` breaks ties in enqueue order."""

    time: float
    seq: int
    kind: EventKind
    process: Optional[int] = None
    message: Optional[Message] = field(default=None, compare=False)
    timer: Optional[Timer] = field(default=None, compare=False)
    groups: Optional[Tuple[Tuple[int, ...], ...]] = field(default=None, compare=False)


class EventQueue:
    """Min-heap of events keyed by ``(time, seq)``."""

    def __init__(self) -> None:
        self._heap: List[Tuple[float, int, SimEvent]] = []
        self._seq = 0

    def __len__(self) -> int:
        return len(self._heap)

    def __bool__(self) -> bool:
        return bool(self._heap)

    def push(
        self,
        time: float,
        kind: EventKind,
        process: Optional[int] = None,
        message: Optional[Message] = None,
        timer: Optional[Timer] = None,
        groups: Optional[Tuple[Tuple[int, ...], ...]] = None,
    ) -> SimEvent:
        event = SimEvent(time, self._seq, kind, process, message, timer, groups)
        self._seq += 1
        heapq.heappush(self._heap, (time, event.seq, event))
        return event

    def pop(self) -> SimEvent:
        return heapq.heappop(self._heap)[2]

    def peek_time(self) -> Optional[float]:
        return self._heap[0][0] if self._heap else None
