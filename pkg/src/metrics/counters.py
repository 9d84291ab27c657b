"""
Per-process measurement counters.
"""

from collections import Counter
from dataclasses import dataclass, field, fields
from typing import Any, Dict, Iterable


@dataclass
class MetricCounters:
    """What one process spent and sent during a run.

    Times are simulated seconds, sizes are bytes.
    """

    bnb_time: float = 0.0
    contraction_time: float = 0.0
    idle_time: float = 0.0
    comm_bytes_sent: int = 0
    messages_by_kind: Dict[str, int] = field(default_factory=dict)
    storage_peak_bytes: int = 0
    redundant_storage_bytes: int = 0
    redundant_work_time: float = 0.0
    nodes_expanded: int = 0
    interrupted_entries: int = 0
    recoveries: int = 0
    root_restarts: int = 0
    messages_dropped: int = 0

    def count_message(self, kind: str, size_bytes: int) -> None:
        self.messages_by_kind[kind] = self.messages_by_kind.get(kind, 0) + 1
        self.comm_bytes_sent += size_bytes

    def note_storage(self, size_bytes: int) -> None:
        if size_bytes > self.storage_peak_bytes:
            self.storage_peak_bytes = size_bytes

    @property
    def messages_sent(self) -> int:
        return sum(self.messages_by_kind.values())

    def to_dict(self) -> Dict[str, Any]:
        data = {f.name: getattr(self, f.name) for f in fields(self)}
        data["messages_by_kind"] = dict(sorted(self.messages_by_kind.items()))
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "MetricCounters":
        known = {f.name for f in fields(cls)}
        return cls(**{key: value for key, value in data.items() if key in known})


def aggregate(counters: Iterable[MetricCounters]) -> MetricCounters:
    """Sum counters over processes; the storage peak is summed too."""
    total = MetricCounters()
    kinds: Counter = Counter()
    for item in counters:
        total.bnb_time += item.bnb_time
        total.contraction_time += item.contraction_time
        total.idle_time += item.idle_time
        total.comm_bytes_sent += item.comm_bytes_sent
        kinds.update(item.messages_by_kind)
        total.storage_peak_bytes += item.storage_peak_bytes
        total.redundant_storage_bytes += item.redundant_storage_bytes
        total.redundant_work_time += item.redundant_work_time
        total.nodes_expanded += item.nodes_expanded
        total.interrupted_entries += item.interrupted_entries
        total.recoveries += item.recoveries
        total.root_restarts += item.root_restarts
        total.messages_dropped += item.messages_dropped
    total.messages_by_kind = dict(sorted(kinds.items()))
    return total
