"""
Run results and the processor-sweep table.

Table columns: processors, execution time (hours), B&B time %, contraction
time %, storage total MB, storage redundant MB, communication
MB/hour/processor. Percentages are taken against the summed lifetime of the
processes that terminated; MB is 10**6 bytes.
"""

import json
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from statistics import mean
from typing import (
    Any,
    Dict,
    Iterable,
    List,
    NamedTuple,
    Optional,
    Sequence,
    Tuple,
    Union,
)

from metrics.counters import MetricCounters, aggregate

MB = 1_000_000
SECONDS_PER_HOUR = 3600.0
OPTIMUM_TOLERANCE = 1e-9

TABLE_HEADER = (
    "processors | hours | B&B time | contraction | storage MB | redundant MB "
    "| comm MB/h/proc"
)


class Outcome(str, Enum):
    TERMINATED = "terminated"
    TOTAL_FAILURE = "total-failure"
    TIMEOUT = "timeout"


class TableRow(NamedTuple):
    processors: int
    execution_hours: float
    bnb_percent: float
    contraction_percent: float
    storage_total_mb: float
    storage_redundant_mb: float
    comm_rate: float


@dataclass
class RunResult:
    """What a run produced and what it cost."""

    outcome: Outcome
    optimum: Optional[float]
    processes: int
    seed: int
    execution_time: float
    accounted_time: float
    storage_total_bytes: int
    storage_redundant_bytes: int
    events_processed: int
    per_process: Dict[int, MetricCounters] = field(default_factory=dict)
    terminated: Tuple[int, ...] = ()
    expected_optimum: Optional[float] = None
    oracle_checked: bool = False
    trace_records: int = 0

    @property
    def aggregate(self) -> MetricCounters:
        return aggregate(self.per_process[pid] for pid in sorted(self.per_process))

    @property
    def execution_hours(self) -> float:
        return self.execution_time / SECONDS_PER_HOUR

    @property
    def optimum_correct(self) -> Optional[bool]:
        """None when no reference optimum is known."""
        if not self.oracle_checked:
            return None
        if self.expected_optimum is None or self.optimum is None:
            return self.expected_optimum is None and self.optimum is None
        return abs(self.optimum - self.expected_optimum) <= OPTIMUM_TOLERANCE * max(
            1.0, abs(self.expected_optimum)
        )

    def _terminating_set(self) -> List[MetricCounters]:
        ids = self.terminated or tuple(sorted(self.per_process))
        return [self.per_process[pid] for pid in ids if pid in self.per_process]

    def _percent(self, seconds: float) -> float:
        if self.accounted_time <= 0:
            return 0.0
        return 100.0 * seconds / self.accounted_time

    @property
    def bnb_percent(self) -> float:
        return self._percent(sum(c.bnb_time for c in self._terminating_set()))

    @property
    def contraction_percent(self) -> float:
        return self._percent(sum(c.contraction_time for c in self._terminating_set()))

    @property
    def comm_rate(self) -> float:
        """Communication in MB per hour per processor."""
        hours = self.execution_hours
        if hours <= 0:
            return 0.0
        return self.aggregate.comm_bytes_sent / MB / hours / self.processes

    def table_row(self) -> TableRow:
        return TableRow(
            self.processes,
            self.execution_hours,
            self.bnb_percent,
            self.contraction_percent,
            self.storage_total_bytes / MB,
            self.storage_redundant_bytes / MB,
            self.comm_rate,
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "outcome": self.outcome.value,
            "optimum": self.optimum,
            "expected_optimum": self.expected_optimum,
            "oracle_checked": self.oracle_checked,
            "processes": self.processes,
            "seed": self.seed,
            "execution_time": self.execution_time,
            "accounted_time": self.accounted_time,
            "storage_total_bytes": self.storage_total_bytes,
            "storage_redundant_bytes": self.storage_redundant_bytes,
            "events_processed": self.events_processed,
            "terminated": list(self.terminated),
            "trace_records": self.trace_records,
            "per_process": {
                str(pid): self.per_process[pid].to_dict()
                for pid in sorted(self.per_process)
            },
            "aggregate": self.aggregate.to_dict(),
        }

    def to_json(self) -> str:
        """Canonical serialization; identical scenarios give identical bytes."""
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunResult":
        return cls(
            outcome=Outcome(data["outcome"]),
            optimum=data["optimum"],
            processes=data["processes"],
            seed=data["seed"],
            execution_time=data["execution_time"],
            accounted_time=data["accounted_time"],
            storage_total_bytes=data["storage_total_bytes"],
            storage_redundant_bytes=data["storage_redundant_bytes"],
            events_processed=data["events_processed"],
            per_process={
                int(pid): MetricCounters.from_dict(counters)
                for pid, counters in data.get("per_process", {}).items()
            },
            terminated=tuple(data.get("terminated", ())),
            expected_optimum=data.get("expected_optimum"),
            oracle_checked=data.get("oracle_checked", False),
            trace_records=data.get("trace_records", 0),
        )


def format_row(row: TableRow) -> str:
    return (
        f"{row.processors} | {row.execution_hours:.2f} | {row.bnb_percent:.2f}% | "
        f"{row.contraction_percent:.2f}% | {row.storage_total_mb:.2f} | "
        f"{row.storage_redundant_mb:.2f} | {row.comm_rate:.2f}"
    )


def average_rows(results: Iterable[RunResult]) -> List[TableRow]:
    """One row per process count, averaged over seeds."""
    grouped: Dict[int, List[TableRow]] = defaultdict(list)
    for result in results:
        grouped[result.processes].append(result.table_row())
    return [
        TableRow(count, *(mean(column) for column in list(zip(*rows))[1:]))
        for count, rows in sorted(grouped.items())
    ]


def render_table(results: Sequence[Union[RunResult, TableRow]]) -> str:
    """Render the sweep table, one line per result.

    Raises:
        ValueError: ``results`` is empty
    """
    if not results:
        raise ValueError("render_table needs at least one result")
    rows = [
        item if isinstance(item, TableRow) else item.table_row() for item in results
    ]
    return "\n".join([TABLE_HEADER] + [format_row(row) for row in rows]) + "\n"
