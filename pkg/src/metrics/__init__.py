"""
Run measurements: counters, results, the sweep table and event traces.
"""

from metrics.counters import MetricCounters, aggregate
from metrics.report import (
    MB,
    TABLE_HEADER,
    Outcome,
    RunResult,
    TableRow,
    average_rows,
    format_row,
    render_table,
)
from metrics.trace import (
    TRACE_SUFFIX,
    TraceRecord,
    TraceRecorder,
    export_trace,
    read_trace,
)

__all__ = [
    "MetricCounters",
    "aggregate",
    "MB",
    "TABLE_HEADER",
    "Outcome",
    "RunResult",
    "TableRow",
    "average_rows",
    "format_row",
    "render_table",
    "TRACE_SUFFIX",
    "TraceRecord",
    "TraceRecorder",
    "export_trace",
    "read_trace",
]
