"""
Newline-delimited event traces (``.ndtrace``).

One JSON object per line with ``time``, ``process`` and ``event`` always
present, plus ``kind``, ``code`` and ``size_bytes`` where they apply.
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, TextIO, Union

from errorException import TraceWriteError

logger = logging.getLogger(__name__)

TRACE_SUFFIX = ".ndtrace"


@dataclass(frozen=True)
class TraceRecord:
    time: float
    process: Optional[int]
    event: str
    kind: Optional[str] = None
    code: Optional[str] = None
    size_bytes: Optional[int] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            key: value
            for key, value in (
                ("time", self.time),
                ("process", self.process),
                ("event", self.event),
                ("kind", self.kind),
                ("code", self.code),
                ("size_bytes", self.size_bytes),
            )
            if value is not None or key in ("time", "process", "event")
        }


def _write(sink: TextIO, record: TraceRecord, path: Optional[str]) -> None:
    try:
        sink.write(json.dumps(record.to_dict(), sort_keys=True) + "\n")
    except (OSError, ValueError) as e:
        raise TraceWriteError(f"cannot write trace record: {e}", path) from e


def export_trace(
    records: Iterable[TraceRecord], sink: TextIO, path: Optional[str] = None
) -> int:
    """Write records to ``sink``; returns how many were written.

    Raises:
        TraceWriteError: the sink rejected a write
    """
    count = 0
    for record in records:
        _write(sink, record, path)
        count += 1
    return count


class TraceRecorder:
    """Streams records to a sink as the run produces them."""

    def __init__(self, sink: TextIO, path: Optional[str] = None) -> None:
        self.sink = sink
        self.path = path
        self.count = 0
        self._owned = False

    @classmethod
    def open(cls, path: Union[str, Path]) -> "TraceRecorder":
        try:
            sink = open(path, "w", encoding="utf-8")
        except OSError as e:
            raise TraceWriteError(f"cannot open trace file: {e}", str(path)) from e
        recorder = cls(sink, str(path))
        recorder._owned = True
        return recorder

    def __enter__(self) -> "TraceRecorder":
        return self

    def __exit__(self, *exc_info: Any) -> None:
        self.close()

    def record(
        self,
        time: float,
        process: Optional[int],
        event: str,
        kind: Optional[str] = None,
        code: Optional[str] = None,
        size_bytes: Optional[int] = None,
    ) -> None:
        record = TraceRecord(time, process, event, kind, code, size_bytes)
        _write(self.sink, record, self.path)
        self.count += 1

    def close(self) -> None:
        if not self._owned:
            return
        self._owned = False
        try:
            self.sink.close()
        except OSError as e:
            raise TraceWriteError(f"cannot close trace file: {e}", self.path) from e
        logger.debug("Trace written", extra={"path": self.path, "records": self.count})


def read_trace(path: Union[str, Path]) -> List[Dict[str, Any]]:
    with open(path, "r", encoding="utf-8") as file:
        return [json.loads(line) for line in file if line.strip()]
