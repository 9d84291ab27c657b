"""
Global ground truth about the search and the safety audit built on it.

The kernel sees every expansion and elimination, so it knows which
subproblems are truly completed: a node is completed once it was eliminated,
or once it was expanded and is a leaf or has both children completed.
"""

import logging
from typing import Dict, Iterable, List, Optional, Set

from errorException import AuditViolationError
from protocol import WorkerState, WorkerStatus
from treecode import ROOT, ProblemCode, format_code
from trees import BasicTree

logger = logging.getLogger(__name__)


class GroundTruth:
    """Expanded and eliminated node sets, with memoized completeness."""

    def __init__(self, tree: BasicTree) -> None:
        self.tree = tree
        self.expanded: Set[int] = set()
        self.eliminated: Set[int] = set()
        self._complete: Set[int] = set()
        self._node_of: Dict[ProblemCode, int] = {}
        self._code_of: Dict[int, ProblemCode] = {}
        # Not yet expanded nor completed, with an expanded parent (or the root).
        self.frontier: Set[int] = {tree.root_id}

    def note_expanded(self, node_id: int) -> bool:
        """Record an expansion; False when the node had been expanded before."""
        if node_id in self.expanded:
            return False
        self.expanded.add(node_id)
        self.frontier.discard(node_id)
        self.frontier.update(
            kid.node_id
            for kid in self.tree.children(node_id)
            if kid.node_id not in self.expanded
        )
        return True

    def note_eliminated(self, node_id: int) -> None:
        self.eliminated.add(node_id)

    def node_of(self, code: ProblemCode) -> int:
        node_id = self._node_of.get(code)
        if node_id is None:
            node_id = self._node_of[code] = self.tree.resolve(code)
        return node_id

    def code_of(self, node_id: int) -> ProblemCode:
        code = self._code_of.get(node_id)
        if code is None:
            code = self._code_of[node_id] = self.tree.code_of(node_id)
        return code

    def is_complete(self, node_id: int) -> bool:
        # Both sets only grow, so a positive answer never goes stale.
        if node_id in self._complete:
            return True
        if node_id in self.eliminated:
            done = True
        elif node_id not in self.expanded:
            done = False
        else:
            kids = self.tree.children(node_id)
            done = all(self.is_complete(kid.node_id) for kid in kids)
        if done:
            self._complete.add(node_id)
        return done

    def code_complete(self, code: ProblemCode) -> bool:
        return self.is_complete(self.node_of(code))

    def open_work(self) -> List[int]:
        """Frontier nodes that still need somebody to solve them."""
        self.frontier = {n for n in self.frontier if not self.is_complete(n)}
        return sorted(self.frontier)


def audit_workers(
    truth: GroundTruth,
    workers: Iterable[WorkerState],
    now: float,
    in_flight: Optional[Iterable[ProblemCode]] = None,
) -> None:
    """Check the safety invariants over every live worker.

    Args:
        truth: Global expansion and elimination record
        workers: Every worker, crashed ones included
        now: Simulated time of the check
        in_flight: Codes carried by undelivered grants; None skips the
            coverage check, as after a crash or a lost grant

    Raises:
        AuditViolationError: a table holds an uncompleted code, a pool entry
            is covered by its holder's table, a worker terminated early, or
            open work is held by no live pool, computation or grant
    """
    live = list(workers)
    for worker in live:
        if worker.status is WorkerStatus.CRASHED:
            continue
        context = {"worker": worker.id, "sim_time": now}
        for code in worker.table.codes:
            if not truth.code_complete(code):
                raise AuditViolationError(
                    "table holds a code that is not completed",
                    {**context, "code": format_code(code)},
                )
        for entry in worker.pool:
            if worker.table.covers(entry.code):
                raise AuditViolationError(
                    "pool entry covered by the holder's table",
                    {**context, "code": format_code(entry.code)},
                )
        if worker.status is WorkerStatus.TERMINATED and not truth.code_complete(ROOT):
            raise AuditViolationError(
                "process terminated before the search completed", context
            )
    if in_flight is not None:
        _audit_coverage(truth, live, now, in_flight)


def _audit_coverage(
    truth: GroundTruth,
    workers: List[WorkerState],
    now: float,
    in_flight: Iterable[ProblemCode],
) -> None:
    held: Set[ProblemCode] = set(in_flight)
    for worker in workers:
        if worker.status is WorkerStatus.CRASHED:
            continue
        held.update(entry.code for entry in worker.pool)
        if worker.current is not None:
            held.add(worker.current.code)
    for node_id in truth.open_work():
        code = truth.code_of(node_id)
        if not any(code[:depth] in held for depth in range(len(code), -1, -1)):
            raise AuditViolationError(
                "open work is held by no live process",
                {"sim_time": now, "code": format_code(code)},
            )
