"""
Sequential branch-and-bound: the correctness oracle and uniprocessor baseline.
"""

import logging
from dataclasses import dataclass
from typing import Optional

from bnbEngine.operators import decompose
from bnbEngine.pool import (
    ActivePool,
    BestKnown,
    PoolEntry,
    SelectionRule,
    eliminate_check,
)
from treecode import ROOT
from trees import BasicTree

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SequentialResult:
    """Outcome of a sequential solve."""

    optimum: Optional[float]
    expanded_count: int
    total_time: float


def sequential_solve(
    tree: BasicTree,
    rule: SelectionRule = SelectionRule.DEPTH_FIRST,
    pruning: bool = True,
) -> SequentialResult:
    """Run Select/Eliminate/Decompose until the pool is empty.

    Args:
        tree: The workload tree
        rule: Selection rule for the pool
        pruning: Apply the elimination rule ``l(v) >= U``

    Returns:
        Optimum (None when no node is feasible), expanded node count and the
        summed cost of expanded nodes
    """
    pool = ActivePool(rule)
    best = BestKnown()
    pool.insert(PoolEntry(ROOT, tree.root_id, tree.root.bound))
    expanded = 0
    total_time = 0.0

    while pool:
        entry = pool.select_next()
        assert entry is not None
        if pruning and eliminate_check(entry.bound, best):
            continue

        node = tree.nodes[entry.node_id]
        expanded += 1
        total_time += node.time_cost
        if node.feasible:
            best.offer(node.bound)

        for code, kid in decompose(tree, entry.code, entry.node_id):
            if pruning and eliminate_check(kid.bound, best):
                continue
            pool.insert(PoolEntry(code, kid.node_id, kid.bound))

    optimum = best.value if best.found else None
    logger.debug(
        "Sequential solve finished",
        extra={"optimum": optimum, "expanded": expanded, "rule": rule.value},
    )
    return SequentialResult(optimum, expanded, total_time)
