"""
Random basic trees and exhaustive tree enumeration.

Shape: frontier nodes are visited in random order and expand with
probability ``p(depth)``. When the frontier dies out below the target
window, a random sealed leaf is reopened, so the target size is reached
without degenerating into a long spine.

Values: leaves are feasible with values drawn uniformly, or infeasible.
Internal bounds sit below the best feasible value of their subtree and never
decrease along a path, which keeps pruning sound.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from errorException import ConfigurationError, TreeGenerationError
from trees.basic_tree import BasicTree, BasicTreeNode

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GeneratorParams:
    """Expansion schedule and value distributions for random trees."""

    expand_prob: float = 0.45
    min_depth: int = 3
    max_depth: int = 64
    cost_median: float = 0.01
    cost_sigma: float = 1.0
    value_low: float = 0.0
    value_high: float = 100.0
    infeasible_prob: float = 0.2
    slack_max: float = 5.0
    max_retries: int = 8

    def __post_init__(self) -> None:
        if not 0.0 <= self.expand_prob <= 1.0:
            raise ConfigurationError(
                "expand_prob must lie in [0, 1]", "expand_prob", self.expand_prob
            )
        if self.min_depth < 0 or self.max_depth < 1:
            raise ConfigurationError(
                "depth limits must be positive", "max_depth", self.max_depth
            )
        if self.cost_median <= 0 or self.cost_sigma < 0:
            raise ConfigurationError(
                "cost distribution needs median > 0 and sigma >= 0",
                "cost_median",
                self.cost_median,
            )
        if self.value_high < self.value_low:
            raise ConfigurationError(
                "value_high below value_low", "value_high", self.value_high
            )
        if not 0.0 <= self.infeasible_prob <= 1.0:
            raise ConfigurationError(
                "infeasible_prob must lie in [0, 1]",
                "infeasible_prob",
                self.infeasible_prob,
            )
        if self.slack_max <= 0:
            raise ConfigurationError(
                "slack_max must be positive", "slack_max", self.slack_max
            )
        if self.max_retries < 1:
            raise ConfigurationError(
                "max_retries must be >= 1", "max_retries", self.max_retries
            )

    def expansion_probability(self, depth: int) -> float:
        if depth >= self.max_depth:
            return 0.0
        if depth < self.min_depth:
            return 1.0
        return self.expand_prob


@dataclass
class _Shape:
    parents: List[Optional[int]]
    depths: List[int]
    branches: List[Tuple[Optional[int], Optional[int]]]
    children: Dict[int, Tuple[int, int]]


def _grow(
    rng: np.random.Generator, target: int, params: GeneratorParams
) -> Optional[_Shape]:
    low = math.ceil(0.9 * target)
    shape = _Shape(parents=[None], depths=[0], branches=[(None, None)], children={})
    frontier = [0]
    sealed: List[int] = []
    next_var = 0

    def expand(node: int) -> None:
        nonlocal next_var
        next_var += 1
        kids = []
        for bit in (0, 1):
            kids.append(len(shape.parents))
            shape.parents.append(node)
            shape.depths.append(shape.depths[node] + 1)
            shape.branches.append((next_var, bit))
        shape.children[node] = (kids[0], kids[1])
        frontier.extend(kids)

    while len(shape.parents) < target:
        if not frontier:
            if not sealed:
                break
            index = int(rng.integers(len(sealed)))
            sealed[index], sealed[-1] = sealed[-1], sealed[index]
            reopened = sealed.pop()
            # Leaves at max_depth stay sealed for good.
            if params.expansion_probability(shape.depths[reopened]) > 0:
                expand(reopened)
            continue

        index = int(rng.integers(len(frontier)))
        frontier[index], frontier[-1] = frontier[-1], frontier[index]
        node = frontier.pop()
        if rng.random() < params.expansion_probability(shape.depths[node]):
            expand(node)
        else:
            sealed.append(node)

    if len(shape.parents) < low:
        return None
    return shape


def gen_random_tree(
    seed: int, target_nodes: int, params: Optional[GeneratorParams] = None
) -> BasicTree:
    """Generate a random basic tree deterministically from ``seed``.

    Args:
        seed: RNG seed; identical (seed, params) give identical trees
        target_nodes: Desired node count; the result has at least 90% of it
            and at most the first odd count not below it
        params: Expansion schedule and value distributions

    Raises:
        ConfigurationError: target below 1
        TreeGenerationError: the schedule cannot reach the target
    """
    params = params or GeneratorParams()
    if target_nodes < 1:
        raise ConfigurationError(
            "target node count must be >= 1", "nodes", target_nodes
        )

    rng = np.random.default_rng(seed)
    shape = None
    for attempt in range(1, params.max_retries + 1):
        shape = _grow(rng, target_nodes, params)
        if shape is not None:
            break
        logger.debug(
            "Tree growth fell short of target, retrying",
            extra={"seed": seed, "target": target_nodes, "attempt": attempt},
        )
    if shape is None:
        raise TreeGenerationError(
            f"could not grow a tree of ~{target_nodes} nodes "
            f"with max_depth={params.max_depth}",
            attempts=params.max_retries,
        )
    return _assign_values(rng, shape, params)


def _assign_values(
    rng: np.random.Generator, shape: _Shape, params: GeneratorParams
) -> BasicTree:
    count = len(shape.parents)
    costs = rng.lognormal(math.log(params.cost_median), params.cost_sigma, size=count)
    values = rng.uniform(params.value_low, params.value_high, size=count)
    infeasible_draws = rng.random(size=count)
    slacks = params.slack_max * (1.0 - rng.random(size=count))

    feasible = [False] * count
    for node in range(count):
        if node not in shape.children:
            drawn = infeasible_draws[node] >= params.infeasible_prob
            feasible[node] = count == 1 or drawn

    # Children always carry larger ids than their parent.
    best_below = [math.inf] * count
    for node in range(count - 1, -1, -1):
        kids = shape.children.get(node)
        if kids is None:
            best_below[node] = float(values[node]) if feasible[node] else math.inf
        else:
            best_below[node] = min(best_below[kids[0]], best_below[kids[1]])

    bounds = [0.0] * count
    for node in range(count):
        parent_id = shape.parents[node]
        floor = bounds[parent_id] if parent_id is not None else None
        if node not in shape.children and feasible[node]:
            bounds[node] = float(values[node])
            continue
        if math.isinf(best_below[node]):
            bounds[node] = floor if floor is not None else float(params.value_low)
            continue
        raw = best_below[node] - float(slacks[node])
        bounds[node] = raw if floor is None else max(floor, raw)

    nodes = {}
    for node in range(count):
        var, bit = shape.branches[node]
        nodes[node] = BasicTreeNode(
            node_id=node,
            parent_id=shape.parents[node],
            branch_var=var,
            branch_bit=bit,
            bound=bounds[node],
            time_cost=float(costs[node]),
            feasible=feasible[node],
        )
    return BasicTree(nodes)


def enumerate_trees(max_nodes: int) -> Iterator[BasicTree]:
    """Yield every full binary tree shape with at most ``max_nodes`` nodes.

    Nodes get preorder ids, one fresh variable per branching node, unit cost,
    and feasible leaves valued by their id.
    """
    for size in range(1, max_nodes + 1, 2):
        for shape in _shapes(size):
            yield _materialize(shape)


_Nested = Optional[Tuple["_Nested", "_Nested"]]


def _shapes(size: int) -> Iterator[_Nested]:
    if size == 1:
        yield None
        return
    for left_size in range(1, size - 1, 2):
        for left in _shapes(left_size):
            for right in _shapes(size - 1 - left_size):
                yield (left, right)


def _materialize(shape: _Nested) -> BasicTree:
    nodes: Dict[int, BasicTreeNode] = {}
    counters = {"id": 0, "var": 0}

    def visit(
        sub: _Nested,
        parent_id: Optional[int],
        var: Optional[int],
        bit: Optional[int],
    ) -> None:
        node_id = counters["id"]
        counters["id"] += 1
        leaf = sub is None
        nodes[node_id] = BasicTreeNode(
            node_id, parent_id, var, bit, float(node_id), 1.0, leaf
        )
        if sub is None:
            return
        counters["var"] += 1
        branch = counters["var"]
        visit(sub[0], node_id, branch, 0)
        visit(sub[1], node_id, branch, 1)

    visit(shape, None, None, None)
    return BasicTree(nodes)
