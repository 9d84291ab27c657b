"""
Basic trees: search trees recorded without pruning and replayed as workload.

Each node carries its bound value, the time needed to bound and expand it,
and whether the bound is a feasible solution. The tree is binary: a node has
no children or exactly two, and both children branch on the same condition
variable with opposite bits.
"""

from dataclasses import dataclass, replace
from typing import Dict, Iterator, List, Mapping, Optional, Tuple

from errorException import ConfigurationError, TreeFormatError, UnknownSubproblemError
from treecode import ProblemCode, child, format_code

MINIMIZE = "minimize"


@dataclass(frozen=True)
class BasicTreeNode:
    """One node record of a basic tree."""

    node_id: int
    parent_id: Optional[int]
    branch_var: Optional[int]
    branch_bit: Optional[int]
    bound: float
    time_cost: float
    feasible: bool

    @property
    def is_root(self) -> bool:
        return self.parent_id is None


class BasicTree:
    """A validated, read-only binary search tree."""

    sense = MINIMIZE

    def __init__(
        self,
        nodes: Mapping[int, BasicTreeNode],
        line_of: Optional[Mapping[int, int]] = None,
    ) -> None:
        """Validate and index the node table.

        Args:
            nodes: Node records keyed by node id
            line_of: Source line per node id, used in error messages

        Raises:
            TreeFormatError: the records do not form a connected binary tree
        """
        self.nodes: Dict[int, BasicTreeNode] = dict(nodes)
        self._line_of = line_of or {}
        self._children: Dict[int, Tuple[int, int]] = {}
        self._branch_var: Dict[int, int] = {}
        self.root_id = self._link()
        self._depth: Dict[int, int] = {}
        self._index_depths()

    def _fail(self, message: str, node_id: Optional[int] = None) -> TreeFormatError:
        line = self._line_of.get(node_id) if node_id is not None else None
        return TreeFormatError(message, line)

    def _link(self) -> int:
        roots = [node for node in self.nodes.values() if node.is_root]
        if not roots:
            raise self._fail("tree has no root")
        if len(roots) > 1:
            raise self._fail("tree has more than one root", roots[1].node_id)

        by_parent: Dict[int, List[BasicTreeNode]] = {}
        for node in self.nodes.values():
            if node.time_cost < 0:
                raise self._fail(
                    f"negative time cost on node {node.node_id}", node.node_id
                )
            if node.is_root:
                continue
            if node.parent_id not in self.nodes:
                raise self._fail(
                    f"node {node.node_id} names missing parent {node.parent_id}",
                    node.node_id,
                )
            if node.branch_bit not in (0, 1) or node.branch_var is None:
                raise self._fail(
                    f"node {node.node_id} needs a branch variable and a 0/1 bit",
                    node.node_id,
                )
            by_parent.setdefault(node.parent_id, []).append(node)

        for parent_id, kids in by_parent.items():
            if len(kids) != 2:
                raise self._fail(
                    f"node {parent_id} has {len(kids)} children "
                    "(binary branching required)",
                    kids[-1].node_id,
                )
            left, right = sorted(kids, key=lambda node: node.branch_bit or 0)
            if left.branch_var != right.branch_var:
                raise self._fail(
                    f"children of node {parent_id} branch on different variables "
                    f"x{left.branch_var} and x{right.branch_var}",
                    right.node_id,
                )
            if left.branch_bit == right.branch_bit:
                raise self._fail(
                    f"children of node {parent_id} share bit {left.branch_bit}",
                    right.node_id,
                )
            self._children[parent_id] = (left.node_id, right.node_id)
            self._branch_var[parent_id] = int(left.branch_var)  # type: ignore[arg-type]

        return roots[0].node_id

    def _index_depths(self) -> None:
        stack = [(self.root_id, 0, frozenset())]
        while stack:
            node_id, depth, assigned = stack.pop()
            self._depth[node_id] = depth
            kids = self._children.get(node_id)
            if kids is None:
                continue
            var = self._branch_var[node_id]
            if var in assigned:
                raise self._fail(
                    f"variable x{var} reused below node {node_id}", kids[0]
                )
            stack.extend((kid, depth + 1, assigned | {var}) for kid in kids)
        if len(self._depth) != len(self.nodes):
            orphan = min(set(self.nodes) - set(self._depth))
            raise self._fail(f"node {orphan} is not reachable from the root", orphan)

    def __len__(self) -> int:
        return len(self.nodes)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BasicTree):
            return NotImplemented
        return self.root_id == other.root_id and self.nodes == other.nodes

    def __repr__(self) -> str:
        return f"BasicTree(nodes={len(self.nodes)}, root={self.root_id})"

    @property
    def root(self) -> BasicTreeNode:
        return self.nodes[self.root_id]

    def children(self, node_id: int) -> Tuple[BasicTreeNode, ...]:
        """Children of a node in bit order, empty for a leaf."""
        kids = self._children.get(node_id)
        if kids is None:
            return ()
        return (self.nodes[kids[0]], self.nodes[kids[1]])

    def is_leaf(self, node_id: int) -> bool:
        return node_id not in self._children

    def branch_var(self, node_id: int) -> Optional[int]:
        """The condition variable a node branches on, None for a leaf."""
        return self._branch_var.get(node_id)

    def depth(self, node_id: int) -> int:
        return self._depth[node_id]

    def resolve(self, code: ProblemCode) -> int:
        """Return the node id a code points at."""
        node_id = self.root_id
        for var, bit in code:
            kids = self._children.get(node_id)
            if kids is None or self._branch_var[node_id] != var:
                raise UnknownSubproblemError(format_code(code))
            node_id = kids[bit]
        return node_id

    def code_of(self, node_id: int) -> ProblemCode:
        """Return the code of a node by walking up to the root."""
        path = []
        node = self.nodes[node_id]
        while node.parent_id is not None:
            path.append((node.branch_var, node.branch_bit))
            node = self.nodes[node.parent_id]
        code: ProblemCode = ()
        for var, bit in reversed(path):
            code = child(code, int(var), int(bit))  # type: ignore[arg-type]
        return code

    def leaves(self) -> Iterator[BasicTreeNode]:
        return (
            node for node in self.nodes.values() if node.node_id not in self._children
        )

    @property
    def max_depth(self) -> int:
        return max(self._depth.values())

    @property
    def mean_depth(self) -> float:
        return sum(self._depth.values()) / len(self._depth)

    @property
    def total_cost(self) -> float:
        """Sum of node costs: the exhaustive uniprocessor time."""
        return sum(node.time_cost for node in self.nodes.values())

    @property
    def mean_cost(self) -> float:
        return self.total_cost / len(self.nodes)

    def best_feasible(self) -> Optional[float]:
        """Minimum feasible bound over all nodes, None when nothing is feasible."""
        values = [node.bound for node in self.nodes.values() if node.feasible]
        return min(values) if values else None


def scale_granularity(tree: BasicTree, factor: float) -> BasicTree:
    """Multiply every node's time cost by a constant factor."""
    if not factor > 0:
        raise ConfigurationError(
            "granularity factor must be positive", "granularity", factor
        )
    if factor == 1:
        return tree
    scaled = {
        node_id: replace(node, time_cost=node.time_cost * factor)
        for node_id, node in tree.nodes.items()
    }
    return BasicTree(scaled)
