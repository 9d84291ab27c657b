"""
Decompose over a basic tree.

Bounding is precomputed in the tree, so Decompose only has to look up the
recorded children of a node.
"""

from typing import List, Optional, Tuple

from treecode import ProblemCode, child
from trees import BasicTree, BasicTreeNode


def decompose(
    tree: BasicTree, code: ProblemCode, node_id: Optional[int] = None
) -> List[Tuple[ProblemCode, BasicTreeNode]]:
    """Return the children of a subproblem with their codes.

    Args:
        tree: The workload tree
        code: Code of the problem to split
        node_id: Node the code resolves to, when the caller already knows it

    Returns:
        Two ``(code, node)`` pairs, or an empty list for a fathomed leaf

    Raises:
        UnknownSubproblemError: the code does not name a node of ``tree``
    """
    if node_id is None:
        node_id = tree.resolve(code)
    return [
        (child(code, kid.branch_var, kid.branch_bit), kid)  # type: ignore[arg-type]
        for kid in tree.children(node_id)
    ]
