"""
Shared fixtures: small hand-written trees and scenario builders.
"""

from typing import Any

import pytest

from simKernel import Scenario, TreeSource
from trees import BasicTree, gen_random_tree, parse_basic_tree

THREE_NODE_TREE = """\
bbtree v1
# root branches on x1; both leaves feasible
0 -1 -1 -1 1.0 1.0 0
1 0 1 0 5.0 1.0 1
2 0 1 1 3.0 1.0 1
"""

SEVEN_NODE_TREE = """\
bbtree v1
0 -1 -1 -1 1.0 1.0 0
1 0 1 0 2.0 1.0 0
2 0 1 1 8.0 1.0 0
3 1 2 0 4.0 1.0 1
4 1 2 1 6.0 1.0 1
5 2 3 0 9.0 1.0 1
6 2 3 1 8.0 1.0 0
"""


def tree_from_text(text: str) -> BasicTree:
    return parse_basic_tree(text.splitlines())


@pytest.fixture
def three_node_tree() -> BasicTree:
    return tree_from_text(THREE_NODE_TREE)


@pytest.fixture
def seven_node_tree() -> BasicTree:
    """Optimum 4.0 at x1=0.x2=0; x1=1.x3=1 is an infeasible leaf."""
    return tree_from_text(SEVEN_NODE_TREE)


@pytest.fixture(scope="session")
def random_tree() -> BasicTree:
    return gen_random_tree(7, 301)


@pytest.fixture
def three_node_file(tmp_path):
    path = tmp_path / "three.bbtree"
    path.write_text(THREE_NODE_TREE, encoding="utf-8")
    return path


def make_scenario(nodes: int = 301, tree_seed: int = 7, **overrides: Any) -> Scenario:
    """A scenario over a generated tree with the given field overrides."""
    return Scenario(tree=TreeSource(seed=tree_seed, nodes=nodes), **overrides)
