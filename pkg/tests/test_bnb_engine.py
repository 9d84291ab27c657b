"""
Tests for the branch-and-bound operators, the pool and the sequential oracle.
"""

import math
from dataclasses import replace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bnbEngine import (
    ActivePool,
    BestKnown,
    PoolEntry,
    SelectionRule,
    decompose,
    eliminate_check,
    select_next,
    sequential_solve,
)
from errorException import ConfigurationError, UnknownSubproblemError
from treecode import ROOT, contract, parse_code
from trees import BasicTree, gen_random_tree


def entry(text, bound=0.0, node_id=0):
    return PoolEntry(parse_code(text), node_id, bound)


def test_decompose_root(three_node_tree):
    children = decompose(three_node_tree, ROOT)
    assert [code for code, _ in children] == [parse_code("x1=0"), parse_code("x1=1")]
    assert [node.node_id for _, node in children] == [1, 2]


def test_decompose_leaf_is_fathomed(three_node_tree):
    assert decompose(three_node_tree, parse_code("x1=1")) == []


def test_decompose_unknown_code(three_node_tree):
    with pytest.raises(UnknownSubproblemError) as excinfo:
        decompose(three_node_tree, parse_code("x4=0"))
    assert "unknown subproblem" in str(excinfo.value)


@pytest.mark.parametrize(
    "bound, incumbent, expected",
    [(10.0, 10.0, True), (9.5, 10.0, False), (1e300, math.inf, False)],
)
def test_eliminate_check(bound, incumbent, expected):
    assert eliminate_check(bound, BestKnown(incumbent)) is expected


def test_best_known_only_improves():
    best = BestKnown()
    assert not best.found
    assert best.offer(7.0, source=2)
    assert not best.offer(7.0, source=3)
    assert not best.offer(9.0)
    assert not best.offer(None)
    assert best.offer(1.5, source=4)
    assert (best.value, best.source) == (1.5, 4)


def test_select_next_by_rule():
    for rule, expected in (
        (SelectionRule.DEPTH_FIRST, "x1=1.x2=0"),
        (SelectionRule.BEST_FIRST, "x1=0"),
    ):
        pool = ActivePool(rule)
        pool.insert(entry("x1=0", bound=5))
        pool.insert(entry("x1=1.x2=0", bound=9))
        assert select_next(pool).code == parse_code(expected)
        assert len(pool) == 1
    assert select_next(ActivePool()) is None


def test_best_first_ties_break_on_code():
    pool = ActivePool(SelectionRule.BEST_FIRST)
    pool.insert(entry("x1=1", bound=3))
    pool.insert(entry("x1=0", bound=3))
    assert pool.select_next().code == parse_code("x1=0")


def test_pool_ignores_duplicates_and_iterates_in_selection_order():
    pool = ActivePool()
    assert pool.insert(entry("x1=0"))
    assert not pool.insert(entry("x1=0", bound=1))
    pool.insert(entry("x1=1.x2=1"))
    assert [e.code for e in pool] == pool.codes() == [
        parse_code("x1=1.x2=1"),
        parse_code("x1=0"),
    ]
    assert parse_code("x1=0") in pool


def test_steal_takes_the_entries_selected_last():
    pool = ActivePool()
    for text in ("x1=0", "x1=1.x2=0", "x1=1.x2=1.x3=0", "x1=1.x2=1.x3=1"):
        pool.insert(entry(text))
    stolen = pool.steal(2)
    assert [e.code for e in stolen] == [parse_code("x1=0"), parse_code("x1=1.x2=0")]
    assert len(pool) == 2
    assert pool.steal(0) == []


def test_discard_covered():
    pool = ActivePool()
    for text in ("x1=0.x2=0", "x1=0.x2=1", "x1=1"):
        pool.insert(entry(text))
    dropped = pool.discard_covered(contract([parse_code("x1=0")]))
    assert len(dropped) == 2
    assert pool.codes() == [parse_code("x1=1")]


def test_selection_rule_parse():
    assert SelectionRule.parse("best-first") is SelectionRule.BEST_FIRST
    with pytest.raises(ConfigurationError):
        SelectionRule.parse("breadth-first")


def test_sequential_three_node_tree(three_node_tree):
    result = sequential_solve(three_node_tree)
    assert result.optimum == 3.0
    assert result.expanded_count == 3
    assert result.total_time == 3.0


def test_sequential_prunes_and_matches_exhaustive(seven_node_tree):
    pruned = sequential_solve(seven_node_tree)
    assert (pruned.optimum, pruned.expanded_count) == (4.0, 3)
    best_first = sequential_solve(seven_node_tree, SelectionRule.BEST_FIRST)
    assert (best_first.optimum, best_first.expanded_count) == (4.0, 3)
    exhaustive = sequential_solve(seven_node_tree, pruning=False)
    assert (exhaustive.optimum, exhaustive.expanded_count) == (4.0, 7)
    assert exhaustive.total_time == seven_node_tree.total_cost


def test_sequential_without_feasible_nodes(three_node_tree):
    nodes = {
        node_id: replace(node, feasible=False)
        for node_id, node in three_node_tree.nodes.items()
    }
    assert sequential_solve(BasicTree(nodes)).optimum is None


@pytest.mark.parametrize("rule", list(SelectionRule))
def test_thousand_node_tree_matches_exhaustive_scan(rule):
    tree = gen_random_tree(2, 1000)
    assert sequential_solve(tree, rule).optimum == tree.best_feasible()


@settings(max_examples=100, deadline=None)
@given(
    st.integers(0, 2**32 - 1), st.integers(1, 800), st.sampled_from(list(SelectionRule))
)
def test_pruning_is_sound(seed, nodes, rule):
    tree = gen_random_tree(seed, nodes)
    pruned = sequential_solve(tree, rule)
    exhaustive = sequential_solve(tree, rule, pruning=False)
    assert pruned.optimum == exhaustive.optimum == tree.best_feasible()
    assert pruned.expanded_count <= exhaustive.expanded_count == len(tree)


if __name__ == "__main__":
    pytest.main([__file__])
