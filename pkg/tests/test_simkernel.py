"""
Tests for the discrete-event kernel: events, randomness, network, scenarios and runs.
"""

import io
import json
import logging
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bnbEngine import PoolEntry, SelectionRule, sequential_solve
from conftest import THREE_NODE_TREE, make_scenario
from errorException import AuditViolationError, ConfigurationError
from membership import MembershipParams, MembershipView
from metrics import Outcome, TraceRecorder
from protocol import Message, MessageKind, ProtocolParams, WorkerState, WorkerStatus
from simKernel import (
    CrashSpec,
    DropReason,
    EventKind,
    EventQueue,
    GroundTruth,
    JoinSpec,
    NetworkModel,
    NetworkParams,
    PartitionSpec,
    RngStreams,
    Scenario,
    Simulation,
    TreeSource,
    audit_workers,
    load_scenario,
    load_tree,
    scenario_from_dict,
    scenarios_for,
    simulate,
)
from treecode import ROOT, contract, parse_code

# -- events and randomness ----------------------------------------------------


def test_event_queue_orders_by_time_then_enqueue_order():
    queue = EventQueue()
    queue.push(2.0, EventKind.WAKE, process=0)
    queue.push(1.0, EventKind.CRASH, process=1)
    queue.push(1.0, EventKind.WAKE, process=2)
    assert len(queue) == 3 and queue.peek_time() == 1.0
    assert [queue.pop().process for _ in range(3)] == [1, 2, 0]
    assert not queue and queue.peek_time() is None


def test_rng_streams_are_independent_and_reproducible():
    streams = RngStreams(11)
    first = streams.stream("targets", 3).random(4)
    assert np.array_equal(first, RngStreams(11).stream("targets", 3).random(4))
    assert not np.array_equal(first, streams.stream("targets", 4).random(4))
    assert not np.array_equal(first, streams.stream("loss", 3).random(4))
    with pytest.raises(ValueError):
        streams.stream("weather")


# -- network ------------------------------------------------------------------


@pytest.mark.parametrize("size, expected_ms", [(1000, 6.5), (0, 1.5), (64, 1.82)])
def test_latency_model(size, expected_ms):
    assert NetworkParams().latency(size) == pytest.approx(expected_ms / 1000)


def _message(sender=0, receiver=1):
    return Message(MessageKind.WORK_REQUEST, sender, receiver, request_id=1)


def test_total_loss_drops_every_message():
    network = NetworkModel(NetworkParams(loss_prob=1.0), np.random.default_rng(0))
    outcomes = [network.transmit(_message(), 0.0) for _ in range(20)]
    assert all(t.dropped is DropReason.LOSS and t.deliver_at is None for t in outcomes)


def test_delivery_time_is_send_time_plus_latency():
    network = NetworkModel(NetworkParams(), np.random.default_rng(0))
    transmission = network.transmit(_message(), 2.0)
    assert transmission.dropped is None
    assert transmission.deliver_at == pytest.approx(2.0 + 0.00186)


def test_partition_groups_and_heal():
    network = NetworkModel(NetworkParams(), np.random.default_rng(0))
    network.set_partition([[0, 1], [2]])
    assert network.partitioned
    assert network.reachable(0, 1)
    assert not network.reachable(0, 2)
    assert network.reachable(3, 4)
    assert not network.reachable(1, 4)
    assert network.transmit(_message(0, 2), 0.0).dropped is DropReason.PARTITION
    network.set_partition([])
    assert not network.partitioned and network.reachable(0, 2)


def test_network_params_validation():
    with pytest.raises(ConfigurationError):
        NetworkParams(loss_prob=1.5)
    with pytest.raises(ConfigurationError):
        NetworkParams(base_latency_ms=-1)


# -- scenarios ----------------------------------------------------------------


def test_scenario_from_yaml(tmp_path, three_node_file):
    path = tmp_path / "run.yaml"
    path.write_text(
        "tree: {path: three.bbtree}\n"
        "processes: 3\n"
        "seed: 4\n"
        "rule: best-first\n"
        "network: {loss_prob: 0.01}\n"
        "protocol: {c: 4, t_report: 2.5}\n"
        "crashes:\n"
        "  - {process: 1, fraction: 0.85}\n",
        encoding="utf-8",
    )
    scenario = load_scenario(path)
    assert scenario.processes == 3 and scenario.rule is SelectionRule.BEST_FIRST
    assert scenario.protocol.c == 4 and scenario.network.loss_prob == 0.01
    assert scenario.crashes == (CrashSpec(1, fraction=0.85),)
    assert scenario.needs_baseline
    assert len(load_tree(scenario)) == 3


def test_scenario_from_json_matches_yaml(tmp_path):
    data = {"seed": 2, "tree": {"nodes": 50, "seed": 1}, "processes": 2}
    path = tmp_path / "run.json"
    path.write_text(json.dumps(data), encoding="utf-8")
    assert load_scenario(path) == scenario_from_dict(data)


@pytest.mark.parametrize(
    "data, key",
    [
        ({"tree": {"seed": 1, "nodes": 9}, "colour": "red"}, "colour"),
        ({"tree": {"seed": 1, "nodes": 9}, "network": {"jitter": 1}}, "network.jitter"),
        ({"processes": 2}, "tree"),
        ({"tree": {"seed": 1}}, "tree"),
        ({"tree": {"seed": 1, "nodes": 9}, "rule": "breadth-first"}, "rule"),
        ({"tree": {"seed": 1, "nodes": 9}, "processes": 0}, "processes"),
        (
            {"tree": {"seed": 1, "nodes": 9}, "crashes": [{"process": 5, "time": 1}]},
            "crashes.process",
        ),
        ({"tree": {"seed": 1, "nodes": 9}, "crashes": [{"process": 0}]}, "crashes"),
        (
            {"tree": {"seed": 1, "nodes": 9}, "joins": [{"process": 3, "time": 1}]},
            "joins",
        ),
    ],
)
def test_invalid_scenarios(data, key):
    with pytest.raises(ConfigurationError) as excinfo:
        scenario_from_dict(data)
    assert excinfo.value.config_key == key


def test_unreadable_scenario_documents(tmp_path):
    with pytest.raises(ConfigurationError):
        load_scenario(tmp_path / "missing.yaml")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    with pytest.raises(ConfigurationError):
        load_scenario(bad)
    text = tmp_path / "run.txt"
    text.write_text("{}", encoding="utf-8")
    with pytest.raises(ConfigurationError):
        load_scenario(text)


def test_gossip_servers_must_be_initial_and_not_all_crash():
    membership = MembershipParams(enabled=True, gossip_servers=(0,))
    stranger = MembershipParams(enabled=True, gossip_servers=(7,))
    with pytest.raises(ConfigurationError):
        make_scenario(processes=2, membership=stranger)
    crashes = (CrashSpec(0, time=1.0),)
    with pytest.raises(ConfigurationError):
        make_scenario(processes=2, membership=membership, crashes=crashes)


def test_fault_times_and_sweep_cells():
    scenario = make_scenario(
        processes=3,
        crashes=(CrashSpec(1, fraction=0.5), CrashSpec(2, time=4.0)),
        partitions=(PartitionSpec(((0,), (1, 2)), fraction=0.25),),
    )
    resolved = scenario.with_fault_times(10.0)
    assert resolved.crashes == (CrashSpec(1, time=5.0), CrashSpec(2, time=4.0))
    assert resolved.partitions[0].time == 2.5
    assert not resolved.needs_baseline
    assert scenario.fault_free().crashes == ()
    cells = scenarios_for(make_scenario(), [1, 4], [0, 9])
    assert [(s.processes, s.seed) for s in cells] == [(1, 0), (1, 9), (4, 0), (4, 9)]


def test_scenario_to_dict_is_plain_data():
    data = make_scenario(rule=SelectionRule.BEST_FIRST).to_dict()
    assert data["rule"] == "best-first"
    assert data["tree"]["nodes"] == 301
    assert "base_dir" not in data
    json.dumps(data)


# -- runs ---------------------------------------------------------------------


def test_single_process_three_node_tree(tmp_path, three_node_file):
    scenario = Scenario(tree=TreeSource(path=str(three_node_file)))
    result = simulate(scenario)
    assert result.outcome is Outcome.TERMINATED
    assert result.optimum == 3.0
    assert result.oracle_checked and result.optimum_correct
    assert result.terminated == (0,)
    assert result.execution_time == pytest.approx(3.0, abs=0.01)
    assert result.storage_redundant_bytes == 0
    assert result.aggregate.redundant_storage_bytes == 0


def test_identical_scenarios_give_identical_results():
    scenario = make_scenario(processes=4, seed=3, network=NetworkParams(loss_prob=0.05))
    assert simulate(scenario).to_json() == simulate(scenario).to_json()


def test_ten_processes_find_the_sequential_optimum():
    scenario = make_scenario(nodes=1000, tree_seed=2, processes=10, audit=True)
    result = simulate(scenario)
    assert result.outcome is Outcome.TERMINATED
    assert result.optimum == sequential_solve(load_tree(scenario)).optimum
    assert result.optimum_correct
    assert set(result.terminated) == set(range(10))


def test_crash_all_is_total_failure():
    crashes = tuple(CrashSpec(pid, time=0.0) for pid in range(3))
    result = simulate(make_scenario(processes=3, crashes=crashes))
    assert result.outcome is Outcome.TOTAL_FAILURE
    assert result.terminated == ()


def test_crash_run_logs_at_every_level(caplog):
    caplog.set_level(logging.DEBUG)
    crashes = (CrashSpec(1, time=0.05),)
    scenario = make_scenario(processes=3, seed=1, crashes=crashes)
    result = simulate(scenario)
    assert result.outcome is Outcome.TERMINATED
    crashed = [r for r in caplog.records if r.getMessage() == "Process crashed"]
    assert [r.worker for r in crashed] == [1]
    assert any(r.getMessage() == "Termination detected" for r in caplog.records)


def test_survivor_recovers_lost_work():
    crashes = (CrashSpec(1, fraction=0.85), CrashSpec(2, fraction=0.85))
    result = simulate(make_scenario(processes=3, seed=5, crashes=crashes, audit=True))
    assert result.outcome is Outcome.TERMINATED
    assert result.terminated == (0,)
    assert result.optimum_correct


def test_early_crash_of_root_holder_forces_root_restart():
    scenario = make_scenario(processes=2, crashes=(CrashSpec(0, time=0.001),))
    result = simulate(scenario)
    assert result.outcome is Outcome.TERMINATED
    assert result.optimum_correct
    assert result.per_process[1].root_restarts == 1


def test_partition_then_heal():
    partitions = (
        PartitionSpec(((0, 1, 2), (3, 4, 5)), fraction=0.1),
        PartitionSpec((), fraction=0.4),
    )
    scenario = make_scenario(processes=6, seed=1, partitions=partitions, audit=True)
    result = simulate(scenario)
    assert result.outcome is Outcome.TERMINATED
    assert result.optimum_correct


def test_time_guard_gives_timeout():
    result = simulate(make_scenario(processes=2, max_sim_time=0.05))
    assert result.outcome is Outcome.TIMEOUT
    assert result.execution_time <= 0.05


def test_wrong_expected_optimum_is_flagged():
    result = simulate(make_scenario(expect_optimum=-1.0))
    assert result.optimum_correct is False


def test_injected_crash_during_a_run():
    scenario = make_scenario(processes=3, seed=4)
    simulation = Simulation(scenario, load_tree(scenario))
    assert simulation.run_until(0.05) is None
    with pytest.raises(ConfigurationError):
        simulation.inject_crash(1, 0.0)
    simulation.inject_crash(1, 0.1)
    simulation.inject_crash(1, 0.2)
    result = simulation.run()
    assert result.outcome is Outcome.TERMINATED
    assert result.terminated == (0, 2)
    assert result.optimum == sequential_solve(load_tree(scenario)).optimum


def test_finished_node_drains_inbox_before_reporting(monkeypatch):
    scenario = make_scenario(processes=2, granularity=50.0)
    simulation = Simulation(scenario, load_tree(scenario))
    simulation.start()
    worker = simulation.workers[0]
    assert worker.current is not None
    calls = []
    for name in ("expand", "receive", "flush"):

        def recorded(*args, _name=name, _method=getattr(worker, name)):
            calls.append(_name)
            return _method(*args)

        monkeypatch.setattr(worker, name, recorded)

    root_cost = simulation.tree.root.time_cost
    assert simulation.run_until(root_cost + 1.0) is None
    first = calls.index("expand")
    assert calls[first : first + 3] == ["expand", "receive", "flush"]


def test_run_until_drives_partial_runs():
    simulation = Simulation(make_scenario(processes=2), load_tree(make_scenario()))
    assert simulation.run_until(0.01) is None
    assert simulation.now <= 0.01
    assert simulation.run().outcome is Outcome.TERMINATED


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(20))
def test_membership_views_converge_after_join_and_crash(seed):
    membership = MembershipParams(enabled=True, t_member=1.0)
    scenario = make_scenario(
        nodes=20001,
        granularity=10.0,
        pruning=False,
        processes=20,
        seed=seed,
        membership=membership,
        joins=(JoinSpec(20, 5.0),),
        crashes=(CrashSpec(3, time=20.0),),
    )
    simulation = Simulation(scenario, load_tree(scenario))

    def live_views():
        live = {
            pid
            for pid, w in simulation.workers.items()
            if w.status is WorkerStatus.RUNNING
        }
        return live, [set(simulation.workers[pid].view.members()) for pid in live]

    assert simulation.run_until(20.0 + 10 * membership.t_member) is None
    live, views = live_views()
    assert live == set(range(21)) - {3}
    assert all(view == live | {3} for view in views)

    deadline = 20.0 + membership.fail_timeout + 20 * membership.t_member
    assert simulation.run_until(deadline) is None
    live, views = live_views()
    assert live == set(range(21)) - {3}
    assert all(view == live for view in views)


def test_trace_records_every_processed_event():
    crashes = (CrashSpec(1, time=0.5),)
    sink = io.StringIO()
    recorder = TraceRecorder(sink)
    result = simulate(make_scenario(processes=3, crashes=crashes), trace=recorder)
    records = [json.loads(line) for line in sink.getvalue().splitlines()]
    assert len(records) == recorder.count == result.trace_records
    processed = {"deliver", "timer", "wake", "crash", "partition", "join"}
    assert sum(r["event"] in processed for r in records) == result.events_processed
    assert [r["process"] for r in records if r["event"] == "crash"] == [1]
    sends = [r for r in records if r["event"] == "send"]
    assert sends and all(r["size_bytes"] >= 64 and "kind" in r for r in sends)
    expands = sum(r["event"] == "expand" for r in records)
    assert expands == result.aggregate.nodes_expanded


def test_storage_and_message_accounting():
    result = simulate(make_scenario(processes=4, seed=2))
    totals = result.aggregate
    assert 0 <= result.storage_redundant_bytes <= result.storage_total_bytes
    assert totals.redundant_storage_bytes >= result.storage_redundant_bytes
    assert all(
        c.redundant_storage_bytes <= c.storage_peak_bytes
        for c in result.per_process.values()
    )
    assert totals.messages_sent == sum(totals.messages_by_kind.values())
    assert totals.comm_bytes_sent >= 64 * totals.messages_sent
    for counters in result.per_process.values():
        assert counters.idle_time >= 0


# -- audit --------------------------------------------------------------------


def _worker(tree):
    params = ProtocolParams().with_request_timeout(0.02)
    view = MembershipView.static(0, [0])
    return WorkerState(0, tree, params, view, np.random.default_rng(0))


def test_ground_truth_completion(seven_node_tree):
    truth = GroundTruth(seven_node_tree)
    assert truth.note_expanded(1)
    assert not truth.note_expanded(1)
    assert not truth.code_complete(parse_code("x1=0"))
    truth.note_eliminated(3)
    truth.note_eliminated(4)
    assert truth.code_complete(parse_code("x1=0"))
    assert not truth.code_complete(ROOT)


def test_audit_flags_unfinished_table_codes(seven_node_tree):
    truth = GroundTruth(seven_node_tree)
    worker = _worker(seven_node_tree)
    worker.table = contract([parse_code("x1=0")])
    with pytest.raises(AuditViolationError) as excinfo:
        audit_workers(truth, [worker], 1.0)
    assert excinfo.value.context["code"] == "x1=0"
    truth.note_expanded(1)
    truth.note_eliminated(3)
    truth.note_eliminated(4)
    audit_workers(truth, [worker], 1.0)


def test_audit_flags_premature_termination(seven_node_tree):
    truth = GroundTruth(seven_node_tree)
    worker = _worker(seven_node_tree)
    worker.status = WorkerStatus.TERMINATED
    with pytest.raises(AuditViolationError):
        audit_workers(truth, [worker], 1.0)
    worker.status = WorkerStatus.CRASHED
    audit_workers(truth, [worker], 1.0)


def test_audit_flags_open_work_nobody_holds(seven_node_tree):
    truth = GroundTruth(seven_node_tree)
    truth.note_expanded(0)
    worker = _worker(seven_node_tree)
    worker.pool.insert(PoolEntry(parse_code("x1=0"), 1, 2.0))
    with pytest.raises(AuditViolationError) as excinfo:
        audit_workers(truth, [worker], 1.0, in_flight=[])
    assert excinfo.value.context["code"] == "x1=1"
    audit_workers(truth, [worker], 1.0)
    audit_workers(truth, [worker], 1.0, in_flight=[parse_code("x1=1")])

    truth.note_expanded(2)
    truth.note_eliminated(5)
    assert truth.open_work() == [1, 6]
    audit_workers(truth, [worker], 1.0, in_flight=[parse_code("x1=1")])

    worker.current = worker.pool.select_next()
    audit_workers(truth, [worker], 1.0, in_flight=[parse_code("x1=1")])
    worker.status = WorkerStatus.CRASHED
    with pytest.raises(AuditViolationError) as excinfo:
        audit_workers(truth, [worker], 1.0, in_flight=[parse_code("x1=1")])
    assert excinfo.value.context["code"] == "x1=0"


def _check_against_oracle(nodes, processes, seed, loss, rule, pruning):
    scenario = make_scenario(
        nodes=nodes,
        tree_seed=seed,
        processes=processes,
        seed=seed,
        rule=rule,
        pruning=pruning,
        network=NetworkParams(loss_prob=loss),
        audit=True,
    )
    result = simulate(scenario)
    assert result.outcome is Outcome.TERMINATED
    assert result.optimum_correct
    assert not math.isinf(result.execution_time)


def oracle_cases(max_nodes, max_processes):
    return given(
        nodes=st.integers(10, max_nodes),
        processes=st.integers(1, max_processes),
        seed=st.integers(0, 2**16),
        loss=st.sampled_from([0.0, 0.01, 0.1]),
        rule=st.sampled_from(list(SelectionRule)),
        pruning=st.booleans(),
    )


@settings(max_examples=25, deadline=None)
@oracle_cases(max_nodes=400, max_processes=8)
def test_distributed_optimum_matches_oracle(
    nodes, processes, seed, loss, rule, pruning
):
    _check_against_oracle(nodes, processes, seed, loss, rule, pruning)


@pytest.mark.slow
@settings(max_examples=200, deadline=None)
@oracle_cases(max_nodes=5000, max_processes=16)
def test_distributed_optimum_matches_oracle_at_scale(
    nodes, processes, seed, loss, rule, pruning
):
    _check_against_oracle(nodes, processes, seed, loss, rule, pruning)


if __name__ == "__main__":
    pytest.main([__file__])
