"""
Tests for the command line: every subcommand through ``main`` and its exit codes.
"""

import json

import pytest

from errorException import ConfigurationError
from inputOutput import (
    EXIT_INPUT_ERROR,
    EXIT_OK,
    EXIT_TIMEOUT,
    EXIT_TOTAL_FAILURE,
    EXIT_USAGE,
    EXIT_WRONG_OPTIMUM,
    exit_code_for,
    parse_int_list,
    reproducibility_header,
)
from main import main
from metrics import Outcome, RunResult, read_trace
from trees import load_basic_tree, save_basic_tree


def write_scenario(tmp_path, **fields):
    document = {"tree": {"seed": 7, "nodes": 301}, **fields}
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(document), encoding="utf-8")
    return path


def test_gen_tree_writes_root_only_tree(tmp_path, capsys):
    out = tmp_path / "one.bbtree"
    code = main(["gen-tree", "--seed", "3", "--nodes", "1", "--out", str(out)])
    assert code == EXIT_OK
    tree = load_basic_tree(out)
    assert len(tree) == 1
    assert "1 nodes" in capsys.readouterr().out


def test_gen_tree_is_reproducible(tmp_path):
    first, second = tmp_path / "a.bbtree", tmp_path / "b.bbtree"
    for out in (first, second):
        main(["gen-tree", "--seed", "11", "--nodes", "200", "--out", str(out)])
    assert first.read_text(encoding="utf-8") == second.read_text(encoding="utf-8")


def test_gen_tree_requires_out():
    with pytest.raises(SystemExit) as excinfo:
        main(["gen-tree", "--seed", "1", "--nodes", "10"])
    assert excinfo.value.code == EXIT_USAGE


def test_gen_tree_rejects_bad_target(tmp_path):
    out = tmp_path / "bad.bbtree"
    code = main(["gen-tree", "--seed", "1", "--nodes", "0", "--out", str(out)])
    assert code == EXIT_USAGE


def test_oracle(three_node_file, capsys):
    assert main(["oracle", str(three_node_file)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "optimum: 3.0" in out
    assert "expanded: 3 of 3 nodes" in out


def test_oracle_without_pruning_expands_everything(tmp_path, seven_node_tree, capsys):
    path = tmp_path / "seven.bbtree"
    save_basic_tree(seven_node_tree, path)
    assert main(["oracle", str(path), "--no-pruning"]) == EXIT_OK
    assert "expanded: 7 of 7 nodes" in capsys.readouterr().out


def test_oracle_on_malformed_tree_is_an_input_error(tmp_path, capsys):
    path = tmp_path / "broken.bbtree"
    path.write_text("bbtree v1\n0 -1 -1 -1 one 1.0 0\n", encoding="utf-8")
    assert main(["oracle", str(path)]) == EXIT_INPUT_ERROR
    assert "error:" in capsys.readouterr().err


def test_run_reports_and_exits_ok(tmp_path, capsys):
    scenario = write_scenario(tmp_path, processes=3, seed=2)
    result_path = tmp_path / "result.json"
    trace_path = tmp_path / "run.ndtrace"
    code = main(
        [
            "run",
            str(scenario),
            "--table",
            "--json",
            str(result_path),
            "--trace",
            str(trace_path),
        ]
    )
    assert code == EXIT_OK
    out = capsys.readouterr().out
    assert out.startswith("# seed=2 parameters=")
    assert "outcome: terminated" in out
    data = json.loads(result_path.read_text(encoding="utf-8"))
    assert data["outcome"] == "terminated"
    assert data["oracle_checked"] is True
    assert len(read_trace(trace_path)) == data["trace_records"]


def test_run_with_tree_file(tmp_path, three_node_file, capsys):
    scenario = tmp_path / "scenario.yaml"
    scenario.write_text(f"tree:\n  path: {three_node_file.name}\n", encoding="utf-8")
    assert main(["run", str(scenario)]) == EXIT_OK
    assert "optimum: 3.0" in capsys.readouterr().out


def test_run_total_failure(tmp_path):
    crashes = [{"process": pid, "time": 0.0} for pid in range(3)]
    scenario = write_scenario(tmp_path, processes=3, crashes=crashes)
    assert main(["run", str(scenario)]) == EXIT_TOTAL_FAILURE


def test_run_wrong_expected_optimum(tmp_path):
    scenario = write_scenario(tmp_path, processes=2)
    code = main(["run", str(scenario), "--expect-optimum", "-12345"])
    assert code == EXIT_WRONG_OPTIMUM


def test_run_timeout(tmp_path):
    scenario = write_scenario(tmp_path, processes=2, max_sim_time=0.001)
    assert main(["run", str(scenario)]) == EXIT_TIMEOUT


@pytest.mark.parametrize(
    "fields",
    [
        {"processes": 0},
        {"unknown_key": 1},
        {"network": {"base_latency_ms": -1.0}},
    ],
)
def test_run_invalid_scenario_is_a_usage_error(tmp_path, fields, capsys):
    scenario = write_scenario(tmp_path, **fields)
    assert main(["run", str(scenario)]) == EXIT_USAGE
    assert "error:" in capsys.readouterr().err


def test_run_missing_scenario_file(tmp_path):
    assert main(["run", str(tmp_path / "absent.yaml")]) == EXIT_USAGE


def test_sweep_then_report(tmp_path, capsys):
    scenario = write_scenario(tmp_path)
    results = tmp_path / "sweep.json"
    code = main(
        [
            "sweep",
            str(scenario),
            "--processors",
            "1,3",
            "--seeds",
            "1,2",
            "--jobs",
            "2",
            "--out",
            str(results),
        ]
    )
    assert code == EXIT_OK
    cells = json.loads(results.read_text(encoding="utf-8"))["cells"]
    assert [(cell["processes"], cell["seed"]) for cell in cells] == [
        (1, 1),
        (1, 2),
        (3, 1),
        (3, 2),
    ]
    capsys.readouterr()

    table = tmp_path / "table.txt"
    assert main(["report", str(results), "--output", str(table)]) == EXIT_OK
    lines = table.read_text(encoding="utf-8").splitlines()
    assert lines[0].startswith("processors |")
    assert [line.split(" | ")[0] for line in lines[1:]] == ["1", "3"]


def test_sweep_rejects_bad_lists(tmp_path):
    scenario = write_scenario(tmp_path)
    assert main(["sweep", str(scenario), "--processors", "ten"]) == EXIT_USAGE
    code = main(["sweep", str(scenario), "--processors", "2", "--jobs", "0"])
    assert code == EXIT_USAGE


def test_report_rejects_other_documents(tmp_path):
    path = tmp_path / "other.json"
    path.write_text(json.dumps({"cells": [{"seed": 1}]}), encoding="utf-8")
    assert main(["report", str(path)]) == EXIT_USAGE


def test_parse_int_list():
    assert parse_int_list("10, 30,50", "--processors") == [10, 30, 50]
    with pytest.raises(ConfigurationError):
        parse_int_list(",", "--seeds")


def test_reproducibility_header_is_canonical():
    header = reproducibility_header(4, {"b": 1, "a": 2})
    assert header == '# seed=4 parameters={"a": 2, "b": 1}'


@pytest.mark.parametrize(
    "outcome, expected, optimum, code",
    [
        (Outcome.TERMINATED, 1.0, 1.0, EXIT_OK),
        (Outcome.TERMINATED, 1.0, 2.0, EXIT_WRONG_OPTIMUM),
        (Outcome.TOTAL_FAILURE, 1.0, None, EXIT_TOTAL_FAILURE),
        (Outcome.TIMEOUT, 1.0, None, EXIT_TIMEOUT),
    ],
)
def test_exit_code_for(outcome, expected, optimum, code):
    result = RunResult(
        outcome=outcome,
        optimum=optimum,
        processes=1,
        seed=0,
        execution_time=1.0,
        accounted_time=1.0,
        storage_total_bytes=0,
        storage_redundant_bytes=0,
        events_processed=0,
        expected_optimum=expected,
        oracle_checked=True,
    )
    assert exit_code_for(result) == code


if __name__ == "__main__":
    pytest.main([__file__])
