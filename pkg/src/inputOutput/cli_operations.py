"""Command line interface: argument parsing and the subcommand handlers."""

import argparse
import json
import logging
import sys
from dataclasses import replace
from typing import List, Optional

from bnbEngine import SelectionRule, sequential_solve
from concurrency import load_sweep, run_sweep, save_sweep, successful_results
from errorException import ConfigurationError
from inputOutput.utils import (
    parse_int_list,
    reproducibility_header,
    tree_summary,
    write_output,
)
from metrics import Outcome, RunResult, TraceRecorder, average_rows, render_table
from simKernel import load_scenario, load_tree, simulate
from trees import (
    GeneratorParams,
    gen_random_tree,
    load_basic_tree,
    save_basic_tree,
    scale_granularity,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_USAGE = 2
EXIT_TOTAL_FAILURE = 3
EXIT_TIMEOUT = 4
EXIT_WRONG_OPTIMUM = 5

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


def exit_code_for(result: RunResult) -> int:
    """Map a run outcome and its oracle comparison to the exit-code vocabulary."""
    if result.outcome is Outcome.TOTAL_FAILURE:
        return EXIT_TOTAL_FAILURE
    if result.outcome is Outcome.TIMEOUT:
        return EXIT_TIMEOUT
    if result.optimum_correct is False:
        return EXIT_WRONG_OPTIMUM
    return EXIT_OK


def _format_value(value: Optional[float]) -> str:
    return "none" if value is None else repr(value)


def run_summary(result: RunResult) -> str:
    totals = result.aggregate
    expected = (
        _format_value(result.expected_optimum) if result.oracle_checked else "unchecked"
    )
    lines = [
        f"outcome: {result.outcome.value}",
        f"optimum: {_format_value(result.optimum)}",
        f"expected optimum: {expected}",
        f"execution time: {result.execution_time:.6f} s "
        f"({result.execution_hours:.4f} h)",
        f"terminated processes: {len(result.terminated)}/{len(result.per_process)}",
        f"nodes expanded: {totals.nodes_expanded}",
        f"redundant work: {totals.redundant_work_time:.6f} s",
        f"messages sent: {totals.messages_sent} ({totals.comm_bytes_sent} bytes)",
        f"messages dropped: {totals.messages_dropped}",
        f"storage peak: {result.storage_total_bytes} bytes "
        f"({result.storage_redundant_bytes} redundant)",
        f"B&B time: {result.bnb_percent:.2f}%",
        f"contraction time: {result.contraction_percent:.2f}%",
        f"events: {result.events_processed}",
    ]
    return "\n".join(lines) + "\n"


def cmd_gen_tree(args: argparse.Namespace) -> int:
    params = GeneratorParams(
        expand_prob=args.expand_prob,
        max_depth=args.max_depth,
        cost_median=args.cost_median,
        infeasible_prob=args.infeasible_prob,
    )
    tree = gen_random_tree(args.seed, args.nodes, params)
    tree = scale_granularity(tree, args.granularity)
    save_basic_tree(tree, args.out)
    summary = tree_summary(tree)
    print(
        f"wrote {args.out}: {summary['nodes']} nodes, {summary['leaves']} leaves, "
        f"max depth {summary['max_depth']}, mean depth {summary['mean_depth']}"
    )
    return EXIT_OK


def cmd_oracle(args: argparse.Namespace) -> int:
    tree = load_basic_tree(args.tree)
    rule = SelectionRule.parse(args.rule)
    result = sequential_solve(tree, rule, pruning=not args.no_pruning)
    print(f"optimum: {_format_value(result.optimum)}")
    print(f"expanded: {result.expanded_count} of {len(tree)} nodes")
    print(f"sequential time: {result.total_time:.6f} s")
    print(f"exhaustive time: {tree.total_cost:.6f} s")
    return EXIT_OK


def cmd_run(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    if args.audit:
        scenario = replace(scenario, audit=True)
    if args.expect_optimum is not None:
        scenario = replace(scenario, expect_optimum=args.expect_optimum)
    trace_path = args.trace or scenario.trace

    print(reproducibility_header(scenario.seed, scenario.to_dict()))
    tree = load_tree(scenario)
    if trace_path:
        with TraceRecorder.open(trace_path) as recorder:
            result = simulate(scenario, tree, recorder)
    else:
        result = simulate(scenario, tree)

    sys.stdout.write(run_summary(result))
    if args.table:
        sys.stdout.write(render_table([result]))
    if args.json:
        write_output(result.to_json() + "\n", args.json, sys.stdout)
    return exit_code_for(result)


def cmd_sweep(args: argparse.Namespace) -> int:
    base = load_scenario(args.scenario)
    processors = parse_int_list(args.processors, "--processors")
    seeds = parse_int_list(args.seeds, "--seeds")
    if args.jobs < 1:
        raise ConfigurationError("--jobs must be >= 1", "--jobs", args.jobs)

    parameters = {**base.to_dict(), "processors": processors, "seeds": seeds}
    print(reproducibility_header(base.seed, parameters))
    cells = run_sweep(base, processors, seeds, jobs=args.jobs)
    save_sweep(cells, args.out)

    results = successful_results(cells)
    failed = [cell for cell in cells if not cell.succeeded]
    if results:
        sys.stdout.write(render_table(average_rows(results)))
    for cell in failed:
        print(f"failed cell processes={cell.processes} seed={cell.seed}: {cell.error}")
    print(f"results written to {args.out}")
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    try:
        cells = load_sweep(args.results)
    except (KeyError, json.JSONDecodeError) as e:
        raise ConfigurationError(
            f"not a sweep results file: {e}", "results", args.results
        ) from e
    results = successful_results(cells)
    if not results:
        raise ConfigurationError(
            "results file holds no successful runs", "results", args.results
        )
    write_output(render_table(average_rows(results)), args.output, sys.stdout)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="epidemic-bnb",
        description="Simulate fault-tolerant decentralized branch-and-bound.",
    )
    parser.add_argument(
        "--log-level",
        choices=LOG_LEVELS,
        type=str.upper,
        default=None,
        help="Diagnostics level (default: $LOG_LEVEL, else WARNING).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen-tree", help="Generate a random basic tree file.")
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument("--nodes", type=int, required=True, help="Target node count.")
    gen.add_argument("--out", required=True, help="Output path of the bbtree file.")
    gen.add_argument(
        "--granularity", type=float, default=1.0, help="Node cost multiplier."
    )
    gen.add_argument("--expand-prob", type=float, default=GeneratorParams.expand_prob)
    gen.add_argument("--max-depth", type=int, default=GeneratorParams.max_depth)
    gen.add_argument("--cost-median", type=float, default=GeneratorParams.cost_median)
    gen.add_argument(
        "--infeasible-prob", type=float, default=GeneratorParams.infeasible_prob
    )
    gen.set_defaults(handler=cmd_gen_tree)

    oracle = sub.add_parser("oracle", help="Solve a tree sequentially.")
    oracle.add_argument("tree", help="Path of a bbtree file.")
    oracle.add_argument("--rule", default=SelectionRule.DEPTH_FIRST.value)
    oracle.add_argument("--no-pruning", action="store_true", help="Expand every node.")
    oracle.set_defaults(handler=cmd_oracle)

    run = sub.add_parser("run", help="Run one scenario.")
    run.add_argument("scenario", help="Scenario file (.json, .yaml or .yml).")
    run.add_argument("--trace", default=None, help="Write an .ndtrace event trace.")
    run.add_argument(
        "--audit", action="store_true", help="Check safety after every event."
    )
    run.add_argument("--table", action="store_true", help="Also print the table row.")
    run.add_argument("--json", default=None, help="Write the full result as JSON.")
    run.add_argument("--expect-optimum", type=float, default=None)
    run.set_defaults(handler=cmd_run)

    sweep = sub.add_parser("sweep", help="Run a processors-by-seeds sweep.")
    sweep.add_argument("scenario", help="Base scenario file.")
    sweep.add_argument("--processors", required=True, help="e.g. 10,30,50,70,100")
    sweep.add_argument("--seeds", default="0", help="e.g. 1,2,3")
    sweep.add_argument("--jobs", type=int, default=1, help="Host threads.")
    sweep.add_argument("--out", default="sweep-results.json", help="Results file.")
    sweep.set_defaults(handler=cmd_sweep)

    report = sub.add_parser("report", help="Render the table of a sweep results file.")
    report.add_argument("results", help="Results file written by sweep.")
    report.add_argument(
        "--output", default=None, help="Write the table here instead of stdout."
    )
    report.set_defaults(handler=cmd_report)

    return parser


def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    return build_parser().parse_args(argv)
