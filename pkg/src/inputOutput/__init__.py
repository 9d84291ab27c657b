"""Command-line operations and their input/output helpers."""

from inputOutput.cli_operations import (
    EXIT_INPUT_ERROR,
    EXIT_OK,
    EXIT_TIMEOUT,
    EXIT_TOTAL_FAILURE,
    EXIT_USAGE,
    EXIT_WRONG_OPTIMUM,
    build_parser,
    exit_code_for,
    parse_args,
    run_summary,
)
from inputOutput.utils import (
    parse_int_list,
    reproducibility_header,
    tree_summary,
    write_output,
)

__all__ = [
    "EXIT_INPUT_ERROR",
    "EXIT_OK",
    "EXIT_TIMEOUT",
    "EXIT_TOTAL_FAILURE",
    "EXIT_USAGE",
    "EXIT_WRONG_OPTIMUM",
    "build_parser",
    "exit_code_for",
    "parse_args",
    "run_summary",
    "parse_int_list",
    "reproducibility_header",
    "tree_summary",
    "write_output",
]
