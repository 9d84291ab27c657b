#!/usr/bin/env python3
"""Entry point of the epidemic-bnb command line."""

import logging
import sys
from typing import List, Optional

from dotenv import load_dotenv

from errorException import (
    ConfigurationError,
    SimulationError,
    TreeGenerationError,
    configure_logging,
    log_simulation_error,
)
from inputOutput import EXIT_INPUT_ERROR, EXIT_USAGE, parse_args

logger = logging.getLogger("main")


def main(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, configure logging and run one subcommand."""
    # Environment only tunes diagnostics, never run semantics.
    load_dotenv()
    args = parse_args(argv)
    configure_logging(args.log_level)

    try:
        return int(args.handler(args))
    except (ConfigurationError, TreeGenerationError) as e:
        log_simulation_error(e, {"command": args.command}, logger)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except SimulationError as e:
        log_simulation_error(e, {"command": args.command}, logger)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except OSError as e:
        logger.error(f"I/O failure: {e}", exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
