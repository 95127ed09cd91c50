#!/usr/bin/env python3
"""
Command-line interface for the labor market simulator.
"""

import sys
import os
import argparse
import logging
from typing import List, Optional

from dotenv import load_dotenv

from .src.config import MODES, RunConfig, apply_overrides, parse_config, parse_grid, parse_range
from .src.errors import ConfigError, DomainError
from .src.runner import execute

EXIT_OK = 0
EXIT_CONFIG_ERROR = 2
EXIT_RUNTIME_ERROR = 3

logger = logging.getLogger(__name__)


def configure_logging(debug: bool) -> None:
    """Log to standard error; LABOR_MARKET_LOG_LEVEL overrides the default level."""
    load_dotenv()
    level = logging.DEBUG if debug else logging.INFO
    env_level = os.getenv("LABOR_MARKET_LOG_LEVEL")
    if env_level and not debug:
        level = getattr(logging, env_level.upper(), level)
    logging.basicConfig(
        level=level,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Probabilistic labor market simulator")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML run configuration")
    common.add_argument("--seed", type=int, help="64-bit run seed")
    common.add_argument("--out", help="Output data table (CSV); metadata goes next to it")
    common.add_argument("--trials", type=int, help="Independent trials per sweep cell")
    common.add_argument("--workers", type=int, help="Worker processes for sweeps")
    common.add_argument("--debug", action="store_true", help="Enable debug logging")

    subparsers = parser.add_subparsers(dest="command", required=True, help="Command to run")
    helps = {
        "simulate": "Run the microscopic market and record U_t",
        "beveridge": "Employment rate against the job offer ratio",
        "gamma-sweep": "Employment rate against the ranking weight",
        "neugart": "Iterate the macroscopic unemployment/inflation maps",
        "coupled": "Drive the inflation map with the simulated unemployment",
        "fit": "Fit pi + b ~ U^(-c) to a (U, pi) table",
    }
    for mode in MODES:
        sub = subparsers.add_parser(mode, parents=[common], help=helps[mode])
        if mode in ("beveridge", "gamma-sweep"):
            sub.add_argument("--grid", help="Grid override start:stop:count[:log]")
        if mode == "fit":
            sub.add_argument("input", nargs="?", help="Delimiter-separated (U, pi) table")
            sub.add_argument("--b-range", help="Search interval for b, lo:hi")
    return parser


def load_config(args: argparse.Namespace) -> RunConfig:
    if args.config:
        config = RunConfig.from_file(args.config, mode=args.command)
    else:
        config = parse_config("", mode=args.command)
    return apply_overrides(
        config,
        seed=args.seed,
        output_path=args.out,
        trials=args.trials,
        workers=args.workers,
        grid=parse_grid(args.grid) if getattr(args, "grid", None) else None,
        b_range=parse_range(args.b_range) if getattr(args, "b_range", None) else None,
        input_path=getattr(args, "input", None),
    )


def main(argv: Optional[List[str]] = None) -> int:
    """Entry point for the CLI."""
    args = build_parser().parse_args(argv)
    configure_logging(args.debug)

    try:
        config = load_config(args)
        written = execute(config)
    except ConfigError as e:
        print(f"Config error: {e}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except (DomainError, OSError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_RUNTIME_ERROR
    except KeyboardInterrupt:
        print("Run stopped by user", file=sys.stderr)
        return 130

    for path in written:
        logger.info(f"Artifact: {path}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
