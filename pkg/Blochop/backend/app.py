"""
Blochop command-line entry point
Parses arguments, configures logging, loads the run config and dispatches to the command routes
"""

import logging
import sys
import time
from typing import List, Optional

import configargparse
from rich.console import Console
from rich.logging import RichHandler

from functions.orchestrator import Orchestrator
from functions.report import build_report, canonical_json, csv_text, emit, write_atomic
from functions.run_config import load_run_config
from functions.settings import LOG_LEVEL, VERSION, WORKERS
from models.errors import BlochopError
from routes import analysis, verify

logger = logging.getLogger("blochop")

stderr_console = Console(stderr=True)

ROUTES = (analysis, verify)


def configure_logging(level: str) -> None:
    logging.basicConfig(
        level=level.upper(),
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=stderr_console, rich_tracebacks=True, show_path=False)],
        force=True,
    )


def build_parser() -> configargparse.ArgumentParser:
    common = configargparse.ArgumentParser(add_help=False)
    common.add_argument("--config", env_var="BLOCHOP_CONFIG", default=None,
                        help="YAML/JSON run config (looked up in BLOCHOP_CONFIG_DIR if not a path)")
    common.add_argument("--out", default=None, help="Write the JSON report here instead of stdout")
    common.add_argument("--csv", default=None, help="Write per-level A-quantity sequences as CSV")
    common.add_argument("--seed", type=int, default=None, help="Override the config seed")
    common.add_argument("--grid-M", dest="grid_M", type=int, default=None, help="Override grid.M")
    common.add_argument("--levels-J", dest="levels_J", type=int, default=None, help="Override grid.J")
    common.add_argument("--workers", type=int, env_var="BLOCHOP_WORKERS", default=WORKERS)
    common.add_argument("--timing", action="store_true", help="Add wall-clock time to the report")
    common.add_argument("--log-level", env_var="BLOCHOP_LOG_LEVEL", default=LOG_LEVEL)

    parser = configargparse.ArgumentParser(
        prog="blochop",
        description="Numerical estimates for Stevic-Sharma type operators into weighted Bloch spaces",
    )
    parser.add_argument("--version", action="version", version=f"blochop {VERSION}")
    sub = parser.add_subparsers(dest="command", required=True)
    for route in ROUTES:
        route.register_commands(sub, [common])
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    started = time.perf_counter()

    try:
        config = load_run_config(args.config, {"grid.M": args.grid_M, "grid.J": args.levels_J, "seed": args.seed})
        orchestrator = Orchestrator(config, workers=args.workers)
        logger.info(f"Running {args.command} (blochop {VERSION})")
        for route in ROUTES:
            outcome = route.handle(args, orchestrator)
            if outcome is not None:
                break
        else:
            raise BlochopError(f"unknown command {args.command}")
        results, rows, code = outcome

        wall_clock = time.perf_counter() - started if args.timing else None
        report = build_report(args.command, config.canonical(), config.seed, results, wall_clock)
        text = emit(report, args.out)
        if not args.out:
            sys.stdout.write(text)
        if args.csv:
            if rows is None:
                logger.warning(f"{args.command} produces no per-level sequences; --csv ignored")
            else:
                write_atomic(args.csv, csv_text(rows))
        logger.info(f"Finished {args.command} with exit code {code}")
        return code
    except BlochopError as e:
        logger.error(f"{e.error_type.value} error: {e.message}")
        stderr_console.print_json(canonical_json(e.to_dict()))
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
