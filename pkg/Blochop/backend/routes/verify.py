"""
verify-paper: certificate sweeps and the property suites, nonzero exit on any failure
"""

import argparse
import logging
from typing import List, Optional

from functions.orchestrator import Orchestrator
from models.errors import EXIT_CODES, BlochopErrorType
from .analysis import CommandResult

logger = logging.getLogger(__name__)

COMMAND = "verify-paper"


def register_commands(sub: argparse._SubParsersAction, parents: List[argparse.ArgumentParser]) -> None:
    cmd = sub.add_parser(COMMAND, aliases=["verify"], parents=parents,
                         help="Run the test-function certificates and the estimator property suites")
    # fault injection for the certificate sweep
    cmd.add_argument("--debug-tamper", action="store_true", help=argparse.SUPPRESS)
    cmd.set_defaults(command=COMMAND)


def handle(args: argparse.Namespace, orchestrator: Orchestrator) -> Optional[CommandResult]:
    if args.command not in (COMMAND, "verify"):
        return None
    results = orchestrator.run_verify_paper(tamper=args.debug_tamper)
    if results["passed"]:
        return results, None, 0
    failed = [name for name, section in results.items() if isinstance(section, dict) and not section["passed"]]
    logger.error(f"{COMMAND} failed: {', '.join(failed)}")
    return results, None, EXIT_CODES[BlochopErrorType.CERTIFICATION]
