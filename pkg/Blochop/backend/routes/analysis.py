"""
Analysis commands: norm, essnorm, check-bounded, dilation-sweep
"""

import argparse
import logging
from typing import Any, Dict, List, Optional, Tuple

from functions.orchestrator import Orchestrator

logger = logging.getLogger(__name__)

CommandResult = Tuple[Dict[str, Any], Optional[List[List[Any]]], int]


def register_commands(sub: argparse._SubParsersAction, parents: List[argparse.ArgumentParser]) -> None:
    sub.add_parser("norm", parents=parents,
                   help="Norm of the config's function (Bloch, alpha-Bloch, H^inf, Q_K or embedding)")
    sub.add_parser("essnorm", parents=parents,
                   help="Essential-norm estimates and compactness verdict for the configured operator")
    sub.add_parser("check-bounded", parents=parents,
                   help="Boundedness suprema, rho and the weight/space admissibility checks")
    sub.add_parser("dilation-sweep", parents=parents,
                   help="Monitoring sequence ||(T - T_r) f|| over the r schedule")


def handle(args: argparse.Namespace, orchestrator: Orchestrator) -> Optional[CommandResult]:
    """Run an analysis command. Returns None if the command is not ours."""
    if args.command == "norm":
        return orchestrator.run_norm(), None, 0

    if args.command == "essnorm":
        results, rows = orchestrator.run_essnorm()
        return results, rows, 0

    if args.command == "check-bounded":
        return orchestrator.run_check_bounded(), None, 0

    if args.command == "dilation-sweep":
        return orchestrator.run_dilation_sweep(), None, 0

    return None
