"""
pansrr command line.

Usage:
    python -m pansrr full-run --config config/experiment.env --seed 3
    python -m pansrr simulate --out runs/a
    python -m pansrr reconstruct --out runs/a --solver lsq
    python -m pansrr evaluate --out runs/a

Exit codes:
    0 = Success
    1 = A pipeline stage failed
    2 = Invalid config or arguments
"""

from __future__ import annotations

import argparse
import logging
import sys
from typing import Any, Dict, List, Optional

from pansrr import __version__
from pansrr.errors import ConfigError
from pansrr.harness.config import DEFAULT_CONFIG_PATH, load_experiment_config
from pansrr.harness.pipeline import COMMANDS, run_pipeline
from pansrr.logging_utils import setup_logging


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pansrr",
        description="Multiframe super-resolution of pansharpened multiband images",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--config",
        "-c",
        default=None,
        help=f"key=value experiment file (default: {DEFAULT_CONFIG_PATH.name} if present)",
    )
    common.add_argument("--mode", choices=["simulated", "real"])
    common.add_argument("--truth", help="ground-truth bundle (simulated mode)")
    common.add_argument("--ms", nargs="+", help="MS bundles, one per date (real mode)")
    common.add_argument("--pan", nargs="+", help="PAN bundles matching --ms (real mode)")
    common.add_argument("--solver", choices=["ibp", "lsq"])
    common.add_argument("--lambda", dest="lam", type=float, help="IBP step size in (0, 2]")
    common.add_argument("--tau", type=float, help="IBP stopping threshold on the mean residual")
    common.add_argument("--max-iters", dest="max_iterations", type=int)
    common.add_argument("--blur-sigma", dest="blur_sigma", type=float)
    common.add_argument("--noise-sigma", dest="noise_sigma", type=float)
    common.add_argument("--seed", type=int)
    common.add_argument("--out", "-o", help="output directory")
    common.add_argument("--workers", type=int, help="band-parallel threads")
    common.add_argument("--verbose", "-v", action="store_true", help="log every iteration")

    for command in COMMANDS:
        sub.add_parser(command, parents=[common], help=f"run the {command} stage")
    return parser


def overrides_from_args(args: argparse.Namespace) -> Dict[str, Any]:
    keys = (
        "mode", "truth", "ms", "pan", "solver", "lam", "tau", "max_iterations",
        "blur_sigma", "noise_sigma", "seed", "out", "workers",
    )
    return {key: getattr(args, key) for key in keys}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2

    setup_logging(logging.DEBUG if args.verbose else None)

    config_path = args.config
    if config_path is None and DEFAULT_CONFIG_PATH.is_file():
        config_path = DEFAULT_CONFIG_PATH
    try:
        config = load_experiment_config(config_path, overrides_from_args(args))
    except ConfigError as exc:
        print(f"Invalid configuration: {exc}", file=sys.stderr)
        return 2

    result = run_pipeline(config, args.command)
    if result.exit_status:
        print(f"{args.command} failed at stage '{result.failed_stage}': {result.message}", file=sys.stderr)
        return result.exit_status

    print(f"{args.command} finished; outputs in {config.out}")
    for name, path in sorted(result.artifacts.items()):
        print(f"   • {name}: {path}")
    return 0
