"""Command line front end: ``dartfx-rbf`` or ``python -m dartfx.rbf``.

Examples::

    dartfx-rbf --experiment grid
    dartfx-rbf --experiment grid --d 2 --r 1 --r sqrt2 --out table1.csv
    dartfx-rbf --experiment ellipse --pairs 5,3 --n 20 --n 40 --seed 3 --jobs 4
    dartfx-rbf --experiment nodes --out nodes.csv

The table is printed to stdout. The exit status is 0 when every row was
computed (dashed rows count as computed), 1 when some row failed and 2 on
invalid arguments.
"""

from __future__ import annotations

import argparse
import logging
import math
import re
import sys
from pathlib import Path
from typing import Any, Optional, Sequence

from pydantic import ValidationError

from .__about__ import __version__
from .experiments import DEFAULT_NODE_SIZES, ExperimentConfig, all_computed, render_table, run_experiment, write_rows

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s [%(levelname)s] %(message)s (%(filename)s:%(lineno)s)"

_SQRT = re.compile(r"^(?:sqrt|√)\(?(\d+(?:\.\d*)?)\)?$")


def parse_radius(text: str) -> float:
    """A radius given as a number or as ``sqrtN`` (also ``sqrt(N)`` and ``√N``)."""
    value = text.strip().lower()
    match = _SQRT.match(value)
    try:
        radius = math.sqrt(float(match.group(1))) if match else float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid radius {text!r}") from None
    if not radius > 0:
        raise argparse.ArgumentTypeError(f"radius must be positive, got {text!r}")
    return radius


def parse_pair(text: str) -> tuple[float, int]:
    """An ``s,q`` pair such as ``7,4``."""
    parts = text.split(",")
    try:
        if len(parts) != 2:
            raise ValueError
        return float(parts[0]), int(parts[1])
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected s,q (e.g. 7,4), got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dartfx-rbf",
        description="Polyharmonic kernel differentiation and interpolation experiments on deficient node sets.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--experiment", choices=["grid", "ellipse", "nodes"], default="grid", help="Experiment to run.")
    parser.add_argument("--d", type=int, action="append", help="Grid dimension (repeatable; default 2..5).")
    parser.add_argument(
        "--r", type=parse_radius, action="append", help="Lattice radius, e.g. 1, sqrt2, 2 (repeatable)."
    )
    parser.add_argument("--s", type=float, help="Kernel exponent (grid; with --q a single ellipse pair).")
    parser.add_argument("--q", type=int, help="Polynomial order (grid; with --s a single ellipse pair).")
    parser.add_argument("--pairs", type=parse_pair, action="append", help="Ellipse s,q pair (repeatable).")
    parser.add_argument("--n", type=int, action="append", help="Ellipse node count (repeatable).")
    parser.add_argument("--seed", type=int, default=0, help="Seed of the jitter random stream.")
    parser.add_argument("--jitter", type=float, default=0.3, help="Jitter as a fraction of the parameter step.")
    parser.add_argument("--refinement", type=int, default=20, help="Error samples per parameter step.")
    parser.add_argument("--out", type=Path, help="Output file.")
    parser.add_argument("--format", choices=["csv", "markdown"], default="csv", help="Output file format.")
    parser.add_argument("--jobs", type=int, default=1, help="Worker threads.")
    parser.add_argument(
        "--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"], help="Logging level."
    )
    return parser


def config_from_args(args: argparse.Namespace, parser: argparse.ArgumentParser) -> ExperimentConfig:
    values: dict[str, Any] = {
        "experiment": args.experiment,
        "seed": args.seed,
        "jitter": args.jitter,
        "refinement": args.refinement,
        "output_format": args.format,
        "out": args.out,
        "jobs": args.jobs,
    }
    if args.d:
        values["dims"] = tuple(args.d)
    if args.r:
        values["radii"] = tuple(args.r)
    if args.n:
        values["sizes"] = tuple(args.n)
    elif args.experiment == "nodes":
        values["sizes"] = DEFAULT_NODE_SIZES
    if args.experiment == "ellipse":
        if (args.s is None) != (args.q is None):
            parser.error("--s and --q select an ellipse pair only when given together")
        if args.s is not None and args.pairs:
            parser.error("use either --pairs or --s/--q")
        if args.s is not None:
            values["pairs"] = ((args.s, args.q),)
        elif args.pairs:
            values["pairs"] = tuple(args.pairs)
    else:
        if args.s is not None:
            values["s"] = args.s
        if args.q is not None:
            values["q"] = args.q
    try:
        return ExperimentConfig(**values)
    except ValidationError as exc:
        parser.error(str(exc))
    raise AssertionError("unreachable")


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level), format=LOG_FORMAT)
    config = config_from_args(args, parser)
    logger.info("running %s experiment", config.experiment)

    rows = run_experiment(config)
    sys.stdout.write(render_table(rows))
    if config.out is not None:
        write_rows(rows, config.out, config.output_format)
    if not all_computed(rows):
        failed = [row for row in rows if getattr(row, "status", "ok") not in ("ok", "skipped")]
        logger.error("%d of %d rows could not be computed", len(failed), len(rows))
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
