"""``tedium-sem`` command-line entry point."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Optional, Sequence, TextIO

from tedium.sem.cli.commands import COMMAND_RUNNERS, CommandResult
from tedium.sem.cli.config import CONVERTERS, build_run_config
from tedium.sem.core.config import configure
from tedium.sem.core.exceptions import SpectralError
from tedium.sem.io.tables import write_csv, write_rows

logger = logging.getLogger(__name__)

EXIT_ERROR = 1

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def _typed(key: str) -> Callable[[str], Any]:
    converter = CONVERTERS[key]

    def convert(raw: str) -> Any:
        try:
            return converter(raw)
        except SpectralError as e:
            raise argparse.ArgumentTypeError(str(e)) from e

    convert.__name__ = key
    return convert


def _option(parser: argparse.ArgumentParser, flag: str, help_text: str, **kwargs: Any) -> None:
    key = flag.lstrip("-").replace("-", "_")
    parser.add_argument(flag, dest=key, type=_typed(key), default=None, help=help_text, **kwargs)


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=None, help="key=value file; flags override it")
    common.add_argument(
        "--log-level",
        default="WARNING",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="stderr log level (default WARNING)",
    )
    _option(common, "--threads", "worker threads (default: TEDIUM_SEM_THREADS or 1)")
    _option(common, "--seed", "random seed for generated right-hand sides")
    _option(common, "--dim", "2 or 3")
    _option(common, "--order", "polynomial order k of the Q^k elements")
    _option(common, "--cells", "cells per direction, comma list for a refinement study")
    _option(common, "--bc", "dirichlet, neumann or periodic")
    _option(common, "--alpha", "shift alpha in alpha u - Delta u")
    _option(common, "--domain", "interval a:b in every direction (write --domain=-1:1)")
    _option(common, "--repeat", "timed solves per mesh")
    _option(common, "--csv", "write the result table here instead of stdout")
    return common


def build_parser() -> argparse.ArgumentParser:
    """The argparse tree of all subcommands."""
    common = _common_options()
    parser = argparse.ArgumentParser(
        prog="tedium-sem",
        description="Spectral-element fast-diagonalization solvers.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    poisson = sub.add_parser("poisson", parents=[common], help="accuracy and timing of alpha u - Delta u = f")
    poisson.add_argument("--time-offline", dest="time_offline", action="store_const", const=True, default=None,
                         help="add a column with plan construction time")

    schrodinger = sub.add_parser("schrodinger", parents=[common], help="PCG for alpha u - Delta u + V u = f")
    _option(schrodinger, "--beta", "potential height, 0 <= V <= beta")
    _option(schrodinger, "--tol", "relative residual target")
    _option(schrodinger, "--max-iters", "iteration cap")
    _option(schrodinger, "--shift-fraction", "preconditioner shift is alpha + fraction * beta")
    _option(schrodinger, "--forcing", "exact or discrete right-hand side", choices=["exact", "discrete"])
    _option(schrodinger, "--history", "per-iteration residual CSV")

    ch = sub.add_parser("ch", parents=[common], help="Cahn-Hilliard two-droplet run")
    _option(ch, "--eps", "interface width")
    _option(ch, "--mobility", "mobility m")
    _option(ch, "--dt", "time step")
    _option(ch, "--steps", "number of steps")
    _option(ch, "--stab", "stabilization coefficient")
    _option(ch, "--radius", "droplet radius")
    _option(ch, "--centers", "droplet centers, e.g. 0,0,0.37;0,0,-0.37")
    _option(ch, "--snapshots", "snapshot times, comma list")
    _option(ch, "--vtk-dir", "directory for VTK snapshots")
    _option(ch, "--energy-csv", "per-step energy and mass CSV")

    compare = sub.add_parser("compare", parents=[common], help="spectral-element solvers against DFT-based ones")
    _option(compare, "--against", "reference solver", choices=["fft"])
    _option(compare, "--problem", "poisson (Q^1 direct solves) or schrodinger (PCG)", choices=["poisson", "schrodinger"])
    _option(compare, "--beta", "potential height for --problem schrodinger")
    _option(compare, "--tol", "relative residual target")
    _option(compare, "--max-iters", "iteration cap")
    _option(compare, "--shift-fraction", "preconditioner shift is alpha + fraction * beta")

    bench = sub.add_parser("bench", parents=[common], help="online solve time over a size sweep")
    _option(bench, "--sizes", "per-direction DoF targets, comma list")
    _option(bench, "--solver", "sem or fft", choices=["sem", "fft"])
    return parser


def emit(result: CommandResult, target: Optional[Path], stream: TextIO) -> None:
    """Write the result table to ``target`` or, when None, to ``stream``."""
    if target is not None:
        write_csv(target, result.header, result.rows)
    else:
        write_rows(stream, result.header, result.rows)


def error_line(error: SpectralError) -> str:
    """One-line JSON description of a failure."""
    payload = {"error": type(error).__name__, "message": str(error), "context": error.context}
    return json.dumps(payload, default=str, sort_keys=True)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run one subcommand and return the process exit code."""
    args = build_parser().parse_args(None if argv is None else list(argv))
    logging.basicConfig(level=getattr(logging, args.log_level), format=LOG_FORMAT, stream=sys.stderr)
    try:
        cfg = build_run_config(args.command, vars(args), args.config)
        if cfg.threads is not None:
            configure(threads=cfg.threads)
        logger.info("running %s", cfg.command)
        result = COMMAND_RUNNERS[cfg.command](cfg)
        emit(result, cfg.csv, sys.stdout)
    except SpectralError as e:
        logger.debug("command failed", exc_info=True)
        print(error_line(e), file=sys.stderr)
        return EXIT_ERROR
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
