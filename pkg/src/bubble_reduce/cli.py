"""Command-line driver: one subcommand per computation, CSV or JSON reports.

Exit codes: 0 when every check in the report passes, 1 when a check fails or
a computation raises, 2 for usage and configuration errors.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .output import to_csv, to_json
from .quadrature import DEFAULT_SPEC
from .reports import BUILDERS, ConfigError, RunConfig

__all__ = ["main", "build_parser", "THREADS_ENV"]

THREADS_ENV = "BUBBLE_REDUCE_THREADS"
EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return value


def _nonnegative_float(text: str) -> float:
    value = float(text)
    if not value >= 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative number, got {text}")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--N", type=int, default=7, help="space dimension (default 7)")
    common.add_argument("--mu0", type=_nonnegative_float, default=1.0, help="Hardy strength slope mu = mu0 eps^alpha")
    common.add_argument("--alpha", type=_positive_float, default=1.0, help="Hardy strength exponent")
    common.add_argument("--k", type=int, default=None, help="number of bubbles besides the Hardy bubble")
    common.add_argument("--variant", choices=("multipoint", "tower"), default=None)
    common.add_argument("--grid", type=_positive_int, default=None, help="number of table rows")
    common.add_argument("--tol", type=_positive_float, default=1e-12, help="relative tolerance of root refinement")
    common.add_argument("--format", choices=("csv", "json"), default=None, dest="fmt")
    common.add_argument("--out", type=Path, default=None, help="output file (default: standard output)")
    common.add_argument("--seed", type=int, default=42, help="seed for sampled checks")
    common.add_argument("--plot", action="store_true", help="also save a PNG next to --out")

    parser = argparse.ArgumentParser(prog="bubble-reduce", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    helps = {
        "constants": "expansion constants a1..a4, b1..b4, c1",
        "green": "Robin function, antipodal Green values and phi along the axis",
        "thm11": "one bubble on the axis with the Hardy bubble at the origin",
        "thm12": "k = 2 or 3 negative bubbles on a regular polygon",
        "remark36": "gamma2, alpha3 and iota2 for four negative bubbles",
        "prop37": "iota2 sign and the t-inequality margin, per dimension",
        "thm13": "alternating bubbles on the square",
        "tower": "bubble tower critical point and g_i Hessians",
        "energy": "full energy by quadrature against the expansion",
        "verify-all": "run the acceptance checks",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, parents=[common], help=text, description=text)
        if name == "tower":
            p.add_argument("--zeta-radius", type=_nonnegative_float, default=0.0, help="radius for random translations")
        if name == "verify-all":
            p.add_argument("--criteria", type=int, nargs="+", default=(), help="subset of checks to run")
    return parser


def _threads() -> int | None:
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw == "":
        return None
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if value <= 0:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return value


def _config(args: argparse.Namespace) -> RunConfig:
    variant = args.variant or ("tower" if args.command in ("tower", "energy") else "multipoint")
    if args.plot and args.out is None:
        raise ConfigError("--plot needs --out to place the figure")
    return RunConfig(
        command=args.command,
        N=args.N,
        mu0=args.mu0,
        alpha=args.alpha,
        k=args.k,
        variant=variant,
        grid=args.grid,
        tol=args.tol,
        seed=args.seed,
        zeta_radius=getattr(args, "zeta_radius", 0.0),
        criteria=tuple(getattr(args, "criteria", ())),
    )


def _meta(cfg: RunConfig, threads: int | None) -> dict:
    return {
        "N": cfg.N,
        "mu0": cfg.mu0,
        "alpha": cfg.alpha,
        "k": cfg.k,
        "variant": cfg.variant,
        "grid": cfg.grid,
        "seed": cfg.seed,
        "tolerances": {"root_rel_tol": cfg.tol, "quadrature_rel_tol": DEFAULT_SPEC.rel_tol},
        "threads": threads,
        "versions": {"bubble_reduce": __version__, "numpy": np.__version__, "scipy": scipy.__version__},
    }


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        threads = _threads()
        cfg = _config(args)
        report = BUILDERS[cfg.command](cfg)
    except ConfigError as exc:
        print(f"bubble-reduce {args.command}: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001 - any computational failure maps to exit 1 with a diagnostic
        print(f"bubble-reduce {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILED

    fmt = args.fmt or ("json" if cfg.command == "verify-all" else "csv")
    text = to_json(report, _meta(cfg, threads)) if fmt == "json" else to_csv(report)
    if args.out is None:
        try:
            sys.stdout.write(text)
            sys.stdout.flush()
        except BrokenPipeError:
            # The reader closed early (for example ``| head``); silence the flush at interpreter exit.
            os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
    else:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(text, encoding="utf-8")
        if args.plot:
            from .plotting import render

            render(report, args.out.with_suffix(".png"))
    return EXIT_OK if report.passed else EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
