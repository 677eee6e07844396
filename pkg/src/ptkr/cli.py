"""Command-line entry point.

    ptkr classical|quantum|otoc|spectrum|sweep [--config FILE]
         [--set key=value]... [--out DIR] [--jobs N] [--seed S]
         [--format csv|json]

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 sweep completed with failed grid points.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from ptkr.config import KINDS, ConfigError, resolve_config
from ptkr.core import ParameterError
from ptkr.runner import run_experiment

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_PARTIAL = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ptkr",
        description="PT-symmetric kicked rotor experiments: classical complex-"
        "trajectory diffusion, quantum wavepackets, OTOCs, and quasienergy spectra.",
    )
    sub = parser.add_subparsers(dest="kind", required=True, metavar="|".join(KINDS))
    for kind in KINDS:
        p = sub.add_parser(kind, help=f"run a {kind} experiment")
        p.add_argument("--config", help="flat key = value configuration file")
        p.add_argument(
            "--set",
            dest="overrides",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="override one configuration key (repeatable; highest precedence)",
        )
        p.add_argument("--out", help="output directory (default: out)")
        p.add_argument("--jobs", type=int, help="parallel grid points for sweeps")
        p.add_argument("--seed", type=int, help="ensemble RNG seed")
        p.add_argument("--format", choices=("csv", "json"), help="series file format")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(
            args.config,
            args.overrides,
            kind=args.kind,
            out=args.out,
            jobs=args.jobs,
            seed=args.seed,
            format=args.format,
        )
        manifest = run_experiment(cfg)
    except (ConfigError, ParameterError, FileNotFoundError) as exc:
        print(f"ptkr: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OverflowError, FloatingPointError, ValueError, np.linalg.LinAlgError) as exc:
        print(f"ptkr: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    for name in manifest.files:
        print(f"wrote {cfg.out}/{name}")
    if manifest.status == "partial":
        for point, err in manifest.errors.items():
            print(f"ptkr: {point} failed: {err}", file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
