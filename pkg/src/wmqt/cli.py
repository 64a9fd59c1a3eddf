"""Command line entry point: wmqt <mode> --config <path> [--threads N] [--out DIR].

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 analysis failure.
"""

from __future__ import annotations

import argparse
import sys

from .config import MODES, load_config
from .errors import AnalysisError, ConfigError, NumericalError
from .runner import run_experiment


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wmqt",
        description="Quantum escape from metastable washboard potentials: "
        "time evolution, decay rates and switching statistics.",
    )
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode in MODES:
        p = sub.add_parser(mode, help=f"run mode {mode!r}")
        p.add_argument("--config", required=True, help="path to the key=value config file")
        p.add_argument("--threads", type=int, default=None, help="worker pool size")
        p.add_argument("--out", default=None, help="output directory (overrides config)")
        p.add_argument(
            "--plot", action="store_true", help="also render figures next to the CSV output"
        )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, mode=args.mode)
        return run_experiment(cfg, threads=args.threads, plot=args.plot, out_dir=args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except AnalysisError as exc:
        print(f"analysis failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
