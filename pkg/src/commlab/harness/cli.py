"""Command line entry point: ``commlab <suite> --config c.json --out r.json``.

Exit codes: 0 success, 1 config or I/O error, 2 when a configured check fails.
``COMMLAB_THREADS`` sets the thread count when ``--threads`` is not given.
"""
from __future__ import annotations

import argparse
import os
import sys

from .config import ConfigError, load_json
from .report import write_report
from .suites import RUNNERS

THREADS_ENV = "COMMLAB_THREADS"

HELP = {
    "osc-sweep": "modified oscillation vs weighted rhs over a ball sweep",
    "hst-contrast": "classical vs modified oscillation for growing far supports",
    "bmo": "mean oscillation vs BMO_b^q on shrinking balls",
    "constants": "Muckenhoupt constants and the duality identity",
    "endpoint": "weighted level sets vs the L log L bound",
    "extrapolate": "measured weighted L^p constants of commutators",
    "grand-maximal": "grand maximal operator vs M f + T* f",
    "opnorm": "lower bounds for the weighted maximal operator norm",
    "decompose": "per-term constants of the proof decompositions",
    "sharp": "sharp maximal pointwise bound at probe samples",
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="commlab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in RUNNERS:
        sp = sub.add_parser(name, help=HELP[name])
        sp.add_argument("--config", required=True, help="scenario JSON file")
        sp.add_argument("--out", required=True, help="report path")
        sp.add_argument("--format", choices=("json", "csv"), default="json")
        sp.add_argument("--threads", type=int, default=None)
    return ap


def resolve_threads(arg: int | None) -> int:
    if arg is not None:
        return max(1, arg)
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(THREADS_ENV, f"expected an integer, got {env!r}")
    return 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        data = load_json(args.config)
        suite = data.get("suite", args.command)
        if suite != args.command:
            raise ConfigError("suite", f"config is for {suite!r}, not {args.command!r}")
        data.setdefault("suite", args.command)
        report = RUNNERS[args.command](data, resolve_threads(args.threads))
        write_report(report, args.out, args.format)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 1
    for c in report.checks:
        print(f"{'PASS' if c.passed else 'FAIL'} {c.name} = {c.value} ({c.threshold})")
    return 0 if report.passed else 2


if __name__ == "__main__":
    sys.exit(main())
