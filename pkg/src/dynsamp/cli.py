"""Command line entry point: ``dynsamp <command> <scenario> [options]``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import DynSampError, error_family
from .pipeline import RUNNERS, run_scenario
from .report import emit_report
from .scenario import parse_scenario

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERICAL = 3
EXIT_INVARIANT = 4

_ERROR_CODES = {
    "input": EXIT_INPUT,
    "numerical": EXIT_NUMERICAL,
    "invariant": EXIT_INVARIANT,
}


def exit_code_for(exc: BaseException) -> int:
    return _ERROR_CODES[error_family(exc)]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dynsamp", description="Frame analysis of sampled diagonal semigroups.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in RUNNERS:
        p = sub.add_parser(name)
        p.add_argument("scenario", help="path to a YAML scenario")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--out", type=Path, help="write the report here instead of stdout")
        p.add_argument("--seed", type=int, help="override the scenario seed")
        p.add_argument("--sweep", type=int, nargs="*", help="override the list of truncation sizes")
        p.add_argument("--timing", action="store_true", help="include wall-clock timings (non-deterministic)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        scenario = parse_scenario(Path(args.scenario)).with_overrides(seed=args.seed, sweep=args.sweep)
        report = run_scenario(args.command, scenario, timing=args.timing)
    except DynSampError as exc:
        print(f"dynsamp: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exit_code_for(exc)
    data = emit_report(report, args.format)
    if args.out is not None:
        args.out.write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    if report.errors:
        for err in report.errors:
            print(f"dynsamp: stage {err['stage']}: {err['error']}: {err['message']}", file=sys.stderr)
        return max(_ERROR_CODES[err["family"]] for err in report.errors)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
