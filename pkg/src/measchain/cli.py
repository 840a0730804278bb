"""Command line entry point: ``measchain run|verify|lattice``.

Exit codes: 0 pass, 1 invariant violation, 2 parse error, 3 validation error.
"""

from __future__ import annotations

import argparse
import sys

from . import harness, report, scenario

EXIT_OK, EXIT_VIOLATION, EXIT_PARSE, EXIT_INVALID = 0, 1, 2, 3


def _run(args) -> int:
    try:
        parsed = scenario.load(args.file)
    except OSError as exc:
        print(f"error: cannot read {args.file}: {exc.strerror}", file=sys.stderr)
        return EXIT_PARSE
    except scenario.ScenarioParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except scenario.ScenarioValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    fmt = args.format or parsed.report.get("format", "text")
    rep = report.build(parsed.scenario)
    sys.stdout.write(report.format_json(rep) if fmt == "json" else report.format_text(rep))
    return EXIT_OK if rep["passed"] else EXIT_VIOLATION


def _verify(args) -> int:
    text, ok = harness.verify(args.seed, args.trials, args.inject_fault)
    sys.stdout.write(text)
    return EXIT_OK if ok else EXIT_VIOLATION


def _lattice(args) -> int:
    text, ok = harness.lattice(args.dim, args.seed)
    sys.stdout.write(text)
    return EXIT_OK if ok else EXIT_VIOLATION


def _positive(s: str) -> int:
    n = int(s)
    if n < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return n


def _lattice_dim(s: str) -> int:
    n = int(s)
    if not 2 <= n <= 64:
        raise argparse.ArgumentTypeError("must be between 2 and 64")
    return n


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="measchain",
        description="Consecutive quantum measurements with the apparatus in the description.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="evaluate a JSON scenario file")
    p.add_argument("file")
    p.add_argument("--format", choices=scenario.FORMATS, default=None,
                   help="report format (default: the file's report.format, else text)")
    p.set_defaults(func=_run)

    p = sub.add_parser("verify", help="randomized invariant suite over all instrument classes")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--trials", type=_positive, default=200, help="scenarios per instrument class")
    p.add_argument("--inject-fault", action="store_true",
                   help="corrupt one Kraus set (negative control)")
    p.set_defaults(func=_verify)

    p = sub.add_parser("lattice", help="proposition-lattice and probability-axiom checks")
    p.add_argument("--dim", type=_lattice_dim, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_lattice)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
