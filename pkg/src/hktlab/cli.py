"""Command line entry point: ``hktlab list`` and ``hktlab run``."""

from __future__ import annotations

import argparse
import json
import sys

from .checks import ALL_SUITES, get_check, suite_checks
from .errors import HKTLabError, SpecSyntaxError, UnknownCheckError
from .runner import SampleConfig, evaluate_checks
from .zoo import build_geometry, parse_geometry_spec

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hktlab", description="Numerical verifier for HKT and lcHK identities.")
    sub = p.add_subparsers(dest="command", required=True)

    ls = sub.add_parser("list", help="list registered checks with their anchors")
    ls.add_argument("--format", choices=("text", "json"), default="text")
    ls.add_argument("--suite", choices=ALL_SUITES, default="paper-all")

    run = sub.add_parser("run", help="run checks on a geometry")
    run.add_argument("--geometry", required=True, help="flat:n=K | hopf-lchk:n=K | hopf-hkt:n=K | product:SPEC,SPEC")
    run.add_argument("--suite", default=None, help=f"one of {', '.join(ALL_SUITES)} (default paper-all)")
    run.add_argument("--check", action="append", default=None, help="check id; repeatable; overrides --suite")
    run.add_argument("--points", type=int, default=100)
    run.add_argument("--seed", type=int, default=42)
    run.add_argument("--tol", type=float, default=None, help="override every check's tolerance")
    run.add_argument("--jet-order", type=int, default=None)
    run.add_argument("--workers", type=int, default=1)
    run.add_argument("--format", choices=("text", "json"), default="text")
    run.add_argument("--no-wall", action="store_true", help="omit wall_ms from JSON output")
    return p


def _list(args) -> int:
    specs = suite_checks(args.suite)
    if args.format == "json":
        rows = [
            {"id": s.id, "suite": s.suite, "citation": s.anchor.citation, "quote": s.anchor.quote,
             "preconditions": s.preconditions, "tolerance": s.tolerance}
            for s in specs
        ]
        print(json.dumps(rows, indent=2))
        return EXIT_OK
    width = max(len(s.id) for s in specs)
    for s in specs:
        print(f"{s.id.ljust(width)}  {s.suite:<14}  {s.anchor.citation}")
        print(f"{'':{width}}  {'':<14}  \"{s.anchor.quote}\"")
    return EXIT_OK


def _run(args) -> int:
    spec = parse_geometry_spec(args.geometry)
    cfg = SampleConfig(points=args.points, seed=args.seed, tol=args.tol, jet_order=args.jet_order, workers=args.workers)
    if args.check:
        specs = [get_check(c) for c in args.check]
    else:
        specs = suite_checks(args.suite or "paper-all")
    geom = build_geometry(spec)
    report = evaluate_checks(geom, specs, cfg, label=str(spec))
    if args.format == "json":
        print(report.to_json(wall=not args.no_wall))
    else:
        print(report.to_text())
    return EXIT_OK if report.all_passed else EXIT_FAIL


def main(argv: list[str] | None = None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        if args.command == "list":
            return _list(args)
        return _run(args)
    except (SpecSyntaxError, UnknownCheckError, ValueError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"hktlab: error: {msg}", file=sys.stderr)
        return EXIT_USAGE
    except HKTLabError as exc:
        print(f"hktlab: error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
