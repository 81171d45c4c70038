"""Command line: catalog, verify, geodesic, report."""
from __future__ import annotations

import argparse
import csv
import json
import sys

from . import catalog
from ._trace import REGISTRY
from .errors import GeometryError, ScenarioError
from .geodesics import IntegratorConfig, integrate_geodesic, path_residuals, unit_state
from .report import EXIT_CONFIG, FORMATS, emit_report, load_report
from .scenario import load_scenario, run_with_coverage, shipped_scenarios


def _cmd_catalog(args):
    listing = catalog.describe()
    if args.json:
        print(json.dumps(listing, sort_keys=True, indent=2))
        return 0
    for section, items in listing.items():
        print(f"{section}:")
        for name, params, doc in items:
            ps = ", ".join(f"{k}={v}" for k, v in params.items())
            print(f"  {name:<22} {doc}" + (f"  [{ps}]" if ps else ""))
    return 0


def _read_scenarios(args):
    sources = []
    if args.shipped:
        sources.extend((p.name, p.read_text(encoding="utf-8")) for p in shipped_scenarios())
    for path in args.files:
        with open(path, encoding="utf-8") as fh:
            sources.append((path, fh.read()))
    if not sources:
        raise ScenarioError("invalid-value", "no scenario files given (pass files or --shipped)")
    out = []
    for name, text in sources:
        try:
            out.append(load_scenario(text))
        except ScenarioError as exc:
            raise ScenarioError(exc.kind, f"{name}: {exc}", exc.line, exc.column) from None
    return out


def _cmd_verify(args):
    try:
        scenarios = _read_scenarios(args)
    except (ScenarioError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    entries, ops = run_with_coverage(scenarios, args.workers)
    text, code = emit_report(entries, args.format, args.output,
                             coverage=ops if args.coverage else None,
                             timings=args.timings, points=args.points)
    if args.output is None:
        sys.stdout.write(text)
    if args.coverage:
        missing = sorted(REGISTRY - set(ops))
        if missing:
            print(f"coverage: operations never dispatched: {', '.join(missing)}", file=sys.stderr)
            code = max(code, 1)
        else:
            print(f"coverage: all {len(REGISTRY)} operations dispatched", file=sys.stderr)
    return code


def _cmd_geodesic(args):
    try:
        patch = catalog.make_surface(args.surface, json.loads(args.params) if args.params else None,
                                     mode=args.mode)
        initial = unit_state(patch, (args.u, args.v), (args.du, args.dv))
        path = integrate_geodesic(patch, initial, args.length,
                                  IntegratorConfig(step=args.step, max_steps=args.max_steps))
    except (KeyError, ValueError, GeometryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    res = path_residuals(patch, path)
    out = open(args.output, "w", newline="") if args.output else sys.stdout
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["s", "u", "v", "du", "dv", "r1", "r2"])
        for s, st, r in zip(path.s, path.states, res):
            w.writerow([repr(float(x)) for x in (s, *st, *r)])
    finally:
        if args.output:
            out.close()
    print(f"termination: {path.termination} at s = {path.length:.6g} {path.message}".rstrip(),
          file=sys.stderr)
    return 0


def _cmd_report(args):
    try:
        with open(args.file, encoding="utf-8") as fh:
            entries = load_report(fh.read())
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    text, code = emit_report(entries, args.format, args.output)
    if args.output is None:
        sys.stdout.write(text)
    return code


def build_parser():
    p = argparse.ArgumentParser(prog="confgeom", description="Verify conformal-map identities on catalog surfaces.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("catalog", help="list surfaces, curves and correspondences")
    c.add_argument("--json", action="store_true")
    c.set_defaults(func=_cmd_catalog)

    v = sub.add_parser("verify", help="run scenario files")
    v.add_argument("files", nargs="*")
    v.add_argument("--shipped", action="store_true", help="run the bundled scenario suite")
    v.add_argument("--format", choices=FORMATS, default="human")
    v.add_argument("-o", "--output")
    v.add_argument("--workers", type=int, default=None)
    v.add_argument("--coverage", action="store_true", help="fail unless every operation was dispatched")
    v.add_argument("--timings", action="store_true", help="include wall times (breaks byte stability)")
    v.add_argument("--points", action="store_true", help="include per-sample residual rows")
    v.set_defaults(func=_cmd_verify)

    g = sub.add_parser("geodesic", help="trace one geodesic to CSV")
    g.add_argument("surface")
    g.add_argument("--params", help="surface parameters as a JSON object")
    g.add_argument("--u", type=float, required=True)
    g.add_argument("--v", type=float, required=True)
    g.add_argument("--du", type=float, required=True)
    g.add_argument("--dv", type=float, required=True)
    g.add_argument("--length", type=float, default=1.0)
    g.add_argument("--step", type=float, default=1e-3)
    g.add_argument("--max-steps", type=int, default=1_000_000)
    g.add_argument("--mode", choices=("analytic", "fd"), default="analytic")
    g.add_argument("-o", "--output")
    g.set_defaults(func=_cmd_geodesic)

    r = sub.add_parser("report", help="re-render a saved json report")
    r.add_argument("file")
    r.add_argument("--format", choices=FORMATS, default="human")
    r.add_argument("-o", "--output")
    r.set_defaults(func=_cmd_report)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
