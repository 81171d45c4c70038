"""Declarative verification scenarios: loading, canonical form and execution.

A scenario is one JSON object.  Grammar (``?`` marks optional keys; every
object rejects keys not listed)::

    scenario       := { "name": string,
                        "correspondence": corr,
                        "curves"?: [curve, ...],
                        "checks": [check-name, ...],
                        "grid"?: { "nu"?: int, "nv"?: int, "s_samples"?: int },
                        "tolerances"?: { check-name: number, ... },
                        "geodesic"?: geodesic }
    corr           := catalog-corr | pair
    catalog-corr   := { "id": correspondence-id, "params"?: object,
                        "domain"?: rect, "mode"?: "analytic" | "fd" }
    pair           := { "source": patch, "target": patch,
                        "domain"?: rect, "mode"?: "analytic" | "fd" }
    patch          := { "surface": surface-id, "params"?: object, "domain"?: rect }
    rect           := [umin, umax, vmin, vmax]
    curve          := { "family": curve-id, "params"?: object, "s_range"?: [a, b] }
    geodesic       := { "start"?: [u, v], "direction"?: [du, dv],
                        "length"?: number, "step"?: number }

Without an explicit shared ``domain`` the two patches of a pair must have
the same (given or default) domain.  Defaults: a 5 × 5 grid, 50 curve
samples, tolerance 1e-6 in analytic mode and 1e-4 in fd mode (1e-5 for
geodesic-invariance), geodesics from the domain centre in direction
(1, 0.7), length 2, step 1e-3.

The canonical text of a scenario is ``json.dumps(..., sort_keys=True,
indent=2)`` of the fully defaulted object plus a newline, so loading and
dumping a canonical file reproduces it byte for byte.
"""
from __future__ import annotations

import difflib
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import catalog
from ._trace import recording
from .conformal import (classify_map, conformal_christoffel_check, geodesic_curvature_relation,
                        metric_derivative_relations, normal_component_relation,
                        osculating_image_condition, tangential_component_relation)
from .curves import (binormal_expansion_check, curve_jet, ensure_unit_speed, geodesic_curvature_def,
                     geodesic_curvature_intrinsic, is_asymptotic, is_osculating)
from .errors import GeometryError, ScenarioError
from .geodesics import (IntegratorConfig, conformal_geodesic_residual, covariant_derivative_defect,
                        geodesic_residual, homothety_invariance_check, tangent_field, unit_state)
from .surfaces import Rect, dot_product_identities, eval_jet, metric_jet

CHECKS = (
    "conformality", "christoffel", "metric-derivatives", "tangential", "normal-component",
    "geodesic-curvature", "osculating-image", "geodesic-invariance",
    "conformal-geodesic-equivalence",
    # structural self-checks on the source surface
    "dot-products", "binormal-expansion", "geodesic-curvature-equivalence", "parallel-defect",
)
GRID_CHECKS = {"conformality", "christoffel", "metric-derivatives", "dot-products"}
CURVE_CHECKS = {"tangential", "normal-component", "geodesic-curvature", "osculating-image",
                "conformal-geodesic-equivalence", "binormal-expansion",
                "geodesic-curvature-equivalence", "parallel-defect"}

TOL_ANALYTIC = 1e-6
TOL_FD = 1e-4
TOL_GEODESIC = 1e-5
WORKERS_ENV = "CONFGEOM_WORKERS"

_TOP_KEYS = ("name", "correspondence", "curves", "checks", "grid", "tolerances", "geodesic")
_CORR_KEYS = ("id", "params", "domain", "mode")
_PAIR_KEYS = ("source", "target", "domain", "mode")
_PATCH_KEYS = ("surface", "params", "domain")
_CURVE_KEYS = ("family", "params", "s_range")
_GRID_KEYS = ("nu", "nv", "s_samples")
_GEO_KEYS = ("start", "direction", "length", "step")


@dataclass
class Scenario:
    name: str
    correspondence: dict
    curves: list
    checks: list
    grid: dict
    tolerances: dict
    geodesic: dict

    def to_dict(self):
        return {"name": self.name, "correspondence": self.correspondence, "curves": self.curves,
                "checks": self.checks, "grid": self.grid, "tolerances": self.tolerances,
                "geodesic": self.geodesic}

    def dumps(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    @property
    def mode(self):
        return self.correspondence["mode"]

    def tolerance(self, check):
        if check in self.tolerances:
            return float(self.tolerances[check])
        if check == "geodesic-invariance":
            return TOL_GEODESIC
        return TOL_ANALYTIC if self.mode == "analytic" else TOL_FD


# Loading -----------------------------------------------------------------

def _locate(text, needle):
    i = text.find(needle) if text else -1
    if i < 0:
        return None, None
    line = text.count("\n", 0, i) + 1
    return line, i - (text.rfind("\n", 0, i) + 1) + 1


def _nearest(word, options):
    close = difflib.get_close_matches(word, options, n=1, cutoff=0.5)
    return f"; did you mean {close[0]!r}?" if close else ""


class _Validator:
    def __init__(self, text):
        self.text = text

    def fail(self, kind, message, token=None):
        line, col = _locate(self.text, json.dumps(token)) if token is not None else (None, None)
        raise ScenarioError(kind, message, line, col)

    def obj(self, value, keys, where, required=()):
        if not isinstance(value, dict):
            self.fail("invalid-value", f"{where} must be an object")
        for k in value:
            if k not in keys:
                self.fail("unknown-key", f"unknown key {k!r} in {where}{_nearest(k, keys)}", k)
        for k in required:
            if k not in value:
                self.fail("invalid-value", f"{where} requires key {k!r}")
        return value

    def number(self, value, where, positive=False):
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            self.fail("invalid-value", f"{where} must be a finite number")
        if positive and value <= 0:
            self.fail("invalid-value", f"{where} must be positive")
        return float(value)

    def count(self, value, where, lo):
        if isinstance(value, bool) or not isinstance(value, int) or value < lo:
            self.fail("invalid-value", f"{where} must be an integer ≥ {lo}")
        return value

    def numbers(self, value, n, where):
        if not isinstance(value, list) or len(value) != n:
            self.fail("invalid-value", f"{where} must be a list of {n} numbers")
        return [self.number(x, where) for x in value]

    def rect(self, value, where):
        r = self.numbers(value, 4, where)
        try:
            Rect(*r)
        except ValueError as exc:
            self.fail("invalid-value", f"{where}: {exc}")
        return r


def _catalog_params(v, table, kind, ident, params, where):
    error_kind = {"surface": "unknown-surface-id", "curve": "unknown-curve-id",
                  "correspondence": "unknown-correspondence-id"}[kind]
    if not isinstance(ident, str) or ident not in table:
        v.fail(error_kind, f"unknown {kind} id {ident!r}{_nearest(str(ident), list(table))}", ident)
    params = {} if params is None else params
    if not isinstance(params, dict):
        v.fail("invalid-value", f"{where}.params must be an object")
    try:
        return catalog._resolve(table, kind, ident, params)
    except (KeyError, ValueError) as exc:
        v.fail("invalid-value", f"{where}: {exc}")


def _mode(v, value, where):
    if value not in ("analytic", "fd"):
        v.fail("invalid-value", f"{where}.mode must be 'analytic' or 'fd'", value)
    return value


def _correspondence(v, raw):
    if isinstance(raw, dict) and ("source" in raw or "target" in raw):
        v.obj(raw, _PAIR_KEYS, "correspondence", ("source", "target"))
        out = {"mode": _mode(v, raw.get("mode", "analytic"), "correspondence")}
        domains = []
        for side in ("source", "target"):
            p = v.obj(raw[side], _PATCH_KEYS, f"correspondence.{side}", ("surface",))
            params = _catalog_params(v, catalog.SURFACES, "surface", p["surface"], p.get("params"),
                                     f"correspondence.{side}")
            entry = {"surface": p["surface"], "params": params}
            if "domain" in p:
                entry["domain"] = v.rect(p["domain"], f"correspondence.{side}.domain")
                domains.append(entry["domain"])
            else:
                domains.append(catalog.SURFACES[p["surface"]][1].as_list())
            out[side] = entry
        if "domain" in raw:
            out["domain"] = v.rect(raw["domain"], "correspondence.domain")
        elif domains[0] != domains[1]:
            v.fail("domain-mismatch", f"source domain {domains[0]} differs from target domain {domains[1]}")
        else:
            out["domain"] = domains[0]
        for side in ("source", "target"):
            out[side].pop("domain", None)
        return out
    v.obj(raw, _CORR_KEYS, "correspondence", ("id",))
    params = _catalog_params(v, catalog.CORRESPONDENCES, "correspondence", raw["id"], raw.get("params"),
                             "correspondence")
    out = {"id": raw["id"], "params": params, "mode": _mode(v, raw.get("mode", "analytic"), "correspondence")}
    if "domain" in raw:
        out["domain"] = v.rect(raw["domain"], "correspondence.domain")
    return out


def load_scenario(text):
    """Parse and validate scenario text, filling every default."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError("parse-error", exc.msg, exc.lineno, exc.colno) from None
    v = _Validator(text)
    v.obj(raw, _TOP_KEYS, "scenario", ("name", "correspondence", "checks"))
    if not isinstance(raw["name"], str) or not raw["name"]:
        v.fail("invalid-value", "name must be a non-empty string")
    corr = _correspondence(v, raw["correspondence"])

    checks = raw["checks"]
    if not isinstance(checks, list) or not checks:
        v.fail("invalid-value", "checks must be a non-empty list")
    for c in checks:
        if c not in CHECKS:
            v.fail("unknown-check", f"unknown check {c!r}{_nearest(str(c), CHECKS)}", c)
    if len(set(checks)) != len(checks):
        v.fail("invalid-value", "checks must not repeat")

    curves = []
    raw_curves = raw.get("curves", [])
    if not isinstance(raw_curves, list):
        v.fail("invalid-value", "curves must be a list")
    for i, c in enumerate(raw_curves):
        v.obj(c, _CURVE_KEYS, f"curves[{i}]", ("family",))
        entry = {"family": c["family"],
                 "params": _catalog_params(v, catalog.CURVES, "curve", c["family"], c.get("params"),
                                           f"curves[{i}]")}
        if "s_range" in c:
            a, b = v.numbers(c["s_range"], 2, f"curves[{i}].s_range")
            if not a < b:
                v.fail("invalid-value", f"curves[{i}].s_range must be increasing")
            entry["s_range"] = [a, b]
        curves.append(entry)

    g = v.obj(raw.get("grid", {}), _GRID_KEYS, "grid")
    grid = {"nu": v.count(g.get("nu", 5), "grid.nu", 1), "nv": v.count(g.get("nv", 5), "grid.nv", 1),
            "s_samples": v.count(g.get("s_samples", 50), "grid.s_samples", 1)}

    t = v.obj(raw.get("tolerances", {}), CHECKS, "tolerances")
    tolerances = {k: v.number(x, f"tolerances.{k}", positive=True) for k, x in t.items()}

    geo = v.obj(raw.get("geodesic", {}), _GEO_KEYS, "geodesic")
    geodesic = {"direction": v.numbers(geo.get("direction", [1.0, 0.7]), 2, "geodesic.direction"),
                "length": v.number(geo.get("length", 2.0), "geodesic.length", positive=True),
                "step": v.number(geo.get("step", 1e-3), "geodesic.step", positive=True)}
    if "start" in geo:
        geodesic["start"] = v.numbers(geo["start"], 2, "geodesic.start")
    return Scenario(raw["name"], corr, curves, list(checks), grid, tolerances, geodesic)


def dump_scenario(scenario):
    return scenario.dumps()


def build_correspondence(scenario):
    c = scenario.correspondence
    if "id" in c:
        return catalog.make_correspondence(c["id"], c["params"], c.get("domain"), c["mode"])
    return catalog.custom_correspondence((c["source"]["surface"], c["source"]["params"]),
                                         (c["target"]["surface"], c["target"]["params"]),
                                         c["domain"], c["mode"])


# Running -----------------------------------------------------------------

@dataclass
class ReportEntry:
    scenario: str
    check: str
    target: str  # curve label, "grid" or "geodesic"
    residual: Optional[float]
    tolerance: float
    verdict: str  # pass | fail | skipped
    reason: Optional[str]
    samples: int
    skipped_samples: int = 0
    wall_time: float = 0.0
    details: dict = field(default_factory=dict)
    points: list = field(default_factory=list)  # per-sample rows {"s" or "u","v", residual columns}

    def to_dict(self, timings=False, points=False):
        d = {"scenario": self.scenario, "check": self.check, "target": self.target,
             "residual": _clean(self.residual), "tolerance": self.tolerance, "verdict": self.verdict,
             "reason": self.reason, "samples": self.samples, "skipped_samples": self.skipped_samples,
             "details": {k: _clean(x) for k, x in sorted(self.details.items())}}
        if timings:
            d["wall_time"] = self.wall_time
        if points:
            d["points"] = [{k: _clean(x) for k, x in row.items()} for row in self.points]
        return d


def _clean(x):
    if isinstance(x, np.generic):
        x = x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


class _Collector:
    """Worst residual over samples, remembering why samples were skipped."""

    def __init__(self):
        self.worst = 0.0
        self.count = 0
        self.reasons = []
        self.points = []
        self.extra = {}

    def add(self, key, residual, **columns):
        residual = float(residual)
        self.worst = max(self.worst, residual) if math.isfinite(residual) else math.inf
        self.count += 1
        self.points.append({**key, "residual": residual, **{k: float(x) for k, x in columns.items()}})

    def run(self, key, fn):
        try:
            fn()
        except GeometryError as exc:
            self.reasons.append(exc.reason)

    def top(self, name, value):
        value = float(value)
        self.extra[name] = max(self.extra.get(name, -math.inf), value)

    def low(self, name, value):
        value = float(value)
        self.extra[name] = min(self.extra.get(name, math.inf), value)


def _finish(sc, check, target, col, details=None):
    tol = sc.tolerance(check)
    details = {**col.extra, **(details or {})}
    if col.count == 0:
        reason = col.reasons[0] if col.reasons else "no-samples"
        return ReportEntry(sc.name, check, target, None, tol, "skipped", reason, 0,
                           len(col.reasons), details=details)
    verdict = "pass" if col.worst < tol else "fail"
    return ReportEntry(sc.name, check, target, col.worst, tol, verdict, None, col.count,
                       len(col.reasons), details=details, points=col.points)


def _grid_check(sc, corr, check):
    grid = corr.domain.grid(sc.grid["nu"], sc.grid["nv"])
    col = _Collector()
    if check == "conformality":
        try:
            cls = classify_map(corr, grid)
        except GeometryError as exc:
            col.reasons.append(exc.reason)
            return _finish(sc, check, "grid", col)
        col.add({"u": math.nan, "v": math.nan}, cls.max_residual)
        col.points.clear()
        return _finish(sc, check, "grid", col, {"class": cls.label(), "delta_min": cls.delta_min,
                                                "delta_max": cls.delta_max})
    for p in grid:
        key = {"u": p[0], "v": p[1]}
        if check == "christoffel":
            col.run(key, lambda: col.add(key, conformal_christoffel_check(corr, p)))
        elif check == "metric-derivatives":
            col.run(key, lambda: col.add(key, np.max(metric_derivative_relations(corr, p))))
        elif check == "dot-products":
            def one():
                jet = eval_jet(corr.source, p)
                col.add(key, np.max(dot_product_identities(jet, metric_jet(corr.source, p, jet))))
            col.run(key, one)
    return _finish(sc, check, "grid", col)


def _curve_check(sc, corr, check, curve):
    col = _Collector()
    details = {}
    n = sc.grid["s_samples"]
    src = corr.source
    for s in curve.samples(n):
        key = {"s": float(s)}
        if check == "tangential":
            def one():
                r1 = tangential_component_relation(corr, curve, s, 1.0, 0.0)
                r2 = tangential_component_relation(corr, curve, s, 0.0, 1.0)
                col.add(key, max(r1.residual, r2.residual), h_u=r1.h, h_v=r2.h)
                col.top("max_abs_h", max(abs(r1.h), abs(r2.h)))
        elif check == "normal-component":
            def one():
                r = normal_component_relation(corr, curve, s)
                col.add(key, r.residual, lhs=r.lhs, rhs=r.rhs, lhs_actual=r.lhs_actual)
                col.top("max_abs_lhs", abs(r.lhs))
                col.top("max_abs_lhs_actual", abs(r.lhs_actual))
        elif check == "geodesic-curvature":
            def one():
                r = geodesic_curvature_relation(corr, curve, s)
                col.add(key, r.residual_derived, residual_literal=r.residual_literal,
                        kappa_g=r.kappa_g, kappa_g_image_formal=r.kappa_g_image_formal)
                col.top("max_residual_literal", r.residual_literal)
        elif check == "osculating-image":
            def one():
                r = osculating_image_condition(corr, curve, s)
                held = r.residual < sc.tolerance(check)
                # violation: condition satisfied but the image is not osculating
                col.add(key, r.image_beta if held else 0.0, condition=r.residual, image_beta=r.image_beta)
                col.top("max_image_beta", r.image_beta)
                col.low("min_condition_residual", r.residual)
        elif check == "conformal-geodesic-equivalence":
            def one():
                r = conformal_geodesic_residual(corr, curve, s)
                t1, t2 = geodesic_residual(corr.target, curve, s)
                col.add(key, r.discrepancy, r1=r.r1, r2=r.r2)
                col.top("target_crosscheck", max(abs(t1 - r.target_r1), abs(t2 - r.target_r2)))
        elif check == "binormal-expansion":
            def one():
                col.add(key, binormal_expansion_check(curve_jet(curve, s)))
        elif check == "geodesic-curvature-equivalence":
            def one():
                jet = curve_jet(curve, s)
                a, b = geodesic_curvature_def(jet), geodesic_curvature_intrinsic(jet)
                col.add(key, abs(a - b), kappa_g=a)
        elif check == "parallel-defect":
            def one():
                jet = curve_jet(curve, s)
                d = covariant_derivative_defect(src, curve, tangent_field(curve), s)
                col.add(key, abs(d - abs(geodesic_curvature_def(jet))), defect=d)
        col.run(key, one)
    if check == "osculating-image":
        details["source_osculating"] = is_osculating(curve, 1e-9, n).holds
    elif check == "normal-component":
        try:
            details["source_asymptotic"] = is_asymptotic(curve, 1e-9, n).holds
        except GeometryError as exc:
            details["source_asymptotic"] = exc.reason
    return _finish(sc, check, curve.name, col, details)


def _geodesic_check(sc, corr, check):
    col = _Collector()
    g = sc.geodesic
    dom = corr.domain
    start = g.get("start", [(dom.umin + dom.umax) / 2, (dom.vmin + dom.vmax) / 2])
    try:
        initial = unit_state(corr.source, start, g["direction"])
        res = homothety_invariance_check(corr, initial, g["length"], IntegratorConfig(step=g["step"]),
                                         dom.grid(sc.grid["nu"], sc.grid["nv"]))
    except GeometryError as exc:
        col.reasons.append(exc.reason)
        return _finish(sc, check, "geodesic", col)
    col.add({"s": g["length"]}, res.max_residual)
    col.points.clear()
    return _finish(sc, check, "geodesic", col, {"class": res.map_class.label(),
                                                "termination": res.path.termination,
                                                "length": res.path.length})


def _curves(sc, corr):
    out = []
    for c in sc.curves:
        curve = catalog.make_curve(corr.source, c["family"], c["params"], c.get("s_range"))
        out.append(ensure_unit_speed(curve))
    return out


def _workers():
    try:
        n = int(os.environ.get(WORKERS_ENV, "0"))
    except ValueError:
        n = 0
    return n if n > 0 else min(4, os.cpu_count() or 1)


def _timed(fn, *args):
    t0 = time.perf_counter()
    entry = fn(*args)
    entry.wall_time = time.perf_counter() - t0
    return entry


def run_scenario(scenario, workers=None):
    """One entry per grid check and per (curve check × curve), in scenario order."""
    try:
        corr = build_correspondence(scenario)
        curves = _curves(scenario, corr)
    except (GeometryError, ValueError) as exc:
        reason = getattr(exc, "reason", "setup-error")
        return [ReportEntry(scenario.name, c, "-", None, scenario.tolerance(c), "skipped", reason, 0,
                            details={"message": str(exc)}) for c in scenario.checks]
    tasks = []
    for check in scenario.checks:
        if check in GRID_CHECKS:
            tasks.append((_grid_check, scenario, corr, check))
        elif check == "geodesic-invariance":
            tasks.append((_geodesic_check, scenario, corr, check))
        elif not curves:
            tasks.append(None)
        else:
            tasks.extend((_curve_check, scenario, corr, check, c) for c in curves)
    workers = workers or _workers()
    real = [t for t in tasks if t is not None]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_timed, *t) for t in real]
        done = iter([f.result() for f in futures])
    entries, checks_without_curves = [], iter(c for c in scenario.checks if c in CURVE_CHECKS)
    for t in tasks:
        if t is None:
            check = next(checks_without_curves)
            entries.append(ReportEntry(scenario.name, check, "-", None, scenario.tolerance(check),
                                       "skipped", "no-curves", 0))
        else:
            entries.append(next(done))
    return entries


def run_with_coverage(scenarios, workers=None):
    """Run several scenarios; return (entries, names of operations dispatched)."""
    entries = []
    with recording() as ops:
        for sc in scenarios:
            entries.extend(run_scenario(sc, workers))
    return entries, sorted(ops)


def shipped_scenarios():
    from importlib import resources
    root = resources.files("confgeom") / "scenarios"
    return sorted((p for p in root.iterdir() if p.name.endswith(".json")), key=lambda p: p.name)
