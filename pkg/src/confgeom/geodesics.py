"""Geodesic equations, fixed-step RK4 integration and conformal comparisons."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ._trace import traced
from .conformal import (CONFORMAL_TOL, christoffel_correction, classify_map, dilation_field)
from .curves import curve_jet
from .errors import DomainError, GeometryError, NonUnitSpeedError, WrongMapClassError
from .surfaces import christoffel, metric_jet

SPEED_TOL = 1e-6


class GeodesicState(NamedTuple):
    u: float
    v: float
    du: float
    dv: float


@dataclass(frozen=True)
class IntegratorConfig:
    step: float = 1e-3
    max_steps: int = 1_000_000

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError("step must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")


@dataclass
class GeodesicPath:
    s: np.ndarray
    states: np.ndarray  # rows (u, v, u', v')
    length: float
    termination: str  # length-reached | domain-exit | step-failure
    message: str = ""

    def __len__(self):
        return len(self.s)


class ConformalGeodesicTerms(NamedTuple):
    f1: float
    f2: float


class InvarianceResult(NamedTuple):
    max_residual: float
    path: GeodesicPath
    map_class: object


class ConformalGeodesicResidual(NamedTuple):
    r1: float
    r2: float
    target_r1: float
    target_r2: float
    discrepancy: float


def metric_speed2(mj, du, dv):
    return mj.E * du * du + 2.0 * mj.F * du * dv + mj.G * dv * dv


def unit_state(patch, point, direction):
    """Initial state at ``point`` with ``direction`` scaled to metric unit speed."""
    mj = metric_jet(patch, point)
    du, dv = float(direction[0]), float(direction[1])
    norm = math.sqrt(metric_speed2(mj, du, dv))
    if norm == 0.0:
        raise NonUnitSpeedError("zero initial direction")
    return GeodesicState(float(point[0]), float(point[1]), du / norm, dv / norm)


def _gamma_at(patch, u, v):
    return christoffel(metric_jet(patch, (u, v)))


@traced
def geodesic_rhs(gamma, state):
    """(u'', v'') from the geodesic equations."""
    q1, q2 = gamma.contract(state[2], state[3])
    return -q1, -q2


def _deriv(patch, y):
    a, b = geodesic_rhs(_gamma_at(patch, y[0], y[1]), y)
    return np.array([y[2], y[3], a, b])


@traced
def integrate_geodesic(patch, initial, length, config=IntegratorConfig()):
    """Classical RK4 in arc length; the last step is shortened to land on ``length``."""
    y = np.array(initial, dtype=float)
    mj = metric_jet(patch, (y[0], y[1]))
    sp2 = metric_speed2(mj, y[2], y[3])
    if abs(sp2 - 1.0) > SPEED_TOL:
        raise NonUnitSpeedError(f"initial metric speed² {sp2:.9g} is not 1")
    n_full = int(math.floor(length / config.step + 1e-9))
    steps = [config.step] * n_full
    rest = length - n_full * config.step
    if rest > 1e-12 * max(1.0, length):
        steps.append(rest)
    s_vals, rows = [0.0], [y.copy()]
    s = 0.0
    reason, message = "length-reached", ""
    if len(steps) > config.max_steps:
        steps = steps[:config.max_steps]
        reason, message = "step-failure", f"step budget {config.max_steps} exhausted"
    for h in steps:
        try:
            k1 = _deriv(patch, y)
            k2 = _deriv(patch, y + 0.5 * h * k1)
            k3 = _deriv(patch, y + 0.5 * h * k2)
            k4 = _deriv(patch, y + h * k3)
        except DomainError as exc:
            reason, message = "domain-exit", str(exc)
            break
        except GeometryError as exc:
            reason, message = "step-failure", str(exc)
            break
        y_new = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(y_new)):
            reason, message = "step-failure", "non-finite state"
            break
        if not patch.domain.contains(y_new[0], y_new[1]):
            reason, message = "domain-exit", f"left the chart at s = {s + h:.6g}"
            break
        y = y_new
        s += h
        s_vals.append(s)
        rows.append(y.copy())
    return GeodesicPath(np.array(s_vals), np.array(rows), s, reason, message)


def path_residuals(patch, path):
    """Geodesic residuals along a path using central differences of (u', v')."""
    s, st = path.s, path.states
    if len(s) < 3:
        return np.zeros((len(s), 2))
    ddu = np.gradient(st[:, 2], s, edge_order=2)
    ddv = np.gradient(st[:, 3], s, edge_order=2)
    out = np.empty((len(s), 2))
    for i, (u, v, du, dv) in enumerate(st):
        q1, q2 = _gamma_at(patch, u, v).contract(du, dv)
        out[i] = ddu[i] + q1, ddv[i] + q2
    return out


@traced
def geodesic_residual(patch, curve, s):
    """Left-hand sides of the geodesic equations on the curve's jet."""
    jet = curve_jet(curve, s) if curve.patch is patch else curve_jet(curve.on(patch), s)
    gamma = christoffel(metric_jet(patch, jet.uv, jet.patch_jet))
    q1, q2 = gamma.contract(*jet.duv)
    return jet.d2uv[0] + q1, jet.d2uv[1] + q2


@traced
def covariant_derivative_defect(patch, curve, field, s):
    """Metric norm of DX/ds for X = a Φ_u + b Φ_v along ``curve``.

    ``field(s)`` returns (a, b, a', b').
    """
    jet = curve_jet(curve, s)
    mj = metric_jet(patch, jet.uv, jet.patch_jet)
    g = christoffel(mj)
    a, b, da, db = field(s)
    du, dv = jet.duv
    D1 = da + g.g111 * a * du + g.g112 * (a * dv + b * du) + g.g122 * b * dv
    D2 = db + g.g211 * a * du + g.g212 * (a * dv + b * du) + g.g222 * b * dv
    return math.sqrt(max(metric_speed2(mj, D1, D2), 0.0))


def tangent_field(curve):
    """The velocity field (u', v') of ``curve`` as a field for the defect."""
    def field(s):
        c = curve.coords(s)
        return c[1][0], c[1][1], c[2][0], c[2][1]
    return field


def ambient_covariant_defect(patch, curve, field, s):
    """Tangential part of d/ds(a Φ_u + b Φ_v), computed in R³."""
    jet = curve_jet(curve, s)
    pj = jet.patch_jet
    a, b, da, db = field(s)
    du, dv = jet.duv
    dX = (da * pj.ru + db * pj.rv
          + a * (pj.ruu * du + pj.ruv * dv) + b * (pj.ruv * du + pj.rvv * dv))
    n = np.cross(pj.ru, pj.rv)
    n /= np.linalg.norm(n)
    return float(np.linalg.norm(dX - (dX @ n) * n))


@traced
def conformal_geodesic_terms(mj, dilation, state):
    theta = christoffel_correction(mj, dilation)
    f1, f2 = theta.contract(state[2], state[3])
    return ConformalGeodesicTerms(f1, f2)


@traced
def conformal_geodesic_residual(corr, curve, s, tol=CONFORMAL_TOL):
    """Source-side corrected geodesic residuals versus the target's own."""
    jet = curve_jet(curve, s)
    src = metric_jet(corr.source, jet.uv, jet.patch_jet)
    tgt = metric_jet(corr.target, jet.uv)
    d = dilation_field(corr, jet.uv, tol, src, tgt)
    state = GeodesicState(jet.uv[0], jet.uv[1], jet.duv[0], jet.duv[1])
    q1, q2 = christoffel(src).contract(*jet.duv)
    f = conformal_geodesic_terms(src, d, state)
    r1 = jet.d2uv[0] + q1 + f.f1
    r2 = jet.d2uv[1] + q2 + f.f2
    t1, t2 = christoffel(tgt).contract(*jet.duv)
    t1 += jet.d2uv[0]
    t2 += jet.d2uv[1]
    return ConformalGeodesicResidual(r1, r2, t1, t2, max(abs(r1 - t1), abs(r2 - t2)))


@traced
def homothety_invariance_check(corr, initial, length, config=IntegratorConfig(), grid=None):
    """Integrate a source geodesic and return the worst target residual of its image.

    Only isometries and homotheties qualify; the target residual uses the
    source arc length, which differs from the target's by a constant factor.
    """
    grid = grid if grid is not None else corr.domain.grid(5, 5)
    cls = classify_map(corr, grid)
    if cls.tag not in ("isometry", "homothety"):
        raise WrongMapClassError(f"correspondence is {cls.label()}, not an isometry or homothety")
    path = integrate_geodesic(corr.source, initial, length, config)
    res = path_residuals(corr.target, path)
    return InvarianceResult(float(np.max(np.abs(res))), path, cls)
