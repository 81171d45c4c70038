"""Curves on surfaces: jets, Frenet apparatus, normal and geodesic curvature."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np
import sympy as sp
from scipy.interpolate import PchipInterpolator

from ._trace import traced
from .errors import DomainError, StationaryPointError, VanishingCurvatureError
from .surfaces import christoffel, eval_jet, metric_jet, second_form, surface_normal

KAPPA_MIN = 1e-8
DEFAULT_SAMPLES = 101
UNIT_SPEED_TOL = 1e-6
REGULAR_SPEED = 1e-10

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(10)


@dataclass(frozen=True)
class SurfaceCurve:
    """Parameter curve s ↦ (u(s), v(s)) on ``patch``.

    ``coords(s)`` returns rows (u, v), (u', v'), (u'', v'') and optionally
    (u''', v''').
    """

    patch: object
    coords: Callable[[float], np.ndarray]
    s_range: tuple
    unit_speed: bool = False
    name: str = "curve"

    def samples(self, n=DEFAULT_SAMPLES):
        a, b = self.s_range
        return np.linspace(a, b, n)

    def on(self, patch):
        """The same parameter curve carried by another patch (its image)."""
        return SurfaceCurve(patch, self.coords, self.s_range, False, self.name)


def expression_curve(patch, u_expr, v_expr, s_range, name="curve", unit_speed=False, s=None):
    """Curve from sympy expressions for u(s) and v(s)."""
    s = s if s is not None else sp.Symbol("s")
    rows = [[sp.diff(e, s, k) if k else e for e in (u_expr, v_expr)] for k in range(4)]
    fn = sp.lambdify(s, rows, modules="math", cse=True)

    def coords(t):
        return np.array(fn(float(t)), dtype=float)

    return SurfaceCurve(patch, coords, (float(s_range[0]), float(s_range[1])), unit_speed, name)


@dataclass
class CurveJet:
    s: float
    uv: np.ndarray
    duv: np.ndarray
    d2uv: np.ndarray
    d3uv: Optional[np.ndarray]
    sigma: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    d3: Optional[np.ndarray]
    patch_jet: object
    patch: object


class FrenetFrame(NamedTuple):
    t: np.ndarray
    n: np.ndarray
    b: np.ndarray
    kappa: float
    tau: Optional[float]


class OsculatingDecomposition(NamedTuple):
    xi: float
    mu: float
    beta: float


class CurvatureSample(NamedTuple):
    kappa_n: float
    kappa_g: float


class SampledVerdict(NamedTuple):
    holds: bool
    worst: float
    skipped: tuple


@traced
def curve_jet(curve, s):
    """Ambient derivatives of σ(s) = Φ(u(s), v(s)) by the chain rule."""
    a, b = curve.s_range
    span = abs(b - a)
    if not (a - 1e-12 * (1 + span) <= s <= b + 1e-12 * (1 + span)):
        raise DomainError(f"s = {s} outside curve range {curve.s_range}")
    c = curve.coords(s)
    (u, v), (du, dv), (ddu, ddv) = c[0], c[1], c[2]
    pj = eval_jet(curve.patch, (u, v))
    d1 = pj.ru * du + pj.rv * dv
    d2 = (ddu * pj.ru + ddv * pj.rv + du * du * pj.ruu
          + 2.0 * du * dv * pj.ruv + dv * dv * pj.rvv)
    d3 = None
    d3uv = None
    if len(c) > 3 and c[3] is not None and pj.third is not None and np.all(np.isfinite(c[3])):
        d3uv = c[3]
        d3u, d3v = d3uv
        ruuu, ruuv, ruvv, rvvv = pj.third
        d3 = (d3u * pj.ru + d3v * pj.rv
              + 3.0 * (du * ddu * pj.ruu + (ddu * dv + du * ddv) * pj.ruv + dv * ddv * pj.rvv)
              + du**3 * ruuu + 3.0 * du * du * dv * ruuv + 3.0 * du * dv * dv * ruvv + dv**3 * rvvv)
    return CurveJet(float(s), c[0], c[1], c[2], d3uv, pj.r, d1, d2, d3, pj, curve.patch)


def speed(curve, s):
    return float(np.linalg.norm(curve_jet(curve, s).d1))


@traced
def arclength_reparam(curve, n_samples=DEFAULT_SAMPLES):
    """Reparameterize ``curve`` by ambient arc length.

    The cumulative length is tabulated with 10-point Gauss–Legendre per
    segment, inverted with a monotone cubic and polished by Newton steps;
    derivatives follow from the chain rule with dt/ds = 1/|σ_t|.
    """
    a, b = curve.s_range
    ts = np.linspace(a, b, n_samples)
    for t in ts:
        if speed(curve, t) <= REGULAR_SPEED:
            raise StationaryPointError(f"|σ'| vanishes near t = {t:.6g} on {curve.name}")

    def seg_length(t0, t1):
        mid, half = 0.5 * (t0 + t1), 0.5 * (t1 - t0)
        return half * sum(w * speed(curve, mid + half * x) for x, w in zip(_GL_NODES, _GL_WEIGHTS))

    lengths = np.concatenate([[0.0], np.cumsum([seg_length(ts[i], ts[i + 1]) for i in range(len(ts) - 1)])])
    total = float(lengths[-1])
    guess = PchipInterpolator(lengths, ts)

    def param_of(S):
        t = float(np.clip(guess(S), a, b))
        for _ in range(4):
            k = min(max(int(np.searchsorted(ts, t, side="right")) - 1, 0), len(ts) - 2)
            err = lengths[k] + seg_length(ts[k], t) - S
            t_new = float(np.clip(t - err / speed(curve, t), a, b))
            if abs(t_new - t) < 1e-15 * (1 + abs(t)):
                t = t_new
                break
            t = t_new
        return t

    def coords(S):
        S = min(max(float(S), 0.0), total)
        t = param_of(S)
        j = curve_jet(curve, t)
        g = float(np.linalg.norm(j.d1))
        g1 = float(j.d1 @ j.d2) / g
        t1 = 1.0 / g
        t2 = -g1 / g**3
        c_uv = [j.uv, j.duv * t1, j.d2uv * t1**2 + j.duv * t2]
        if j.d3 is not None:
            g2 = (float(j.d2 @ j.d2) + float(j.d1 @ j.d3) - g1 * g1) / g
            t3 = (-g2 / g**3 + 3.0 * g1 * g1 / g**4) / g
            c_uv.append(j.d3uv * t1**3 + 3.0 * j.d2uv * t1 * t2 + j.duv * t3)
        else:
            c_uv.append(np.full(2, np.nan))
        return np.array(c_uv)

    return SurfaceCurve(curve.patch, coords, (0.0, total), True, curve.name)


def ensure_unit_speed(curve, n_samples=DEFAULT_SAMPLES, check_points=11):
    """Return ``curve`` unchanged if already unit speed, else its arc-length version."""
    if curve.unit_speed:
        return curve
    if all(abs(speed(curve, s) - 1.0) <= UNIT_SPEED_TOL for s in curve.samples(check_points)):
        return SurfaceCurve(curve.patch, curve.coords, curve.s_range, True, curve.name)
    return arclength_reparam(curve, n_samples)


@traced
def frenet(jet):
    """Frenet frame; the formulas hold for any regular parameterization."""
    c = np.cross(jet.d1, jet.d2)
    sp_ = float(np.linalg.norm(jet.d1))
    cn = float(np.linalg.norm(c))
    kappa = cn / sp_**3
    if kappa < KAPPA_MIN:
        raise VanishingCurvatureError(f"curvature {kappa:.3e} below {KAPPA_MIN:g} at s = {jet.s:.6g}")
    t = jet.d1 / sp_
    b = c / cn
    n = np.cross(b, t)
    tau = float(c @ jet.d3) / cn**2 if jet.d3 is not None else None
    return FrenetFrame(t, n, b, kappa, tau)


@traced
def binormal_expansion_check(jet):
    """|expanded σ' × σ'' − κ (t × n)| for a unit-speed jet.

    The expansion splits σ' × σ'' over the patch basis; its leading term is
    (u'v'' − u''v') Φ_u × Φ_v.
    """
    frame = frenet(jet)
    pj = jet.patch_jet
    du, dv = jet.duv
    ddu, ddv = jet.d2uv
    ru, rv = pj.ru, pj.rv
    expanded = ((du * ddv - ddu * dv) * np.cross(ru, rv)
                + du**3 * np.cross(ru, pj.ruu)
                + 2.0 * du * du * dv * np.cross(ru, pj.ruv)
                + du * dv * dv * np.cross(ru, pj.rvv)
                + du * du * dv * np.cross(rv, pj.ruu)
                + 2.0 * du * dv * dv * np.cross(rv, pj.ruv)
                + dv**3 * np.cross(rv, pj.rvv))
    return float(np.linalg.norm(expanded - frame.kappa * np.cross(frame.t, frame.n)))


@traced
def osculating_decompose(jet, frame=None):
    frame = frame if frame is not None else frenet(jet)
    s = jet.sigma
    return OsculatingDecomposition(float(s @ frame.t), float(s @ frame.n), float(s @ frame.b))


def _sampled(curve, n_samples, fn):
    worst, skipped = 0.0, []
    for s in curve.samples(n_samples):
        try:
            worst = max(worst, fn(curve_jet(curve, s)))
        except VanishingCurvatureError:
            skipped.append(float(s))
    return worst, tuple(skipped)


@traced
def is_osculating(curve, tolerance=1e-9, n_samples=DEFAULT_SAMPLES):
    """Whether σ·b vanishes (relative to 1 + |σ|) at every sample.

    ``worst`` is max |σ·b|; samples where the frame is undefined are skipped.
    """
    ok = [True]

    def probe(jet):
        beta = abs(osculating_decompose(jet).beta)
        if beta >= tolerance * (1.0 + np.linalg.norm(jet.sigma)):
            ok[0] = False
        return beta

    worst, skipped = _sampled(curve, n_samples, probe)
    return SampledVerdict(ok[0], worst, skipped)


def second_form_value(forms, du, dv):
    """II(x, x) for the parameter vector x = (du, dv); ``forms`` has L, M, N."""
    return du * du * forms.L + 2.0 * du * dv * forms.M + dv * dv * forms.N


@traced
def normal_curvature(jet, forms=None):
    """κ_n = L u'² + 2M u'v' + N v'² for a unit-speed jet."""
    forms = forms if forms is not None else second_form(jet.patch_jet)
    du, dv = jet.duv
    return second_form_value(forms, du, dv)


def normal_curvature_direct(jet):
    return float(jet.d2 @ surface_normal(jet.patch_jet))


@traced
def is_asymptotic(curve, tolerance=1e-9, n_samples=DEFAULT_SAMPLES):
    worst, _ = _sampled(curve, n_samples, lambda j: abs(normal_curvature(j)))
    return SampledVerdict(worst < tolerance, worst, ())


@traced
def geodesic_curvature_def(jet, normal=None):
    """κ_g = σ'' · (N × σ') for a unit-speed jet."""
    N = normal if normal is not None else surface_normal(jet.patch_jet)
    return float(jet.d2 @ np.cross(N, jet.d1))


def geodesic_curvature_bracket(gamma, duv, d2uv):
    """The Christoffel polynomial multiplying √(EG − F²) in the intrinsic κ_g."""
    du, dv = duv
    ddu, ddv = d2uv
    return (gamma.g211 * du**3 + (2.0 * gamma.g212 - gamma.g111) * du * du * dv
            + (gamma.g222 - 2.0 * gamma.g112) * du * dv * dv - gamma.g122 * dv**3
            + du * ddv - ddu * dv)


@traced
def geodesic_curvature_intrinsic(jet, mj=None, gamma=None):
    """κ_g from the metric alone, for a unit-speed jet."""
    mj = mj if mj is not None else metric_jet(jet.patch, jet.uv, jet.patch_jet)
    gamma = gamma if gamma is not None else christoffel(mj)
    return geodesic_curvature_bracket(gamma, jet.duv, jet.d2uv) * mj.W


def curvature_sample(jet):
    return CurvatureSample(normal_curvature(jet), geodesic_curvature_def(jet))


def geodesic_curvature_any_speed(jet):
    """Geodesic curvature of a regular but not necessarily unit-speed jet."""
    N = surface_normal(jet.patch_jet)
    return float(jet.d2 @ np.cross(N, jet.d1)) / float(np.linalg.norm(jet.d1)) ** 3
