"""Conformal correspondences between two patches over one parameter domain.

The map is implicit: the point Φ(u, v) of the source corresponds to Φ̃(u, v)
of the target.  A parameter curve therefore has an image curve with the
same (u(s), v(s)), and every relation below is evaluated in these shared
coordinates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from ._trace import traced
from .curves import (curve_jet, frenet, geodesic_curvature_any_speed,
                     geodesic_curvature_bracket, geodesic_curvature_intrinsic,
                     normal_curvature, osculating_decompose, second_form_value)
from .errors import (DegenerateMetricError, NonConformalError, NotOsculatingError,
                     VanishingCurvatureError)
from .surfaces import (_check_metric, christoffel, eval_jet, metric_jet, second_form,
                       surface_normal)

CONFORMAL_TOL = 1e-4
CLASS_TOL = 1e-7
DELTA_STEP = 1e-4
OSCULATING_TOL = 1e-8


@dataclass(frozen=True)
class SurfaceCorrespondence:
    source: object
    target: object
    declared: Optional[str] = None
    name: str = "correspondence"

    def __post_init__(self):
        if self.source.domain != self.target.domain:
            raise ValueError(f"source domain {self.source.domain} differs from target domain {self.target.domain}")

    @property
    def domain(self):
        return self.source.domain

    def compose(self, other):
        """Correspondence source → other.target, given self.target ≡ other.source."""
        return SurfaceCorrespondence(self.source, other.target, None, f"{self.name}+{other.name}")


class DilationField(NamedTuple):
    delta: float
    delta_u: float
    delta_v: float
    residual: float


class MapClass(NamedTuple):
    tag: str  # isometry | homothety | conformal | non-conformal
    c: Optional[float]
    max_residual: float
    delta_min: float
    delta_max: float

    def label(self):
        if self.tag == "homothety":
            return f"homothety({self.c:.12g})"
        return self.tag


class ChristoffelCorrection(NamedTuple):
    """Additive change of each Christoffel symbol under the conformal rescaling."""

    g111: float
    g211: float
    g112: float
    g212: float
    g122: float
    g222: float

    def contract(self, du, dv):
        return (self.g111 * du * du + 2.0 * self.g112 * du * dv + self.g122 * dv * dv,
                self.g211 * du * du + 2.0 * self.g212 * du * dv + self.g222 * dv * dv)


class OsculatingImage(NamedTuple):
    residual: float
    image_beta: float
    source_beta: float


class NormalComponent(NamedTuple):
    lhs: float
    rhs: float
    residual: float
    lhs_actual: float
    mu: float
    kappa: float
    kappa_n: float
    kappa_n_image: float
    kappa_n_image_true: float
    mu_zero: bool
    asymptotic: bool
    normal_curvature_invariant: bool


class TangentialComponent(NamedTuple):
    lhs: float
    h: float
    residual: float
    lhs_actual: float


class GeodesicCurvatureRelation(NamedTuple):
    kappa_g_image_formal: float
    kappa_g: float
    correction: float
    f_literal: float
    residual_derived: float
    residual_literal: float
    kappa_g_image_true: float
    delta: float


def _delta_only(corr, point):
    E = _coeff_E(eval_jet(corr.source, point))
    Et = _coeff_E(eval_jet(corr.target, point))
    return math.sqrt(Et / E)


def _coeff_E(jet):
    return float(jet.ru @ jet.ru)


@traced
def dilation_field(corr, point, tol=CONFORMAL_TOL, src=None, tgt=None):
    """δ = √(Ẽ/E) and its partials; raises if F̃, G̃ disagree with δ²F, δ²G."""
    src = src if src is not None else metric_jet(corr.source, point)
    tgt = tgt if tgt is not None else metric_jet(corr.target, point)
    delta2 = tgt.E / src.E
    delta = math.sqrt(delta2)
    scale = max(abs(tgt.E), abs(tgt.G))
    residual = max(abs(tgt.F - delta2 * src.F), abs(tgt.G - delta2 * src.G)) / scale
    if residual > tol:
        raise NonConformalError(f"conformality residual {residual:.3e} > {tol:g} at {tuple(point)}")
    if corr.source.mode == "analytic" and corr.target.mode == "analytic":
        du = (tgt.Eu - delta2 * src.Eu) / (2.0 * delta * src.E)
        dv = (tgt.Ev - delta2 * src.Ev) / (2.0 * delta * src.E)
    else:
        u, v = point
        h = DELTA_STEP
        du = (_delta_only(corr, (u + h, v)) - _delta_only(corr, (u - h, v))) / (2 * h)
        dv = (_delta_only(corr, (u, v + h)) - _delta_only(corr, (u, v - h))) / (2 * h)
    return DilationField(delta, du, dv, residual)


@traced
def classify_map(corr, grid, tol=CONFORMAL_TOL, class_tol=CLASS_TOL):
    deltas, worst = [], 0.0
    for p in grid:
        try:
            d = dilation_field(corr, p, tol)
        except NonConformalError:
            src, tgt = metric_jet(corr.source, p), metric_jet(corr.target, p)
            d2 = tgt.E / src.E
            r = max(abs(tgt.F - d2 * src.F), abs(tgt.G - d2 * src.G)) / max(tgt.E, tgt.G)
            return MapClass("non-conformal", None, max(worst, r), math.nan, math.nan)
        deltas.append(d.delta)
        worst = max(worst, d.residual)
    deltas = np.array(deltas)
    lo, hi = float(deltas.min()), float(deltas.max())
    if np.max(np.abs(deltas - 1.0)) < class_tol:
        return MapClass("isometry", 1.0, worst, lo, hi)
    c = float(np.median(deltas))
    if np.max(np.abs(deltas - c)) < class_tol:
        return MapClass("homothety", c, worst, lo, hi)
    return MapClass("conformal", None, worst, lo, hi)


@traced
def metric_derivative_relations(corr, point, tol=CONFORMAL_TOL):
    src = metric_jet(corr.source, point)
    tgt = metric_jet(corr.target, point)
    d = dilation_field(corr, point, tol, src, tgt)
    δ, δu, δv = d.delta, d.delta_u, d.delta_v
    pairs = ((tgt.Eu, src.E, src.Eu, δu), (tgt.Ev, src.E, src.Ev, δv),
             (tgt.Fu, src.F, src.Fu, δu), (tgt.Fv, src.F, src.Fv, δv),
             (tgt.Gu, src.G, src.Gu, δu), (tgt.Gv, src.G, src.Gv, δv))
    return np.array([abs(t - (2.0 * δ * dd * c + δ * δ * cd)) for t, c, cd, dd in pairs])


@traced
def christoffel_correction(mj, dilation):
    E, F, G = mj.E, mj.F, mj.G
    W2 = _check_metric(E, F, G)
    δ, du, dv = dilation.delta, dilation.delta_u, dilation.delta_v
    if δ <= 0:
        raise DegenerateMetricError("dilation must be positive")
    k = δ * W2
    return ChristoffelCorrection(
        g111=(E * G * du - 2.0 * F * F * du + F * E * dv) / k,
        g211=(E * F * du - E * E * dv) / k,
        g112=(E * G * dv - F * G * du) / k,
        g212=(E * G * du - F * E * dv) / k,
        g122=(G * F * dv - G * G * du) / k,
        g222=(E * G * dv - 2.0 * F * F * dv + F * G * du) / k,
    )


def corrected_christoffel(corr, point, tol=CONFORMAL_TOL):
    """(Γ from the source, ϑ, Γ̃ computed directly on the target)."""
    src = metric_jet(corr.source, point)
    tgt = metric_jet(corr.target, point)
    d = dilation_field(corr, point, tol, src, tgt)
    return christoffel(src), christoffel_correction(src, d), christoffel(tgt)


@traced
def conformal_christoffel_check(corr, point, tol=CONFORMAL_TOL):
    gamma, theta, direct = corrected_christoffel(corr, point, tol)
    return float(max(abs(direct[i] - (gamma[i] + theta[i])) for i in range(6)))


@traced
def pushforward_extend(corr, point, vector, src_jet=None, tgt_jet=None, delta=None):
    """Extend the rescaled differential to all of R³ via the basis {Φ_u, Φ_v, N}.

    Φ_u ↦ Φ̃_u/δ, Φ_v ↦ Φ̃_v/δ, N ↦ Ñ.
    """
    sj = src_jet if src_jet is not None else eval_jet(corr.source, point)
    tj = tgt_jet if tgt_jet is not None else eval_jet(corr.target, point)
    if delta is None:
        delta = math.sqrt(_coeff_E(tj) / _coeff_E(sj))
    basis = np.column_stack([sj.ru, sj.rv, surface_normal(sj)])
    a, b, c = np.linalg.solve(basis, np.asarray(vector, dtype=float))
    return (a * tj.ru + b * tj.rv) / delta + c * surface_normal(tj)


def _paired_jets(corr, curve, s):
    sj = curve_jet(curve, s)
    tj = curve_jet(curve.on(corr.target), s)
    return sj, tj


def _osculating_source(sj):
    """Frenet frame and decomposition, requiring σ·b ≈ 0 on the source."""
    frame = frenet(sj)
    dec = osculating_decompose(sj, frame)
    if abs(dec.beta) > OSCULATING_TOL * (1.0 + float(np.linalg.norm(sj.sigma))):
        raise NotOsculatingError(f"source curve has σ·b = {dec.beta:.3e} at s = {sj.s:.6g}")
    return frame, dec


def _convention_image(sj, tj, dec, frame):
    """Image position assembled as ξ σ̃_s + (μ/κ) σ̃_ss in source arc length."""
    return dec.xi * tj.d1 + (dec.mu / frame.kappa) * tj.d2


@traced
def osculating_image_condition(corr, curve, s, tol=CONFORMAL_TOL):
    """Residual of the sufficient condition for the image to stay osculating.

    LHS = σ̃ − δ G*(σ); RHS = (μ/κ) Σ x^i x^j (Φ̃_ij − δ G*(Φ_ij)).  Also
    returns |σ̃ · b̃| of the actual image for comparison.
    """
    sj, tj = _paired_jets(corr, curve, s)
    frame, dec = _osculating_source(sj)
    d = dilation_field(corr, sj.uv, tol)
    δ = d.delta
    sp_, tp_ = sj.patch_jet, tj.patch_jet

    def G(x):
        return pushforward_extend(corr, sj.uv, x, sp_, tp_, δ)

    du, dv = sj.duv
    lhs = tj.sigma - δ * G(sj.sigma)
    rhs = (dec.mu / frame.kappa) * (
        du * du * (tp_.ruu - δ * G(sp_.ruu))
        + 2.0 * du * dv * (tp_.ruv - δ * G(sp_.ruv))
        + dv * dv * (tp_.rvv - δ * G(sp_.rvv)))
    try:
        image_beta = abs(float(tj.sigma @ frenet(tj).b))
    except VanishingCurvatureError:
        image_beta = math.nan
    return OsculatingImage(float(np.linalg.norm(lhs - rhs)), image_beta, abs(dec.beta))


@traced
def normal_component_relation(corr, curve, s, tol=CONFORMAL_TOL, verdict_tol=1e-6):
    sj, tj = _paired_jets(corr, curve, s)
    frame, dec = _osculating_source(sj)
    d = dilation_field(corr, sj.uv, tol)
    δ2 = d.delta**2
    N = surface_normal(sj.patch_jet)
    Nt = surface_normal(tj.patch_jet)
    kn = normal_curvature(sj)
    du, dv = sj.duv
    kn_img = second_form_value(second_form(tj.patch_jet), du, dv)
    kn_img_true = kn_img / float(tj.d1 @ tj.d1)
    image = _convention_image(sj, tj, dec, frame)
    lhs = float(image @ Nt) - δ2 * float(sj.sigma @ N)
    lhs_actual = float(tj.sigma @ Nt) - δ2 * float(sj.sigma @ N)
    rhs = dec.mu * (kn_img - δ2 * kn) / frame.kappa
    return NormalComponent(
        lhs, rhs, abs(lhs - rhs), lhs_actual, dec.mu, frame.kappa, kn, kn_img, kn_img_true,
        mu_zero=abs(dec.mu) < verdict_tol,
        asymptotic=abs(kn) < verdict_tol and abs(kn_img) < verdict_tol,
        normal_curvature_invariant=abs(kn_img - δ2 * kn) < verdict_tol,
    )


def tangential_defect(E, F, G, dilation, duv, mu, kappa, a, b):
    """The closed-form change h of the tangential component."""
    δ, δu, δv = dilation.delta, dilation.delta_u, dilation.delta_v
    du, dv = duv
    A = (2 * du * du * δ * δu * E + 4 * du * dv * δ * δv * E
         + 4 * dv * dv * δ * δv * F - 2 * dv * dv * δ * δu * G)
    B = (4 * du * du * δ * δu * F - 2 * du * du * δ * δv * E
         + 4 * dv * du * δ * δu * G + 2 * dv * dv * δ * δv * G)
    return mu / (2.0 * kappa) * (a * A + b * B)


@traced
def tangential_component_relation(corr, curve, s, a, b, tol=CONFORMAL_TOL):
    sj, tj = _paired_jets(corr, curve, s)
    frame, dec = _osculating_source(sj)
    src = metric_jet(corr.source, sj.uv, sj.patch_jet)
    tgt = metric_jet(corr.target, sj.uv, tj.patch_jet)
    d = dilation_field(corr, sj.uv, tol, src, tgt)
    T = a * sj.patch_jet.ru + b * sj.patch_jet.rv
    Tt = a * tj.patch_jet.ru + b * tj.patch_jet.rv
    image = _convention_image(sj, tj, dec, frame)
    base = d.delta**2 * float(sj.sigma @ T)
    lhs = float(image @ Tt) - base
    lhs_actual = float(tj.sigma @ Tt) - base
    h = tangential_defect(src.E, src.F, src.G, d, sj.duv, dec.mu, frame.kappa, a, b)
    return TangentialComponent(lhs, h, abs(lhs - h), lhs_actual)


@traced
def geodesic_curvature_relation(corr, curve, s, tol=CONFORMAL_TOL):
    """Compare the target's κ_g expression with δ²κ_g plus the Christoffel correction.

    The target expression uses the source parameter derivatives.  Substituting
    Γ̃ = Γ + ϑ gives κ̃ = δ²κ_g + δ² W C exactly (``residual_derived``);
    ``residual_literal`` tests the variant without the δ² on the correction,
    which agrees only when δ² = 1 or C = 0.
    """
    sj, tj = _paired_jets(corr, curve, s)
    src = metric_jet(corr.source, sj.uv, sj.patch_jet)
    tgt = metric_jet(corr.target, sj.uv, tj.patch_jet)
    d = dilation_field(corr, sj.uv, tol, src, tgt)
    gamma_t = christoffel(tgt)
    kg_img = geodesic_curvature_bracket(gamma_t, sj.duv, sj.d2uv) * tgt.W
    kg = geodesic_curvature_intrinsic(sj, src)
    theta = christoffel_correction(src, d)
    du, dv = sj.duv
    C = (theta.g211 * du**3 + (2.0 * theta.g212 - theta.g111) * du * du * dv
         + (theta.g222 - 2.0 * theta.g112) * du * dv * dv - theta.g122 * dv**3)
    δ2 = d.delta**2
    f = C * src.W
    return GeodesicCurvatureRelation(
        kg_img, kg, C, f,
        residual_derived=abs(kg_img - δ2 * kg - δ2 * f),
        residual_literal=abs(kg_img - δ2 * kg - f),
        kappa_g_image_true=geodesic_curvature_any_speed(tj),
        delta=d.delta,
    )
