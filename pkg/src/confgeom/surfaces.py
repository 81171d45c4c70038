"""Surface patches, their derivative jets, fundamental forms and connection.

Every signed quantity uses the normal ``N = (Φ_u × Φ_v) / |Φ_u × Φ_v|``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, NamedTuple, Optional

import numpy as np
import sympy as sp

from ._trace import traced
from .errors import DegenerateMetricError, DegeneratePatchError, DomainError

REGULARITY_EPS = 1e-10
METRIC_EPS = 1e-12
SECOND_STEP = 1e-4


def first_step(x):
    """Central-difference step for first derivatives at coordinate ``x``."""
    return max(1e-5, 1e-5 * abs(x))


@dataclass(frozen=True)
class Rect:
    umin: float
    umax: float
    vmin: float
    vmax: float

    def __post_init__(self):
        if not (self.umin < self.umax and self.vmin < self.vmax):
            raise ValueError(f"empty parameter rectangle {self}")

    def contains(self, u, v, margin=0.0):
        return (self.umin + margin <= u <= self.umax - margin
                and self.vmin + margin <= v <= self.vmax - margin)

    def grid(self, nu, nv, inset=0.1):
        """``nu × nv`` uniform points on the rectangle shrunk by ``inset`` per side."""
        du = (self.umax - self.umin) * inset
        dv = (self.vmax - self.vmin) * inset
        us = np.linspace(self.umin + du, self.umax - du, nu)
        vs = np.linspace(self.vmin + dv, self.vmax - dv, nv)
        return [(float(a), float(b)) for a in us for b in vs]

    def as_list(self):
        return [self.umin, self.umax, self.vmin, self.vmax]


@dataclass(frozen=True)
class SurfacePatch:
    """A map from a parameter rectangle into R³.

    ``derivatives(u, v)`` returns the rows Φ, Φ_u, Φ_v, Φ_uu, Φ_uv, Φ_vv and,
    when ``order == 3``, Φ_uuu, Φ_uuv, Φ_uvv, Φ_vvv.  Without it the patch is
    differentiated by central differences.
    """

    position: Callable[[float, float], np.ndarray]
    domain: Rect
    derivatives: Optional[Callable[[float, float], np.ndarray]] = None
    order: int = 2
    mode: str = "analytic"
    name: str = "custom"

    def __post_init__(self):
        if self.mode not in ("analytic", "fd"):
            raise ValueError(f"unknown differentiation mode {self.mode!r}")
        if self.mode == "analytic" and self.derivatives is None:
            object.__setattr__(self, "mode", "fd")

    def __call__(self, u, v):
        return np.asarray(self.position(u, v), dtype=float)

    def with_mode(self, mode):
        return replace(self, mode=mode)

    def with_domain(self, domain):
        return replace(self, domain=domain)


def symbolic_patch(components, domain, name="custom", u=None, v=None):
    """Build an analytic patch from three sympy expressions in ``u`` and ``v``."""
    u = u if u is not None else sp.Symbol("u")
    v = v if v is not None else sp.Symbol("v")
    X = sp.Matrix(components)
    rows = [X, X.diff(u), X.diff(v), X.diff(u, 2), X.diff(u, v), X.diff(v, 2),
            X.diff(u, 3), X.diff(u, 2, v), X.diff(u, v, 2), X.diff(v, 3)]
    table = sp.Matrix.hstack(*rows).T
    deriv = sp.lambdify((u, v), table.tolist(), modules="math", cse=True)
    pos = sp.lambdify((u, v), list(X), modules="math")

    def position(a, b):
        return np.array(pos(a, b), dtype=float)

    def derivatives(a, b):
        return np.array(deriv(a, b), dtype=float)

    return SurfacePatch(position, domain, derivatives, order=3, name=name)


@dataclass
class PatchJet:
    point: tuple
    r: np.ndarray
    ru: np.ndarray
    rv: np.ndarray
    ruu: np.ndarray
    ruv: np.ndarray
    rvv: np.ndarray
    third: Optional[tuple] = None  # (Φ_uuu, Φ_uuv, Φ_uvv, Φ_vvv)


class FirstForm(NamedTuple):
    E: float
    F: float
    G: float
    W: float


class SecondForm(NamedTuple):
    L: float
    M: float
    N: float


class FundamentalForms(NamedTuple):
    E: float
    F: float
    G: float
    L: float
    M: float
    N: float
    W: float


class SurfaceFrame(NamedTuple):
    ru: np.ndarray
    rv: np.ndarray
    normal: np.ndarray


class MetricJet(NamedTuple):
    E: float
    F: float
    G: float
    Eu: float
    Ev: float
    Fu: float
    Fv: float
    Gu: float
    Gv: float

    @property
    def W2(self):
        return self.E * self.G - self.F * self.F

    @property
    def W(self):
        return math.sqrt(self.W2)

    def inner(self, a, b):
        """Metric inner product of parameter-space vectors ``a`` and ``b``."""
        return self.E * a[0] * b[0] + self.F * (a[0] * b[1] + a[1] * b[0]) + self.G * a[1] * b[1]


class ChristoffelSymbols(NamedTuple):
    """Connection coefficients; ``gKIJ`` holds Γ^K_IJ with 1 ≡ u and 2 ≡ v."""

    g111: float
    g211: float
    g112: float
    g212: float
    g122: float
    g222: float

    def contract(self, du, dv):
        """Return (Σ Γ¹_ij x^i x^j, Σ Γ²_ij x^i x^j) for x = (du, dv)."""
        return (self.g111 * du * du + 2.0 * self.g112 * du * dv + self.g122 * dv * dv,
                self.g211 * du * du + 2.0 * self.g212 * du * dv + self.g222 * dv * dv)

    def as_array(self):
        out = np.empty((2, 2, 2))
        out[0] = [[self.g111, self.g112], [self.g112, self.g122]]
        out[1] = [[self.g211, self.g212], [self.g212, self.g222]]
        return out


def _check_metric(E, F, G):
    W2 = E * G - F * F
    if W2 < METRIC_EPS * (E + G) ** 2:
        raise DegenerateMetricError(f"EG - F^2 = {W2:.3e} is not positive (E={E:.3e}, G={G:.3e})")
    return W2


def _fd_margin(patch, u, v):
    return 2.0 * max(SECOND_STEP, first_step(u), first_step(v))


@traced
def eval_jet(patch, point):
    """Position and partials up to second (and, if available, third) order."""
    u, v = float(point[0]), float(point[1])
    margin = _fd_margin(patch, u, v) if patch.mode == "fd" else 0.0
    if not patch.domain.contains(u, v, margin):
        raise DomainError(f"({u:.6g}, {v:.6g}) outside {patch.domain} (margin {margin:.1e})")
    if patch.mode == "analytic":
        d = patch.derivatives(u, v)
        third = tuple(d[6:10]) if patch.order >= 3 and len(d) >= 10 else None
        jet = PatchJet((u, v), d[0], d[1], d[2], d[3], d[4], d[5], third)
    else:
        f = patch
        hu, hv = first_step(u), first_step(v)
        h = SECOND_STEP
        r = f(u, v)
        ru = (f(u + hu, v) - f(u - hu, v)) / (2 * hu)
        rv = (f(u, v + hv) - f(u, v - hv)) / (2 * hv)
        ruu = (f(u + h, v) - 2 * r + f(u - h, v)) / (h * h)
        rvv = (f(u, v + h) - 2 * r + f(u, v - h)) / (h * h)
        ruv = (f(u + h, v + h) - f(u + h, v - h) - f(u - h, v + h) + f(u - h, v - h)) / (4 * h * h)
        jet = PatchJet((u, v), r, ru, rv, ruu, ruv, rvv, None)
    if np.linalg.norm(np.cross(jet.ru, jet.rv)) <= REGULARITY_EPS:
        raise DegeneratePatchError(f"|Φ_u × Φ_v| vanishes at ({u:.6g}, {v:.6g})")
    return jet


def mixed_partial_asymmetry(patch, point):
    """Relative gap between ∂_v(Φ_u) and ∂_u(Φ_v), both by nested central differences."""
    u, v = point
    h = SECOND_STEP
    f = patch

    def d_u(a, b):
        return (f(a + h, b) - f(a - h, b)) / (2 * h)

    def d_v(a, b):
        return (f(a, b + h) - f(a, b - h)) / (2 * h)

    uv = (d_u(u, v + h) - d_u(u, v - h)) / (2 * h)
    vu = (d_v(u + h, v) - d_v(u - h, v)) / (2 * h)
    return float(np.linalg.norm(uv - vu) / max(1.0, np.linalg.norm(uv)))


@traced
def first_form(jet):
    E = float(jet.ru @ jet.ru)
    F = float(jet.ru @ jet.rv)
    G = float(jet.rv @ jet.rv)
    W2 = _check_metric(E, F, G)
    return FirstForm(E, F, G, math.sqrt(W2))


@traced
def surface_normal(jet):
    c = np.cross(jet.ru, jet.rv)
    n = np.linalg.norm(c)
    if n <= REGULARITY_EPS:
        raise DegeneratePatchError("|Φ_u × Φ_v| vanishes")
    return c / n


def surface_frame(jet):
    return SurfaceFrame(jet.ru, jet.rv, surface_normal(jet))


@traced
def second_form(jet):
    N = surface_normal(jet)
    return SecondForm(float(jet.ruu @ N), float(jet.ruv @ N), float(jet.rvv @ N))


def fundamental_forms(jet):
    I = first_form(jet)
    II = second_form(jet)
    return FundamentalForms(I.E, I.F, I.G, II.L, II.M, II.N, I.W)


def _coefficients(jet):
    return (float(jet.ru @ jet.ru), float(jet.ru @ jet.rv), float(jet.rv @ jet.rv))


@traced
def metric_jet(patch, point, jet=None):
    """E, F, G with their first partials at ``point``."""
    if jet is None:
        jet = eval_jet(patch, point)
    ru, rv = jet.ru, jet.rv
    E, F, G, _ = first_form(jet)
    if patch.mode == "analytic":
        Eu = 2.0 * float(jet.ruu @ ru)
        Ev = 2.0 * float(jet.ruv @ ru)
        Fu = float(jet.ruu @ rv + ru @ jet.ruv)
        Fv = float(jet.ruv @ rv + ru @ jet.rvv)
        Gu = 2.0 * float(jet.ruv @ rv)
        Gv = 2.0 * float(jet.rvv @ rv)
    else:
        u, v = jet.point
        h = SECOND_STEP
        up = _coefficients(eval_jet(patch, (u + h, v)))
        um = _coefficients(eval_jet(patch, (u - h, v)))
        vp = _coefficients(eval_jet(patch, (u, v + h)))
        vm = _coefficients(eval_jet(patch, (u, v - h)))
        Eu, Fu, Gu = ((a - b) / (2 * h) for a, b in zip(up, um))
        Ev, Fv, Gv = ((a - b) / (2 * h) for a, b in zip(vp, vm))
    return MetricJet(E, F, G, Eu, Ev, Fu, Fv, Gu, Gv)


@traced
def christoffel(mj):
    """Second-kind Christoffel symbols from the metric and its first partials."""
    E, F, G, Eu, Ev, Fu, Fv, Gu, Gv = mj
    W2 = _check_metric(E, F, G)
    d = 2.0 * W2
    return ChristoffelSymbols(
        g111=(G * Eu - 2.0 * F * Fu + F * Ev) / d,
        g211=(2.0 * E * Fu - E * Ev - F * Eu) / d,
        g112=(G * Ev - F * Gu) / d,
        g212=(E * Gu - F * Ev) / d,
        g122=(2.0 * G * Fv - G * Gu - F * Gv) / d,
        g222=(E * Gv - 2.0 * F * Fv + F * Gu) / d,
    )


@traced
def dot_product_identities(jet, mj):
    """Residuals of the six identities tying Φ_ij · Φ_k to metric partials."""
    ru, rv = jet.ru, jet.rv
    return np.array([
        abs(jet.ruu @ ru - mj.Eu / 2),
        abs(jet.ruu @ rv - (mj.Fu - mj.Ev / 2)),
        abs(jet.ruv @ ru - mj.Ev / 2),
        abs(jet.ruv @ rv - mj.Gu / 2),
        abs(jet.rvv @ rv - mj.Gv / 2),
        abs(jet.rvv @ ru - (mj.Fv - mj.Gu / 2)),
    ])


def gauss_formula_residuals(jet, gamma):
    """Norms of Φ_ij − (Γ¹_ij Φ_u + Γ²_ij Φ_v + II_ij N) for ij = uu, uv, vv."""
    N = surface_normal(jet)
    L, M, Nc = second_form(jet)
    pairs = ((jet.ruu, gamma.g111, gamma.g211, L),
             (jet.ruv, gamma.g112, gamma.g212, M),
             (jet.rvv, gamma.g122, gamma.g222, Nc))
    return np.array([np.linalg.norm(r - (a * jet.ru + b * jet.rv + c * N)) for r, a, b, c in pairs])
