import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, strategies as st
from scipy.integrate import quad

from confgeom import catalog
from confgeom.curves import (arclength_reparam, binormal_expansion_check, curvature_sample, curve_jet,
                             ensure_unit_speed, expression_curve, frenet, geodesic_curvature_def,
                             geodesic_curvature_intrinsic, is_asymptotic, is_osculating,
                             normal_curvature, normal_curvature_direct, osculating_decompose, speed)
from confgeom.errors import DomainError, StationaryPointError, VanishingCurvatureError

s = catalog.s


def curve(surface, family, params=None, s_range=None, surface_params=None):
    patch = catalog.make_surface(surface, surface_params)
    return catalog.make_curve(patch, family, params, s_range)


def test_jet_of_plane_line():
    j = curve_jet(curve("plane", "parameter-line-u"), 0.2)
    np.testing.assert_allclose(j.d1, [1, 0, 0])
    np.testing.assert_allclose(j.d2, [0, 0, 0])


def test_jet_of_sphere_equator():
    c = curve("sphere", "parameter-line-v", {"u0": math.pi / 2}, (0, 3))
    for t in (0.0, 0.7, 2.5):
        np.testing.assert_allclose(curve_jet(c, t).d2, [-math.cos(t), -math.sin(t), 0], atol=1e-15)


@given(st.floats(0.2, 3.0), st.floats(0, 6))
def test_plane_circle_jet(r, t):
    c = curve("plane", "plane-circle", {"r": r})
    t = t * r
    j = curve_jet(c, t)
    assert np.linalg.norm(j.d1) == pytest.approx(1, abs=1e-12)
    assert np.linalg.norm(j.d2) == pytest.approx(1 / r, rel=1e-12)


def test_curve_jet_rejects_out_of_range():
    with pytest.raises(DomainError):
        curve_jet(curve("plane", "plane-circle"), 10.0)


def test_velocity_chain_rule_fd_patch():
    patch = catalog.make_surface("helicoid").with_mode("fd")
    c = catalog.make_curve(patch, "helicoid-section")
    for t in c.samples(7):
        j = curve_jet(c, t)
        h = 1e-6
        fd = (patch(*c.coords(t + h)[0]) - patch(*c.coords(t - h)[0])) / (2 * h)
        np.testing.assert_allclose(j.d1, fd, atol=1e-5)


def test_reparam_of_unit_speed_circle_is_identity():
    c = curve("plane", "plane-circle", {"r": 1.5})
    r = arclength_reparam(c)
    assert r.s_range[1] == pytest.approx(c.s_range[1], abs=1e-10)
    for t in np.linspace(0, r.s_range[1], 13):
        np.testing.assert_allclose(r.coords(t)[:3], c.coords(t)[:3], atol=1e-8)
    rr = arclength_reparam(r)
    for t in np.linspace(0, r.s_range[1], 13):
        np.testing.assert_allclose(rr.coords(t)[:3], r.coords(t)[:3], atol=1e-8)


def test_reparam_of_double_speed_line():
    c = curve("plane", "expr", {"u": "2*s", "v": "0"})
    r = arclength_reparam(c)
    assert r.s_range == pytest.approx((0, 2))
    for t in np.linspace(0, 2, 9):
        np.testing.assert_allclose(r.coords(t)[:3], [[t, 0], [1, 0], [0, 0]], atol=1e-12)


def test_reparam_of_ellipse():
    c = curve("plane", "expr", {"u": "2*cos(s)", "v": "sin(s)"}, (0, 2 * math.pi))
    r = arclength_reparam(c)
    exact, _ = quad(lambda t: math.hypot(2 * math.sin(t), math.cos(t)), 0, 2 * math.pi, epsabs=1e-13)
    assert r.s_range[1] == pytest.approx(exact, rel=1e-10)
    for t in r.samples(100):
        assert abs(speed(r, t) - 1) < 1e-6
        j = curve_jet(r, t)
        assert abs(j.d1 @ j.d2) < 1e-6  # unit speed implies σ' ⟂ σ''
    # third-order rows survive the chain rule: torsion of a plane curve is 0
    assert abs(frenet(curve_jet(r, 1.0)).tau) < 1e-8


def test_reparam_rejects_stationary_point():
    c = curve("plane", "expr", {"u": "s^2", "v": "0"}, (-1, 1))
    with pytest.raises(StationaryPointError):
        arclength_reparam(c)


def test_frenet_of_plane_circle():
    for r in (0.5, 2.0):
        f = frenet(curve_jet(curve("plane", "plane-circle", {"r": r}), 0.3))
        assert f.kappa == pytest.approx(1 / r, rel=1e-12)
        assert abs(f.tau) < 1e-12
        np.testing.assert_allclose(f.b, [0, 0, 1], atol=1e-12)


def test_frenet_of_line_raises():
    with pytest.raises(VanishingCurvatureError) as e:
        frenet(curve_jet(curve("plane", "parameter-line-u"), 0.0))
    assert e.value.reason == "vanishing-curvature"


def test_helix_curvature_and_torsion():
    f = frenet(curve_jet(curve("cylinder", "helix", {"a": 1.0, "c": 1.0}), 0.9))
    assert f.kappa == pytest.approx(0.5, abs=1e-12)
    assert f.tau == pytest.approx(0.5, abs=1e-12)


@pytest.mark.parametrize("args", [
    ("plane", "plane-circle", {"r": 1.3, "center": [0.2, -0.4]}, None),
    ("sphere", "latitude", {"u0": math.pi / 4}, None),
    ("cylinder", "helix", {"a": 1.0, "c": 0.7}, None),
    ("helicoid", "helicoid-section", None, None),
])
def test_binormal_expansion(args):
    c = ensure_unit_speed(curve(*args))
    for t in c.samples(25):
        assert binormal_expansion_check(curve_jet(c, t)) < 1e-9


@given(st.floats(0.3, 2.5), st.floats(0, 1))
def test_frame_is_orthonormal_and_decomposition_reconstructs(r, frac):
    c = curve("monge", "plane-circle", {"r": r, "center": [0.1, 0.2]}, surface_params={"f": "0.2*u*v + 1"})
    c = ensure_unit_speed(c)
    j = curve_jet(c, frac * c.s_range[1])
    f = frenet(j)
    for x, y in ((f.t, f.n), (f.t, f.b), (f.n, f.b)):
        assert abs(x @ y) < 1e-9
    np.testing.assert_allclose(np.cross(f.t, f.n), f.b, atol=1e-9)
    d = osculating_decompose(j, f)
    np.testing.assert_allclose(d.xi * f.t + d.mu * f.n + d.beta * f.b, j.sigma, atol=1e-9)


def test_decomposition_examples():
    r = 1.7
    d = osculating_decompose(curve_jet(curve("plane", "plane-circle", {"r": r}), 0.4))
    assert (d.xi, d.mu, d.beta) == pytest.approx((0, -r, 0), abs=1e-12)
    lifted = curve("monge", "plane-circle", {"r": 1.0}, surface_params={"f": "1"})
    assert abs(osculating_decompose(curve_jet(lifted, 0.4)).beta) == pytest.approx(1, abs=1e-12)
    great = curve("sphere", "great-circle", {"tilt": 0.8})
    for t in great.samples(9)[:-1]:
        assert abs(osculating_decompose(curve_jet(great, t)).beta) < 1e-12


def test_is_osculating_examples():
    v = is_osculating(curve("plane", "plane-circle", {"r": 2.0}))
    assert v.holds and v.worst < 1e-12
    v = is_osculating(curve("monge", "plane-circle", surface_params={"f": "1"}))
    assert not v.holds and v.worst == pytest.approx(1, abs=1e-9)
    v = is_osculating(curve("cylinder", "helix"))
    assert not v.holds and v.worst > 0.1


def test_is_osculating_skips_inflection():
    c = curve("plane", "expr", {"u": "s", "v": "s^3"}, (-1, 1))
    v = is_osculating(c, n_samples=11)
    assert v.holds and v.skipped == (0.0,)


def test_normal_curvature_examples():
    assert normal_curvature(curve_jet(curve("plane", "plane-circle"), 1.0)) == 0
    for fam, params in (("great-circle", {"tilt": 0.3}), ("latitude", {"u0": 1.0})):
        c = curve("sphere", fam, params)
        for t in c.samples(5):
            assert normal_curvature(curve_jet(c, t)) == pytest.approx(-1, abs=1e-12)
    section = curve("cylinder", "parameter-line-u", {"v0": 0.5})
    ruling = curve("cylinder", "parameter-line-v", {"u0": 0.5})
    assert normal_curvature(curve_jet(section, 0.1)) == pytest.approx(-1, abs=1e-12)
    assert abs(normal_curvature(curve_jet(ruling, 0.1))) < 1e-15


def test_normal_curvature_matches_direct():
    c = ensure_unit_speed(curve("catenoid", "plane-circle", {"r": 0.5, "center": [0.2, 0.1]}))
    for t in c.samples(11):
        j = curve_jet(c, t)
        assert normal_curvature(j) == pytest.approx(normal_curvature_direct(j), abs=1e-9)


def test_is_asymptotic_examples():
    assert is_asymptotic(curve("plane", "plane-circle")).holds
    assert not is_asymptotic(curve("sphere", "parameter-line-v", {"u0": math.pi / 2})).holds
    assert is_asymptotic(curve("cylinder", "parameter-line-v", {"u0": 0.3})).holds


def test_geodesic_curvature_examples():
    eq = curve("sphere", "parameter-line-v", {"u0": math.pi / 2})
    assert abs(geodesic_curvature_def(curve_jet(eq, 0.2))) < 1e-14
    lat = curve("sphere", "latitude", {"u0": math.pi / 4})
    for t in lat.samples(7):
        j = curve_jet(lat, t)
        # increasing longitude at colatitude π/4 turns left about the outward normal
        assert geodesic_curvature_def(j) == pytest.approx(1.0, abs=1e-12)
        assert geodesic_curvature_intrinsic(j) == pytest.approx(geodesic_curvature_def(j), abs=1e-8)
    circ = curve("plane", "plane-circle", {"r": 2.0})
    assert abs(geodesic_curvature_def(curve_jet(circ, 1.0))) == pytest.approx(0.5, abs=1e-12)
    line = curve("plane", "parameter-line-u")
    assert geodesic_curvature_intrinsic(curve_jet(line, 0.1)) == 0
    expl = ensure_unit_speed(curve("exp-plane", "parameter-line-u", {"v0": 0.3}))
    for t in expl.samples(7):
        j = curve_jet(expl, t)
        assert geodesic_curvature_intrinsic(j) == pytest.approx(geodesic_curvature_def(j), abs=1e-8)


@given(st.sampled_from(["sphere", "catenoid", "helicoid", "exp-plane", "stereo-sphere"]),
       st.floats(0.1, 0.4), st.floats(0, 1))
def test_curvature_decomposition(surface, r, frac):
    patch = catalog.make_surface(surface)
    d = patch.domain
    center = [(d.umin + d.umax) / 2 + 0.1, (d.vmin + d.vmax) / 2 - 0.1]
    c = ensure_unit_speed(catalog.make_curve(patch, "plane-circle", {"r": r, "center": center}))
    j = curve_jet(c, frac * c.s_range[1])
    k = np.linalg.norm(j.d2)
    cs = curvature_sample(j)
    if k > 1e-4:
        assert abs(k**2 - (cs.kappa_n**2 + cs.kappa_g**2)) / k**2 < 1e-6
    assert cs.kappa_g == pytest.approx(geodesic_curvature_intrinsic(j), abs=1e-6)


def test_expression_curve_carries_third_derivatives():
    patch = catalog.make_surface("plane")
    c = expression_curve(patch, sp.cos(s), sp.sin(s), (0, 1), s=s)
    np.testing.assert_allclose(c.coords(0.0)[3], [0, -1])
