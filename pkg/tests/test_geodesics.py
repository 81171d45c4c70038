import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from confgeom import catalog
from confgeom.curves import curve_jet, ensure_unit_speed, geodesic_curvature_def
from confgeom.errors import NonUnitSpeedError, WrongMapClassError
from confgeom.geodesics import (GeodesicState, IntegratorConfig, ambient_covariant_defect,
                                conformal_geodesic_residual, conformal_geodesic_terms,
                                covariant_derivative_defect, geodesic_residual, geodesic_rhs,
                                homothety_invariance_check, integrate_geodesic, metric_speed2,
                                path_residuals, tangent_field, unit_state)
from confgeom.conformal import dilation_field
from confgeom.surfaces import christoffel, eval_jet, metric_jet

from oracles import great_circle_point

SPHERE = catalog.make_surface("sphere")
START = (math.pi / 2, 0.0)


def oblique_start():
    return unit_state(SPHERE, START, (0.6, 1.0))


def closure_error(step, length=2 * math.pi):
    path = integrate_geodesic(SPHERE, oblique_start(), length, IntegratorConfig(step=step))
    assert path.termination == "length-reached"
    return float(np.linalg.norm(SPHERE(*path.states[-1, :2]) - SPHERE(*START)))


def test_unit_state_has_metric_unit_speed():
    st0 = unit_state(SPHERE, (math.pi / 4, 0.3), (2.0, 5.0))
    mj = metric_jet(SPHERE, (math.pi / 4, 0.3))
    assert metric_speed2(mj, st0.du, st0.dv) == pytest.approx(1, abs=1e-14)
    assert st0.dv / st0.du == pytest.approx(2.5)
    with pytest.raises(NonUnitSpeedError):
        unit_state(SPHERE, START, (0, 0))


def test_integrator_config_validation():
    with pytest.raises(ValueError):
        IntegratorConfig(step=0)
    with pytest.raises(ValueError):
        IntegratorConfig(max_steps=0)


def test_rejects_non_unit_initial_speed():
    with pytest.raises(NonUnitSpeedError) as e:
        integrate_geodesic(SPHERE, GeodesicState(*START, 1.0, 1.0), 1.0)
    assert e.value.reason == "nonunit-initial-speed"


def test_geodesic_rhs_on_sphere():
    # at colatitude u with pure longitude motion: u'' = sin u cos u v'^2, v'' = 0
    u0 = 0.9
    g = christoffel(metric_jet(SPHERE, (u0, 0.0)))
    a, b = geodesic_rhs(g, (u0, 0.0, 0.0, 1.0))
    assert a == pytest.approx(math.sin(u0) * math.cos(u0), abs=1e-14)
    assert b == 0


def test_great_circle_matches_closed_form():
    st0 = oblique_start()
    jet = eval_jet(SPHERE, START)
    p0 = SPHERE(*START)
    t0 = jet.ru * st0.du + jet.rv * st0.dv
    path = integrate_geodesic(SPHERE, st0, 2 * math.pi, IntegratorConfig(step=0.01))
    for s, row in zip(path.s[::50], path.states[::50]):
        np.testing.assert_allclose(SPHERE(row[0], row[1]), great_circle_point(p0, t0, s), atol=1e-8)


def test_great_circle_closure_at_default_step():
    assert closure_error(1e-3) < 1e-6


def test_rk4_is_fourth_order():
    e = [closure_error(h) for h in (0.2, 0.1, 0.05)]
    for a, b in zip(e, e[1:]):
        assert 12 < a / b < 20


def test_speed_drift():
    length = 2 * math.pi
    path = integrate_geodesic(SPHERE, oblique_start(), length, IntegratorConfig(step=0.01))
    drift = max(abs(metric_speed2(metric_jet(SPHERE, (r[0], r[1])), r[2], r[3]) - 1) for r in path.states)
    assert drift / length < 1e-6


def test_last_step_lands_on_length():
    path = integrate_geodesic(SPHERE, oblique_start(), 1.0, IntegratorConfig(step=0.3))
    np.testing.assert_allclose(path.s, [0, 0.3, 0.6, 0.9, 1.0])
    assert path.length == pytest.approx(1.0)


def test_domain_exit_and_step_budget():
    plane = catalog.make_surface("plane")
    path = integrate_geodesic(plane, unit_state(plane, (0, 0), (1, 0)), 10.0, IntegratorConfig(step=0.1))
    assert path.termination == "domain-exit"
    assert 4.8 < path.length <= 5.0
    assert np.all(np.abs(path.states[:, 1]) < 1e-15)
    path = integrate_geodesic(plane, unit_state(plane, (0, 0), (1, 0)), 1.0, IntegratorConfig(step=0.1, max_steps=3))
    assert path.termination == "step-failure" and len(path) == 4


def test_path_residuals_are_small_on_integrated_geodesic():
    path = integrate_geodesic(SPHERE, oblique_start(), 2.0, IntegratorConfig(step=1e-3))
    assert np.max(np.abs(path_residuals(SPHERE, path))) < 1e-5


@given(st.floats(0.1, 1.4))
def test_great_circle_satisfies_geodesic_equations(tilt):
    c = catalog.make_curve(SPHERE, "great-circle", {"tilt": tilt})
    for t in c.samples(9):
        r1, r2 = geodesic_residual(SPHERE, c, t)
        assert abs(r1) < 1e-9 and abs(r2) < 1e-9


def test_latitude_is_not_a_geodesic():
    c = catalog.make_curve(SPHERE, "latitude", {"u0": math.pi / 4})
    r1, r2 = geodesic_residual(SPHERE, c, 0.4)
    assert max(abs(r1), abs(r2)) > 0.1


@pytest.mark.parametrize("surface,family,params", [
    ("sphere", "latitude", {"u0": math.pi / 4}),
    ("sphere", "great-circle", {"tilt": 0.7}),
    ("catenoid", "plane-circle", {"r": 0.5, "center": [0.2, 0.1]}),
    ("helicoid", "helicoid-section", None),
])
def test_covariant_defect_of_velocity_is_geodesic_curvature(surface, family, params):
    patch = catalog.make_surface(surface)
    c = ensure_unit_speed(catalog.make_curve(patch, family, params))
    field = tangent_field(c)
    for t in c.samples(9):
        d = covariant_derivative_defect(patch, c, field, t)
        assert d == pytest.approx(abs(geodesic_curvature_def(curve_jet(c, t))), abs=1e-8)
        assert d == pytest.approx(ambient_covariant_defect(patch, c, field, t), abs=1e-8)


def test_covariant_defect_of_general_field():
    # a rotating field (cos s, sin s) along a sphere latitude
    c = catalog.make_curve(SPHERE, "latitude", {"u0": 1.0})

    def field(s):
        return math.cos(s), math.sin(s), -math.sin(s), math.cos(s)

    for t in c.samples(7):
        assert covariant_derivative_defect(SPHERE, c, field, t) == pytest.approx(
            ambient_covariant_defect(SPHERE, c, field, t), abs=1e-10)


def test_conformal_terms_examples():
    scale = catalog.make_correspondence("scale", {"c": 3.0, "surface": "sphere"})
    mj = metric_jet(scale.source, (1.0, 0.2))
    f = conformal_geodesic_terms(mj, dilation_field(scale, (1.0, 0.2)), GeodesicState(1.0, 0.2, 1.0, 0.0))
    assert (f.f1, f.f2) == pytest.approx((0, 0), abs=1e-15)
    exp = catalog.make_correspondence("exp-plane")
    mj = metric_jet(exp.source, (0.0, 0.0))
    d = dilation_field(exp, (0.0, 0.0))
    assert conformal_geodesic_terms(mj, d, GeodesicState(0, 0, 1, 0)) == pytest.approx((1, 0), abs=1e-14)
    assert conformal_geodesic_terms(mj, d, GeodesicState(0, 0, 0, 1)) == pytest.approx((-1, 0), abs=1e-14)


@pytest.mark.parametrize("name,params,family,fparams", [
    ("exp-plane", None, "plane-circle", {"r": 0.5, "center": [0.3, 0.2]}),
    ("sphere-stereographic", None, "plane-circle", {"r": 1.0}),
    ("helicoid-catenoid", None, "helicoid-section", None),
    ("scale", {"c": 2.0, "surface": "sphere"}, "latitude", {"u0": 1.0}),
])
def test_corrected_source_residual_equals_target_residual(name, params, family, fparams):
    corr = catalog.make_correspondence(name, params)
    c = catalog.make_curve(corr.source, family, fparams)
    for t in c.samples(9):
        r = conformal_geodesic_residual(corr, c, t)
        assert r.discrepancy < 1e-9
        assert (r.r1, r.r2) == pytest.approx((r.target_r1, r.target_r2), abs=1e-9)


def test_identity_reduces_to_plain_geodesic_residual():
    corr = catalog.make_correspondence("identity", {"surface": "sphere"})
    c = catalog.make_curve(corr.source, "latitude", {"u0": 1.1})
    for t in c.samples(5):
        r = conformal_geodesic_residual(corr, c, t)
        assert (r.r1, r.r2) == pytest.approx(geodesic_residual(SPHERE, c, t), abs=1e-14)


def test_exp_plane_line_is_not_a_target_geodesic():
    corr = catalog.make_correspondence("exp-plane")
    line = catalog.make_curve(corr.source, "parameter-line-u", {"v0": 0.3})
    for t in line.samples(5):
        assert geodesic_residual(corr.source, line, t) == (0, 0)
        r = conformal_geodesic_residual(corr, line, t)
        assert (r.r1, r.r2) == pytest.approx((1, 0), abs=1e-12)
        assert r.discrepancy < 1e-12


def test_invariance_under_isometry_and_homothety():
    hc = catalog.make_correspondence("helicoid-catenoid")
    res = homothety_invariance_check(hc, unit_state(hc.source, (0.3, 0.2), (1, 0.7)), 2.0)
    assert res.max_residual < 1e-5 and res.map_class.tag == "isometry"
    sc = catalog.make_correspondence("scale", {"c": 2.0, "surface": "sphere"})
    res = homothety_invariance_check(sc, unit_state(sc.source, START, (0, 1)), 2.0)
    assert res.max_residual < 1e-9 and res.map_class.label() == "homothety(2)"


def test_invariance_rejects_conformal_map():
    exp = catalog.make_correspondence("exp-plane")
    with pytest.raises(WrongMapClassError) as e:
        homothety_invariance_check(exp, unit_state(exp.source, (0, 0), (1, 0)), 1.0)
    assert e.value.reason == "wrong-map-class"
