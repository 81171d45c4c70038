"""Built-in surfaces, curve families and correspondences, addressable by id."""
from __future__ import annotations

import functools
import json
import math

import sympy as sp

from .conformal import SurfaceCorrespondence
from .curves import expression_curve
from .expr import parse_expression
from .surfaces import Rect, symbolic_patch

u, v, s = sp.symbols("u v s", real=True)
PI = math.pi

# id -> (ordered parameters with defaults, default domain, builder, description)
SURFACES = {}
CURVES = {}
CORRESPONDENCES = {}


def _surface(name, params, domain, doc):
    def register(builder):
        SURFACES[name] = (params, Rect(*domain), builder, doc)
        return builder
    return register


def _helicoid():
    return sp.Matrix([sp.sinh(u) * sp.sin(v), -sp.sinh(u) * sp.cos(v), v])


def _catenoid():
    return sp.Matrix([sp.cosh(u) * sp.cos(v), sp.cosh(u) * sp.sin(v), u])


@_surface("plane", {}, (-5, 5, -5, 5), "(u, v, 0)")
def _plane(p):
    return [u, v, 0]


@_surface("scaled-plane", {"c": 2.0}, (-5, 5, -5, 5), "(c u, c v, 0)")
def _scaled_plane(p):
    return [p["c"] * u, p["c"] * v, 0]


@_surface("cylinder", {"r": 1.0}, (-2 * PI, 2 * PI, -5, 5), "(r cos u, r sin u, v)")
def _cylinder(p):
    return [p["r"] * sp.cos(u), p["r"] * sp.sin(u), v]


@_surface("sphere", {"r": 1.0}, (0.05, PI - 0.05, -3 * PI, 3 * PI),
          "r (sin u cos v, sin u sin v, cos u); u colatitude, v longitude")
def _sphere(p):
    r = p["r"]
    return [r * sp.sin(u) * sp.cos(v), r * sp.sin(u) * sp.sin(v), r * sp.cos(u)]


@_surface("stereo-sphere", {"r": 1.0}, (-3, 3, -3, 3),
          "sphere of radius r in stereographic coordinates (projection from the north pole)")
def _stereo_sphere(p):
    q = 1 + u**2 + v**2
    return [p["r"] * 2 * u / q, p["r"] * 2 * v / q, p["r"] * (u**2 + v**2 - 1) / q]


@_surface("stereo-plane", {}, (-3, 3, -3, 3), "(u, v, 0) on the stereographic domain")
def _stereo_plane(p):
    return [u, v, 0]


@_surface("exp-plane", {}, (-1.5, 1.5, -1.5, 1.5), "(e^u cos v, e^u sin v, 0)")
def _exp_plane(p):
    return [sp.exp(u) * sp.cos(v), sp.exp(u) * sp.sin(v), 0]


@_surface("helicoid", {}, (-2, 2, -3 * PI, 3 * PI), "(sinh u sin v, -sinh u cos v, v)")
def _helicoid_surface(p):
    return list(_helicoid())


@_surface("catenoid", {}, (-2, 2, -3 * PI, 3 * PI), "(cosh u cos v, cosh u sin v, u)")
def _catenoid_surface(p):
    return list(_catenoid())


@_surface("associate", {"t": PI / 2}, (-2, 2, -3 * PI, 3 * PI),
          "cos t · helicoid + sin t · catenoid (isometric to the helicoid for every t)")
def _associate(p):
    t = p["t"]
    return list(math.cos(t) * _helicoid() + math.sin(t) * _catenoid())


@_surface("monge", {"f": "sin(u)*cos(v)"}, (-3, 3, -3, 3), "(u, v, f(u, v)) for an expression f")
def _monge(p):
    return [u, v, parse_expression(p["f"], {"u": u, "v": v})]


def _resolve(table, kind, name, params):
    if name not in table:
        import difflib
        close = difflib.get_close_matches(name, table, n=1)
        hint = f"; did you mean {close[0]!r}?" if close else ""
        raise KeyError(f"unknown {kind} {name!r}{hint}")
    defaults = table[name][0]
    params = params or {}
    if isinstance(params, (list, tuple)):
        if len(params) > len(defaults):
            raise ValueError(f"{kind} {name!r} takes at most {len(defaults)} parameters")
        params = dict(zip(defaults, params))
    unknown = set(params) - set(defaults)
    if unknown:
        raise ValueError(f"unknown parameter(s) {sorted(unknown)} for {kind} {name!r}; expected {list(defaults)}")
    return {**defaults, **params}


@functools.lru_cache(maxsize=256)
def _symbolic_surface(name, frozen):
    p = json.loads(frozen)
    return symbolic_patch(SURFACES[name][2](p), SURFACES[name][1], name=name, u=u, v=v)


def make_surface(name, params=None, domain=None, mode="analytic"):
    """Catalog surface ``name`` with parameters given as a dict or positional list."""
    p = _resolve(SURFACES, "surface", name, params)
    # patches are immutable, so the symbolic differentiation is done once per parameter set
    patch = _symbolic_surface(name, json.dumps(p, sort_keys=True))
    if domain is not None:
        patch = patch.with_domain(domain if isinstance(domain, Rect) else Rect(*domain))
    return patch.with_mode(mode) if mode != "analytic" else patch


# Curves -------------------------------------------------------------------

def _curve(name, params, doc):
    def register(builder):
        CURVES[name] = (params, builder, doc)
        return builder
    return register


@_curve("parameter-line-u", {"u0": 0.0, "v0": 0.0}, "u = u0 + s, v = v0")
def _line_u(p):
    return p["u0"] + s, sp.Float(p["v0"]), (-0.5, 0.5)


@_curve("parameter-line-v", {"u0": 0.0, "v0": 0.0}, "u = u0, v = v0 + s")
def _line_v(p):
    return sp.Float(p["u0"]), p["v0"] + s, (-0.5, 0.5)


@_curve("plane-circle", {"r": 1.0, "center": [0.0, 0.0]},
        "u = cu + r cos(s/r), v = cv + r sin(s/r)")
def _plane_circle(p):
    r = p["r"]
    cu, cv = p["center"]
    return cu + r * sp.cos(s / r), cv + r * sp.sin(s / r), (0.0, 2 * PI * r)


@_curve("latitude", {"u0": PI / 4, "radius": 1.0},
        "u = u0, v = s / (radius sin u0): unit speed on the sphere of that radius")
def _latitude(p):
    k = p["radius"] * math.sin(p["u0"])
    return sp.Float(p["u0"]), s / k, (0.0, 2 * PI * k)


@_curve("great-circle", {"tilt": 0.5, "radius": 1.0},
        "great circle through (radius, 0, 0) inclined by tilt to the equator, unit speed")
def _great_circle(p):
    a, R = p["tilt"], p["radius"]
    th = s / R
    return (sp.acos(sp.sin(th) * math.sin(a)),
            sp.atan2(sp.sin(th) * math.cos(a), sp.cos(th)),
            (0.0, 2 * PI * R))


@_curve("helix", {"a": 1.0, "c": 1.0},
        "u = s/√(a²+c²), v = c s/√(a²+c²): unit-speed helix on the cylinder of radius a")
def _helix(p):
    k = math.sqrt(p["a"] ** 2 + p["c"] ** 2)
    return s / k, p["c"] * s / k, (-PI * k, PI * k)


@_curve("helicoid-section", {"k": 0.5},
        "u = -asinh(k s / cos s), v = s: the helicoid's section by the plane y = k z, an osculating curve")
def _helicoid_section(p):
    return -sp.asinh(p["k"] * s / sp.cos(s)), s, (-1.0, 1.0)


@_curve("polynomial", {"u": [0.0, 1.0], "v": [0.0]}, "u(s), v(s) as coefficient lists, lowest order first")
def _polynomial(p):
    return (sum(c * s**i for i, c in enumerate(p["u"])),
            sum(c * s**i for i, c in enumerate(p["v"])), (0.0, 1.0))


@_curve("expr", {"u": "s", "v": "0"}, "u(s), v(s) as expressions in s")
def _expr_curve(p):
    return (parse_expression(p["u"], {"s": s}), parse_expression(p["v"], {"s": s}), (0.0, 1.0))


def make_curve(patch, name, params=None, s_range=None):
    p = _resolve(CURVES, "curve", name, params)
    ue, ve, default_range = CURVES[name][1](p)
    rng = tuple(s_range) if s_range is not None else default_range
    label = name if not params else f"{name}{_label(p)}"
    return expression_curve(patch, sp.sympify(ue), sp.sympify(ve), rng, name=label, s=s)


def _label(p):
    def fmt(x):
        if isinstance(x, (list, tuple)):
            return "[" + ",".join(fmt(y) for y in x) + "]"
        return f"{x:.6g}" if isinstance(x, float) else str(x)
    return "(" + ",".join(f"{k}={fmt(x)}" for k, x in p.items()) + ")"


# Correspondences ----------------------------------------------------------

def _corr(name, params, doc):
    def register(builder):
        CORRESPONDENCES[name] = (params, builder, doc)
        return builder
    return register


def _base(p, domain, mode):
    return make_surface(p["surface"], p.get("surface_params"), domain, mode)


@_corr("identity", {"surface": "sphere", "surface_params": {}}, "a surface onto itself")
def _identity(p, domain, mode):
    base = _base(p, domain, mode)
    return base, base, "isometry"


@_corr("scale", {"c": 2.0, "surface": "sphere", "surface_params": {}}, "Φ ↦ c Φ, a homothety with δ = c")
def _scale(p, domain, mode):
    base = _base(p, domain, mode)
    c = float(p["c"])
    pos, der = base.position, base.derivatives
    from dataclasses import replace
    target = replace(base, position=lambda a, b: c * pos(a, b),
                     derivatives=(lambda a, b: c * der(a, b)) if der else None,
                     name=f"{c:g}*{base.name}")
    return base, target, f"homothety({c:g})"


@_corr("rotation", {"angle": 0.7, "surface": "sphere", "surface_params": {}},
       "rigid rotation about the x-axis, an isometry")
def _rotation(p, domain, mode):
    import numpy as np
    from dataclasses import replace
    base = _base(p, domain, mode)
    a = float(p["angle"])
    R = np.array([[1, 0, 0], [0, math.cos(a), -math.sin(a)], [0, math.sin(a), math.cos(a)]])
    pos, der = base.position, base.derivatives
    target = replace(base, position=lambda x, y: R @ pos(x, y),
                     derivatives=(lambda x, y: der(x, y) @ R.T) if der else None,
                     name=f"rot({a:g})*{base.name}")
    return base, target, "isometry"


@_corr("helicoid-catenoid", {"t": PI / 2}, "helicoid onto a member of its associate family (t = π/2: catenoid)")
def _helicoid_catenoid(p, domain, mode):
    src = make_surface("helicoid", None, domain, mode)
    tgt = make_surface("associate", {"t": p["t"]}, domain or src.domain, mode)
    return src, tgt, "isometry"


@_corr("exp-plane", {}, "plane (u, v, 0) onto (e^u cos v, e^u sin v, 0), δ = e^u")
def _exp_plane_corr(p, domain, mode):
    dom = domain or SURFACES["exp-plane"][1]
    return make_surface("plane", None, dom, mode), make_surface("exp-plane", None, dom, mode), "conformal"


@_corr("sphere-stereographic", {}, "unit sphere in stereographic coordinates onto the plane, δ = (1+u²+v²)/2")
def _sphere_stereo(p, domain, mode):
    dom = domain or SURFACES["stereo-sphere"][1]
    return (make_surface("stereo-sphere", None, dom, mode), make_surface("stereo-plane", None, dom, mode),
            "conformal")


def make_correspondence(name, params=None, domain=None, mode="analytic"):
    p = _resolve(CORRESPONDENCES, "correspondence", name, params)
    dom = Rect(*domain) if domain is not None and not isinstance(domain, Rect) else domain
    src, tgt, declared = CORRESPONDENCES[name][1](p, dom, mode)
    return SurfaceCorrespondence(src, tgt, declared, name)


def custom_correspondence(source, target, domain, mode="analytic", name="custom"):
    """Pair two catalog surfaces, each given as (id, params), over ``domain``."""
    dom = Rect(*domain) if not isinstance(domain, Rect) else domain
    src = make_surface(source[0], source[1], dom, mode)
    tgt = make_surface(target[0], target[1], dom, mode)
    return SurfaceCorrespondence(src, tgt, None, name)


def describe():
    """Catalog listing as {section: [(id, params, description)]}."""
    return {
        "surfaces": [(k, dict(v[0]), v[3]) for k, v in sorted(SURFACES.items())],
        "curves": [(k, dict(v[0]), v[2]) for k, v in sorted(CURVES.items())],
        "correspondences": [(k, dict(v[0]), v[2]) for k, v in sorted(CORRESPONDENCES.items())],
    }
