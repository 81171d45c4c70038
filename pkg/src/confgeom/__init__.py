"""Differential geometry of parametric surfaces under conformal correspondences."""
from .catalog import custom_correspondence, make_correspondence, make_curve, make_surface
from .conformal import (SurfaceCorrespondence, classify_map, christoffel_correction, dilation_field,
                        geodesic_curvature_relation, normal_component_relation,
                        osculating_image_condition, tangential_component_relation)
from .curves import (SurfaceCurve, arclength_reparam, curve_jet, frenet, geodesic_curvature_intrinsic,
                     normal_curvature, osculating_decompose)
from .errors import GeometryError, ScenarioError
from .geodesics import (GeodesicState, IntegratorConfig, conformal_geodesic_residual,
                        homothety_invariance_check, integrate_geodesic, unit_state)
from .surfaces import (Rect, SurfacePatch, christoffel, eval_jet, fundamental_forms, metric_jet,
                       surface_normal, symbolic_patch)

__version__ = "0.1.0"
