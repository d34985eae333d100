"""Funk and Hilbert geometries on convex domains, with general Finsler machinery."""

from __future__ import annotations

from . import ad
from .bodies import (ConvexBody, Ellipsoid, HalfSpace, LSEPolytope, Polytope,
                     body_from_spec, box, regular_polygon)
from .curvature import (Flag, RiemannCurvature, curvature_via_schwarzian,
                        flag_curvature, moebius_reconstruct, ricci,
                        riemann_curvature, scalar_sc, schwarzian)
from .errors import *  # noqa: F401,F403
from .funk import (ProjectiveGeodesic, distance_matrix, funk_distance,
                   funk_geodesic, funk_metric, hilbert_ball_convexity_probe,
                   hilbert_distance, hilbert_geodesic, hilbert_metric,
                   klein_metric, reverse_funk_distance, reverse_funk_metric,
                   spherical_metric)
from .geodesics import (GeodesicTrace, berwald_quadraticity_residual,
                        christoffel, exponential, integrate_geodesic,
                        integrate_geodesic_span, spray, spray_jet)
from .metric import (Curve, FinslerMetric, FundamentalTensor, energy,
                     euclidean, fundamental_tensor, indicatrix_sample, length,
                     minkowski, randers, reverse, riemannian, segment_length,
                     zermelo)
from .projective import (classify_projective_flatness, distance_from_potential,
                         gradient_identity_residual, hamel_potential,
                         hamel_residual, hamel_symmetry_residual,
                         hilbert_form, projective_factor)

__version__ = "0.1.0"
