"""Funk (tautological) and Hilbert geometries: Lagrangians, distances, geodesics."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import ad
from .bodies import ConvexBody, Ellipsoid
from .errors import EscapingDirection, OutsideUnitBall, UnboundedBody
from .metric import FinslerMetric


# ---- Lagrangians ---------------------------------------------------------

def funk_metric(body: ConvexBody) -> FinslerMetric:
    """``F_f(x, y) = 1 / t*`` where ``x + t* y`` is the boundary hit."""
    return FinslerMetric(body.inverse_hit, body.dim, (body,), name="funk",
                         weak=not body.bounded, info={"kind": "funk", "body": body})


def reverse_funk_metric(body: ConvexBody) -> FinslerMetric:
    return FinslerMetric(lambda x, y: body.inverse_hit(x, -y), body.dim, (body,), name="reverse-funk",
                         weak=not body.bounded, info={"kind": "reverse-funk", "body": body})


def hilbert_metric(body: ConvexBody) -> FinslerMetric:
    """Arithmetic symmetrization ``(F_f(x, y) + F_f(x, -y)) / 2``."""
    if not body.bounded:
        raise UnboundedBody("the Hilbert metric needs a bounded body")
    f = lambda x, y: 0.5 * (body.inverse_hit(x, y) + body.inverse_hit(x, -y))
    return FinslerMetric(f, body.dim, (body,), name="hilbert", reversible=True,
                         info={"kind": "hilbert", "body": body})


def klein_metric(n: int = 2) -> FinslerMetric:
    """Closed-form Klein model of the hyperbolic metric in the unit ball."""

    def f(x, y):
        c = 1 - ad.dot(x, x)
        xy = ad.dot(x, y)
        return ad.sqrt(c * ad.dot(y, y) + xy * xy) / c

    return FinslerMetric(f, n, (Ellipsoid.ball(dim=n),), name="klein", reversible=True,
                         outside_error=OutsideUnitBall, info={"kind": "klein"})


def spherical_metric(n: int = 2) -> FinslerMetric:
    """Round metric of the hemisphere in gnomonic (central) projection."""

    def f(x, y):
        c = 1 + ad.dot(x, x)
        xy = ad.dot(x, y)
        return ad.sqrt(c * ad.dot(y, y) - xy * xy) / c

    return FinslerMetric(f, n, name="spherical", reversible=True, info={"kind": "spherical"})


# ---- distances -----------------------------------------------------------

def _forward_log_ratio(body: ConvexBody, p, q) -> float:
    """log(|a-p| / |a-q|), a the boundary hit of the ray from p through q."""
    xi = q - p
    t = body.ray_hit(p, xi)
    if not np.isfinite(t):
        return 0.0
    if t < 2.0:
        # q is near the boundary: t - 1 would cancel, so read |a-q| off q's own ray
        return math.log(t / body.ray_hit(q, xi))
    return -math.log1p(-1.0 / t)


def _backward_log_ratio(body: ConvexBody, p, q) -> float:
    """log(|b-q| / |b-p|), b the boundary hit of the ray from q through p."""
    t = body.ray_hit(p, p - q)
    if not np.isfinite(t):
        return 0.0
    return math.log1p(1.0 / t)


def _prep(body, p, q):
    p = np.asarray(p, float)
    q = np.asarray(q, float)
    body._require_inside(p)
    body._require_inside(q)
    return p, q


def funk_distance(body: ConvexBody, p, q) -> float:
    p, q = _prep(body, p, q)
    if np.array_equal(p, q):
        return 0.0
    return _forward_log_ratio(body, p, q)


def reverse_funk_distance(body: ConvexBody, p, q) -> float:
    """Reverse Funk distance, computed from the ray leaving p away from q."""
    p, q = _prep(body, p, q)
    if np.array_equal(p, q):
        return 0.0
    return _backward_log_ratio(body, p, q)


def hilbert_distance(body: ConvexBody, p, q) -> float:
    if not body.bounded:
        raise UnboundedBody("the Hilbert distance needs a bounded body")
    p, q = _prep(body, p, q)
    if np.array_equal(p, q):
        return 0.0
    return 0.5 * (_forward_log_ratio(body, p, q) + _backward_log_ratio(body, p, q))


DISTANCES = {"funk": funk_distance, "reverse-funk": reverse_funk_distance, "hilbert": hilbert_distance}


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("FINSLER_THREADS", "1")))
    except ValueError:
        return 1


def distance_matrix(body: ConvexBody, points, kind: str = "hilbert") -> np.ndarray:
    """Pairwise distances; rows are sources, columns targets."""
    d = DISTANCES[kind]
    pts = np.asarray(points, float)
    m = len(pts)
    pairs = [(i, j) for i in range(m) for j in range(m)]
    with ThreadPoolExecutor(thread_count()) as pool:
        vals = list(pool.map(lambda ij: d(body, pts[ij[0]], pts[ij[1]]), pairs))
    return np.array(vals).reshape(m, m)


# ---- closed-form geodesics -----------------------------------------------

@dataclass
class ProjectiveGeodesic:
    """Unit-speed geodesic ``s -> p + phi(s) xi`` of a projectively flat metric."""

    p: np.ndarray
    xi: np.ndarray
    phi: Callable  # generic in s
    s_min: float = -math.inf
    s_max: float = math.inf

    def dphi(self, s: float) -> float:
        return float(ad.jet1(self.phi, s, 1)[1])

    def __call__(self, s):
        return self.p + float(ad.value_of(self.phi(s))) * self.xi

    def point(self, s):
        return self(s)

    def velocity(self, s):
        return self.dphi(s) * self.xi

    def limit(self, sign: int = 1) -> np.ndarray:
        big = 745.0 * sign
        return self.p + float(self.phi(big)) * self.xi


def funk_geodesic(body: ConvexBody, p, xi) -> ProjectiveGeodesic:
    """Forward unit-speed Funk geodesic, ``phi(s) = (1 - e^-s) / F_f(p, xi)``."""
    p = np.asarray(p, float)
    xi = np.asarray(xi, float)
    F = float(body.inverse_hit(p, xi))
    if F == 0:
        raise EscapingDirection("the ray from p along xi never meets the boundary")
    # the reverse direction leaves the body at phi = -1/F_f(p,-xi)
    Fr = float(body.inverse_hit(p, -xi))
    s_min = -math.log1p(F / Fr) if Fr > 0 else -math.inf
    return ProjectiveGeodesic(p, xi, lambda s: (1 - ad.exp(-s)) / F, s_min=s_min)


def hilbert_geodesic(body: ConvexBody, p, xi) -> ProjectiveGeodesic:
    """Unit-speed Hilbert geodesic through p with initial direction xi."""
    if not body.bounded:
        raise UnboundedBody("the Hilbert geodesic needs a bounded body")
    p = np.asarray(p, float)
    xi = np.asarray(xi, float)
    F = float(body.inverse_hit(p, xi))
    Fr = float(body.inverse_hit(p, -xi))

    def phi(s):
        # divide through by e^|s| to stay finite for large |s|
        if ad.value_of(s) >= 0:
            e = ad.exp(-2 * s)
            return (1 - e) / (F + Fr * e)
        e = ad.exp(2 * s)
        return (e - 1) / (F * e + Fr)

    return ProjectiveGeodesic(p, xi, phi)


# ---- metric-ball convexity -----------------------------------------------

@dataclass
class ProbeResult:
    ok: bool
    trials: int
    witness: tuple | None = None

    def __bool__(self) -> bool:
        return self.ok


def hilbert_ball_convexity_probe(body: ConvexBody, center, radius: float, trials: int = 200,
                                 rng: np.random.Generator | None = None) -> ProbeResult:
    """Check that midpoints of pairs in a Hilbert metric ball stay in the ball."""
    rng = np.random.default_rng(0) if rng is None else rng
    center = np.asarray(center, float)
    if radius <= 0:
        return ProbeResult(True, 0)

    def sample():
        u = rng.normal(size=body.dim)
        s = radius * rng.uniform() ** (1 / body.dim)
        return hilbert_geodesic(body, center, u / np.linalg.norm(u))(s)

    for _ in range(trials):
        a, b = sample(), sample()
        m = 0.5 * (a + b)
        dm = hilbert_distance(body, center, m)
        if dm > radius * (1 + 1e-10) + 1e-12:
            return ProbeResult(False, trials, (a, b, m, dm))
    return ProbeResult(True, trials)
