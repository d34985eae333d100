from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from finsler import (Ellipsoid, ad, fundamental_tensor, funk_distance, funk_metric,
                     hilbert_distance, hilbert_geodesic, hilbert_metric,
                     reverse_funk_distance, spray)
from finsler.verification import skew_ellipsoid, smooth_polytope

BODIES = {"ellipse": skew_ellipsoid(2), "lse": smooth_polytope(2)}

unit = st.floats(-1.0, 1.0, allow_nan=False)
coords = st.tuples(unit, unit)
direction = st.tuples(st.floats(-3, 3), st.floats(-3, 3)).filter(lambda v: math.hypot(*v) > 1e-2)
body_name = st.sampled_from(sorted(BODIES))
fast = settings(max_examples=25, deadline=None)


def inside(body, u, shrink=0.85):
    """Map a point of the square [-1, 1]^2 into the shrunk body along rays from its center."""
    u = np.asarray(u, float)
    r = float(np.linalg.norm(u))
    if r < 1e-6:
        return body.center.copy()
    d = u / r
    return body.center + shrink * min(r, 1.0) * body.ray_hit(body.center, d) * d


@fast
@given(body_name, coords, direction, st.floats(0.1, 10.0))
def test_lagrangians_are_positively_homogeneous(name, u, y, lam):
    body = BODIES[name]
    x = inside(body, u)
    y = np.asarray(y)
    for F in (funk_metric(body), hilbert_metric(body)):
        assert F(x, lam * y) == pytest.approx(lam * F(x, y), rel=1e-12)


@fast
@given(body_name, coords, coords, coords)
def test_triangle_inequality(name, a, b, c):
    body = BODIES[name]
    p, q, r = (inside(body, v) for v in (a, b, c))
    for d in (funk_distance, hilbert_distance):
        assert d(body, p, r) <= d(body, p, q) + d(body, q, r) + 1e-12


@fast
@given(body_name, coords, coords)
def test_reverse_funk_swaps_arguments(name, a, b):
    body = BODIES[name]
    p, q = inside(body, a), inside(body, b)
    assert reverse_funk_distance(body, p, q) == pytest.approx(funk_distance(body, q, p), abs=1e-12)
    assert hilbert_distance(body, p, q) == pytest.approx(
        0.5 * (funk_distance(body, p, q) + funk_distance(body, q, p)), abs=1e-12)


@fast
@given(body_name, coords, coords, st.floats(0.3, 3.0), st.floats(-2, 2), st.floats(-2, 2))
def test_distances_are_affinely_invariant(name, a, b, scale, sx, sy):
    body = BODIES[name]
    M = np.array([[scale, 0.4], [-0.3, 1.0]])
    shift = np.array([sx, sy])
    image = body.affine_image(M, shift)
    p, q = inside(body, a), inside(body, b)
    for d in (funk_distance, hilbert_distance):
        assert d(image, M @ p + shift, M @ q + shift) == pytest.approx(d(body, p, q), abs=1e-9)


@fast
@given(body_name, coords, direction, st.floats(-4.0, 4.0))
def test_hilbert_geodesic_reproduces_arclength(name, u, xi, s):
    body = BODIES[name]
    p = inside(body, u)
    g = hilbert_geodesic(body, p, np.asarray(xi))
    assert hilbert_distance(body, p, g(s)) == pytest.approx(abs(s), abs=1e-9)


@fast
@given(body_name, coords, direction, st.floats(0.2, 5.0))
def test_homogeneity_of_tensor_and_spray(name, u, y, lam):
    body = BODIES[name]
    x = inside(body, u)
    y = np.asarray(y)
    F = hilbert_metric(body)
    g = fundamental_tensor(F, x, y).g
    np.testing.assert_allclose(fundamental_tensor(F, x, lam * y).g, g, rtol=1e-10, atol=1e-12)
    G = spray(F, x, y)
    np.testing.assert_allclose(spray(F, x, lam * y), lam**2 * G, rtol=1e-9, atol=1e-12)


exprs = [
    lambda a, b: a * b + ad.sin(a) / (2 + b * b),
    lambda a, b: ad.exp(a - b) * ad.sqrt(1 + a * a),
    lambda a, b: ad.log(3 + ad.cos(a * b)) - a**3,
    lambda a, b: (a + 2) ** 2.5 / (1 + ad.exp(b)),
]


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(range(len(exprs))), st.floats(-1.5, 1.5), st.floats(-1.5, 1.5))
def test_taylor_arithmetic_matches_float_arithmetic(k, a, b):
    f = exprs[k]
    z = ad.seed([a, b], 2)
    t = f(z[0], z[1])
    assert t.value == pytest.approx(f(a, b), rel=1e-13, abs=1e-14)
    fd = ad.fd_gradient(lambda w: f(w[0], w[1]), np.array([a, b]))
    np.testing.assert_allclose(t.gradient(), fd, rtol=1e-7, atol=1e-8)
    fh = ad.fd_hessian(lambda w: f(w[0], w[1]), np.array([a, b]))
    np.testing.assert_allclose(t.hessian(), fh, rtol=1e-5, atol=1e-6)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.2, 2.0), st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1))
def test_ellipsoid_gauge_is_affine_invariant(r, cx, cy, ux, uy):
    ball = Ellipsoid.ball([cx, cy], r)
    x = np.array([cx, cy]) + 0.5 * r * np.array([ux, uy]) / max(1.0, math.hypot(ux, uy))
    xi = np.array([1.0, 0.3])
    t = ball.ray_hit(x, xi)
    assume(np.isfinite(t))
    assert np.linalg.norm(x + t * xi - np.array([cx, cy])) == pytest.approx(r, rel=1e-12)
