from __future__ import annotations

import math

import numpy as np
import pytest

from finsler import (Curve, Ellipsoid, HalfSpace, distance_matrix, funk_distance,
                     funk_geodesic, funk_metric, hilbert_ball_convexity_probe,
                     hilbert_distance, hilbert_geodesic, hilbert_metric, klein_metric,
                     length, reverse_funk_distance, reverse_funk_metric,
                     spherical_metric)
from finsler.errors import EscapingDirection, OutsideUnitBall, UnboundedBody

# frozen closed forms for the unit disk with p = 0, q = (0.5, 0)
LOG2 = 0.6931471805599453
LOG15 = 0.4054651081081644
HALF_LOG3 = 0.5493061443340549


def test_funk_lagrangian_examples(unit_disk):
    F = funk_metric(unit_disk)
    xi = np.array([0.3, -0.4])
    assert F([0.0, 0.0], xi) == pytest.approx(0.5)
    assert F([0.5, 0.0], [1.0, 0.0]) == pytest.approx(2.0)
    assert (0.5 + math.sqrt(0.25 + 0.75)) / 0.75 == pytest.approx(2.0)
    H = funk_metric(HalfSpace(np.array([1.0, 0.0]), 1.0))
    assert H([0.0, 0.0], [0.0, 1.0]) == 0.0
    assert H([0.0, 0.0], [-1.0, 0.0]) == 0.0
    assert H([0.5, 0.0], [1.0, 3.0]) == pytest.approx(2.0)


def test_distance_examples(unit_disk):
    p, q = np.zeros(2), np.array([0.5, 0.0])
    assert funk_distance(unit_disk, p, p) == 0.0
    assert funk_distance(unit_disk, p, q) == pytest.approx(LOG2, abs=1e-14)
    assert reverse_funk_distance(unit_disk, p, q) == pytest.approx(LOG15, abs=1e-14)
    assert reverse_funk_distance(unit_disk, q, q) == 0.0
    assert hilbert_distance(unit_disk, p, q) == pytest.approx(HALF_LOG3, abs=1e-14)
    assert hilbert_distance(unit_disk, p, q) == pytest.approx(math.atanh(0.5), abs=1e-14)
    z = np.array([0.25, 0.0])
    assert funk_distance(unit_disk, p, z) + funk_distance(unit_disk, z, q) == pytest.approx(
        funk_distance(unit_disk, p, q), abs=1e-12)


def test_distances_match_quadrature(unit_disk):
    p, q = np.zeros(2), np.array([0.5, 0.0])
    seg = Curve.segment(p, q)
    assert length(funk_metric(unit_disk), seg) == pytest.approx(LOG2, abs=1e-8)
    assert length(reverse_funk_metric(unit_disk), seg) == pytest.approx(LOG15, abs=1e-8)
    assert length(klein_metric(2), seg) == pytest.approx(HALF_LOG3, abs=1e-8)


def test_reverse_and_symmetry_identities(rng, ellipse, lse2):
    for body in (ellipse, lse2):
        pts = body.sample_interior(rng, 20)
        for p, q in zip(pts[::2], pts[1::2]):
            assert reverse_funk_distance(body, p, q) == pytest.approx(funk_distance(body, q, p), abs=1e-13)
            assert hilbert_distance(body, p, q) == pytest.approx(hilbert_distance(body, q, p), abs=1e-13)


def test_escaping_ray_gives_zero_funk_distance():
    H = HalfSpace(np.array([1.0, 0.0]), 1.0)
    assert funk_distance(H, [0.0, 0.0], [-5.0, 2.0]) == 0.0
    with pytest.raises(UnboundedBody):
        hilbert_metric(H)


def test_hilbert_projective_invariance(rng, unit_disk):
    v = 0.6

    def boost(x):
        d = 1 + v * x[0]
        return np.array([(x[0] + v) / d, x[1] * math.sqrt(1 - v * v) / d])

    pts = unit_disk.sample_interior(rng, 20)
    for p, q in zip(pts[::2], pts[1::2]):
        assert hilbert_distance(unit_disk, boost(p), boost(q)) == pytest.approx(
            hilbert_distance(unit_disk, p, q), abs=1e-10)


def test_hilbert_agrees_with_klein(rng, unit_disk):
    H, K = hilbert_metric(unit_disk), klein_metric(2)
    for x in unit_disk.sample_interior(rng, 20):
        y = rng.normal(size=2)
        assert H(x, y) == pytest.approx(K(x, y), rel=1e-12)
    with pytest.raises(OutsideUnitBall):
        K([1.0, 0.5], [1.0, 0.0])


def test_klein_and_spherical_at_origin(rng):
    xi = rng.normal(size=3)
    assert klein_metric(3)(np.zeros(3), xi) == pytest.approx(np.linalg.norm(xi))
    assert spherical_metric(3)(np.zeros(3), xi) == pytest.approx(np.linalg.norm(xi))


def test_funk_geodesic(unit_disk, ellipse):
    p, xi = np.array([0.1, 0.2]), np.array([0.6, -0.3])
    for body in (unit_disk, ellipse):
        F = funk_metric(body)
        g = funk_geodesic(body, p, xi)
        np.testing.assert_allclose(g.limit(+1), p + xi / F(p, xi), atol=1e-14)
        for s in (0.0, 1.0, 2.0):
            assert F(g(s), g.velocity(s)) == pytest.approx(1.0, abs=1e-10)
        assert funk_distance(body, p, g(1.0)) == pytest.approx(1.0, abs=1e-10)
    H = HalfSpace(np.array([1.0, 0.0]), 1.0)
    with pytest.raises(EscapingDirection):
        funk_geodesic(H, [0.0, 0.0], [-1.0, 0.0])


def test_hilbert_geodesic(unit_disk, ellipse):
    p, xi = np.array([0.1, 0.2]), np.array([0.6, -0.3])
    for body in (unit_disk, ellipse):
        g = hilbert_geodesic(body, p, xi)
        np.testing.assert_allclose(g.limit(+1), body.boundary_point(p, xi), atol=1e-12)
        np.testing.assert_allclose(g.limit(-1), body.boundary_point(p, -xi), atol=1e-12)
        for s in (-1.0, 1.0):
            assert hilbert_distance(body, p, g(s)) == pytest.approx(1.0, abs=1e-10)
        assert hilbert_distance(body, p, g(8.0)) == pytest.approx(8.0, rel=1e-7)
    sym = hilbert_geodesic(unit_disk, np.zeros(2), np.array([1.0, 0.0]))
    for s in (0.3, 1.7):
        assert sym.phi(-s) == pytest.approx(-sym.phi(s), abs=1e-15)


def test_convexity_probe(unit_disk, lse2, rng):
    assert hilbert_ball_convexity_probe(unit_disk, [0.2, 0.1], 1.0, 100, rng)
    assert hilbert_ball_convexity_probe(lse2, lse2.center, 1.5, 500, rng)
    assert hilbert_ball_convexity_probe(lse2, lse2.center, 0.0)


def test_distance_matrix_thread_independent(ellipse, rng, monkeypatch):
    pts = ellipse.sample_interior(rng, 6)
    monkeypatch.setenv("FINSLER_THREADS", "1")
    a = distance_matrix(ellipse, pts, "funk")
    monkeypatch.setenv("FINSLER_THREADS", "4")
    b = distance_matrix(ellipse, pts, "funk")
    np.testing.assert_array_equal(a, b)
    assert np.all(np.diag(a) == 0)
    h = distance_matrix(ellipse, pts, "hilbert")
    np.testing.assert_allclose(h, h.T, atol=1e-13)
