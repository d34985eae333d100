from __future__ import annotations

import math

import numpy as np
import pytest

from finsler import (Ellipsoid, berwald_quadraticity_residual, christoffel, euclidean,
                     exponential, funk_geodesic, funk_metric, hilbert_geodesic,
                     hilbert_metric, integrate_geodesic, integrate_geodesic_span,
                     klein_metric, minkowski, spray)
from finsler.errors import BoundaryReached
from finsler.geodesics import geodesic_equation_residual


@pytest.fixture
def shifted_minkowski():
    return minkowski(Ellipsoid.ball([0.3, -0.1], 1.0))


def test_minkowski_spray_and_christoffel_vanish(shifted_minkowski):
    x, y = np.array([2.0, 1.0]), np.array([0.3, 0.9])
    assert np.all(spray(shifted_minkowski, x, y) == 0)
    assert np.all(christoffel(shifted_minkowski, x, y) == 0)
    G = spray(shifted_minkowski, x, y, method="fd")
    assert np.abs(G).max() < 1e-12


def test_funk_spray_is_half_F_times_y(rng, ellipse):
    F = funk_metric(ellipse)
    for x in ellipse.sample_interior(rng, 10):
        y = rng.normal(size=2)
        np.testing.assert_allclose(spray(F, x, y), 0.5 * F(x, y) * y, atol=1e-8 * np.linalg.norm(y))


def test_spray_routes_agree_and_are_two_homogeneous(rng, lse2):
    F = hilbert_metric(lse2)
    x, y = lse2.sample_interior(rng, 1)[0], rng.normal(size=2)
    G = spray(F, x, y)
    np.testing.assert_allclose(spray(F, x, y, method="christoffel"), G, atol=1e-10)
    np.testing.assert_allclose(spray(F, x, y, method="fd"), G, rtol=1e-6, atol=1e-8)
    np.testing.assert_allclose(spray(F, x, 3 * y), 9 * G, rtol=1e-10)


def test_euclidean_geodesic_is_straight():
    tr = integrate_geodesic(euclidean(2), [0.1, 0.2], [1.0, -2.0], 3.0)
    np.testing.assert_allclose(tr.x, np.array([0.1, 0.2]) + tr.s[:, None] * np.array([1.0, -2.0]), atol=1e-14)


def test_funk_geodesic_matches_closed_form(unit_disk):
    F = funk_metric(unit_disk)
    tr = integrate_geodesic(F, [0.0, 0.0], [1.0, 0.0], 3.0)
    ref = np.stack([1 - np.exp(-tr.s), 0 * tr.s], 1)
    assert np.abs(tr.x - ref).max() < 1e-6
    assert tr.speed_drift < 1e-8


def test_hilbert_geodesic_matches_closed_form(ellipse):
    F = hilbert_metric(ellipse)
    p, xi = ellipse.center + np.array([0.1, 0.0]), np.array([0.4, 0.7])
    xi = xi / F(p, xi)
    tr = integrate_geodesic_span(F, p, xi, -3.0, 3.0)
    g = hilbert_geodesic(ellipse, p, xi)
    dev = max(np.linalg.norm(x - g(s)) for s, x in zip(tr.s, tr.x))
    assert dev < 1e-6
    assert tr.s[0] == pytest.approx(-3.0) and tr.s[-1] == pytest.approx(3.0)
    mid = tr.at(0.55)[0]
    assert np.linalg.norm(mid - g(0.55)) < 1e-6


def test_backward_funk_geodesic_reaches_boundary(unit_disk):
    F = funk_metric(unit_disk)
    with pytest.raises(BoundaryReached) as info:
        integrate_geodesic(F, [0.0, 0.0], [1.0, 0.0], -5.0)
    tr = info.value.trace
    assert unit_disk.contains(tr.x[0])
    s_exit = funk_geodesic(unit_disk, np.zeros(2), np.array([1.0, 0.0])).s_min
    assert s_exit == pytest.approx(-math.log(2))
    assert tr.s[0] > s_exit - 1e-9


def test_exponential(unit_disk):
    K = klein_metric(2)
    p = np.array([0.2, -0.1])
    assert np.linalg.norm(exponential(K, p, np.array([1e-8, 0.0])) - p) < 1e-7
    xi = np.array([0.3, 0.2])
    a = exponential(K, p, 2 * xi)
    b = integrate_geodesic(K, p, xi, 2.0).x[-1]
    np.testing.assert_allclose(a, b, atol=1e-8)


def test_berwald_quadraticity(rng, unit_disk, shifted_minkowski):
    dirs = rng.normal(size=(12, 2))
    assert berwald_quadraticity_residual(klein_metric(2), np.array([0.3, 0.1]), dirs) < 1e-8
    assert berwald_quadraticity_residual(shifted_minkowski, np.array([0.3, 0.1]), dirs) == 0.0
    assert berwald_quadraticity_residual(funk_metric(unit_disk), np.array([0.3, 0.1]), dirs) > 1e-3


def test_closed_form_geodesics_solve_the_equation(ellipse):
    p, xi = np.array([0.0, -0.1]), np.array([0.5, 0.2])
    for F, g in ((funk_metric(ellipse), funk_geodesic(ellipse, p, xi)),
                 (hilbert_metric(ellipse), hilbert_geodesic(ellipse, p, xi))):
        for s in (-0.2, 0.0, 0.7):
            assert geodesic_equation_residual(F, g, s) < 1e-10
