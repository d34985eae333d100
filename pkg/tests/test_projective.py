from __future__ import annotations

import math

import numpy as np
import pytest

from finsler import (Curve, Ellipsoid, ad, classify_projective_flatness,
                     distance_from_potential, euclidean, funk_metric,
                     gradient_identity_residual, hamel_potential, hamel_residual,
                     hamel_symmetry_residual, hilbert_form, hilbert_metric,
                     klein_metric, length, minkowski, projective_factor, riemannian)
from finsler.errors import SegmentLeavesDomain


@pytest.fixture
def conformal():
    return riemannian(lambda x, y: (1 + ad.dot(x, x)) ** 2 * ad.dot(y, y), 2, name="conformal")


@pytest.fixture
def mink():
    return minkowski(Ellipsoid(np.array([0.2, 0.1]), np.array([[1.5, 0.3], [0.3, 0.8]])))


def test_hamel_residuals(rng, ellipse, unit_disk, mink, conformal):
    x, y = np.array([0.2, 0.1]), np.array([0.5, -1.0])
    assert hamel_residual(mink, x, y) == 0.0
    assert hamel_symmetry_residual(mink, x, y) == 0.0
    F = funk_metric(ellipse)
    for x in ellipse.sample_interior(rng, 10):
        y = rng.normal(size=2)
        assert hamel_residual(F, x, y) < 1e-8
    assert hamel_symmetry_residual(funk_metric(unit_disk), [0.3, 0.1], [1.0, 0.4]) < 1e-8
    assert hamel_symmetry_residual(klein_metric(2), [0.3, 0.1], [1.0, 0.4]) < 1e-8
    assert hamel_residual(conformal, [0.5, 0.3], [1.0, 0.2]) > 1e-2


def test_flatness_classification(rng, ellipse, conformal):
    assert classify_projective_flatness(hilbert_metric(ellipse), rng, samples=20).verdict == "flat"
    assert classify_projective_flatness(conformal, rng, samples=20).verdict == "non-flat"


def test_projective_factor_examples(rng, unit_disk, mink):
    Ff, Fh = funk_metric(unit_disk), hilbert_metric(unit_disk)
    for x in unit_disk.sample_interior(rng, 10):
        y = rng.normal(size=2)
        assert projective_factor(Ff, x, y) == pytest.approx(0.5 * Ff(x, y), abs=1e-9)
        assert projective_factor(Fh, x, y) == pytest.approx(0.5 * (Ff(x, y) - Ff(x, -y)), abs=1e-9)
        assert projective_factor(Fh, x, y) == pytest.approx(-projective_factor(Fh, x, -y), abs=1e-12)
    assert projective_factor(mink, [0.2, 0.2], [1.0, 0.0]) == 0.0
    y = np.array([0.3, -0.2])
    assert projective_factor(Ff, [0.1, 0.1], 2 * y) == pytest.approx(2 * projective_factor(Ff, [0.1, 0.1], y))


def test_gradient_identity(rng, unit_disk, ellipse, mink):
    assert gradient_identity_residual(mink, [0.1, 0.2], [1.0, 0.3]) == 0.0
    for F, body in ((funk_metric(unit_disk), unit_disk), (hilbert_metric(ellipse), ellipse)):
        for x in body.sample_interior(rng, 10):
            assert gradient_identity_residual(F, x, rng.normal(size=2)) < 1e-7


def test_hilbert_form(rng, unit_disk):
    np.testing.assert_allclose(hilbert_form(euclidean(2), [0, 0], [3.0, 4.0]), [0.6, 0.8])
    F = funk_metric(unit_disk)
    for x in unit_disk.sample_interior(rng, 10):
        y = rng.normal(size=2)
        assert hilbert_form(F, x, y) @ y == pytest.approx(F(x, y), abs=1e-12)


def test_length_from_hilbert_form(unit_disk):
    F = funk_metric(unit_disk)
    c = Curve(lambda t: np.array([0.5 * math.cos(t), 0.3 * math.sin(t)]),
              lambda t: np.array([-0.5 * math.sin(t), 0.3 * math.cos(t)]), 0.0, 2.0)
    from scipy.integrate import quad
    lifted, _ = quad(lambda t: hilbert_form(F, c.point(t), c.velocity(t)) @ c.velocity(t), 0.0, 2.0,
                     epsabs=0, epsrel=1e-12, limit=200)
    assert lifted == pytest.approx(length(F, c), abs=1e-9)


def test_hamel_potential_for_funk(rng, unit_disk):
    F = funk_metric(unit_disk)
    p0 = np.zeros(2)
    y = np.array([0.4, -0.9])
    x1, x2 = np.array([0.3, 0.2]), np.array([-0.4, 0.1])
    dh = hamel_potential(F, p0, x1, y) - hamel_potential(F, p0, x2, y)
    assert dh == pytest.approx(math.log(F(x1, y)) - math.log(F(x2, y)), abs=1e-8)
    grad = ad.fd_gradient(lambda z: hamel_potential(F, p0, z, y), x1)
    np.testing.assert_allclose(grad, hilbert_form(F, x1, y), atol=1e-6)
    with pytest.raises(SegmentLeavesDomain):
        hamel_potential(F, p0, np.array([1.2, 0.0]), y)


def test_hamel_potential_for_minkowski_is_linear(mink):
    y = np.array([0.7, 0.2])
    x = np.array([1.0, -2.0])
    w = hilbert_form(mink, np.zeros(2), y)
    assert hamel_potential(mink, np.zeros(2), x, y) == pytest.approx(x @ w, rel=1e-12)


def test_distance_from_potential(unit_disk):
    p, q = np.zeros(2), np.array([0.5, 0.0])
    assert distance_from_potential(funk_metric(unit_disk), p, p, q) == pytest.approx(math.log(2), abs=1e-8)
    assert distance_from_potential(hilbert_metric(unit_disk), p, p, q) == pytest.approx(
        0.5 * math.log(3), abs=1e-8)
    assert distance_from_potential(hilbert_metric(unit_disk), p, q, q) == 0.0
