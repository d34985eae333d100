from __future__ import annotations

import math

import numpy as np
import pytest

from finsler import ad, euclidean, funk_metric, klein_metric
from finsler.errors import NonSmoothPoint


def test_seed_reproduces_polynomial_derivatives():
    z = ad.seed([1.5, -0.5], 3)
    a, b = z[0], z[1]
    f = a**3 * b + 2 * a * b**2
    assert f.value == pytest.approx(1.5**3 * -0.5 + 2 * 1.5 * 0.25)
    np.testing.assert_allclose(f.gradient(), [3 * 1.5**2 * -0.5 + 2 * 0.25, 1.5**3 + 4 * 1.5 * -0.5])
    np.testing.assert_allclose(f.hessian(), [[6 * 1.5 * -0.5, 3 * 1.5**2 + 4 * -0.5],
                                             [3 * 1.5**2 + 4 * -0.5, 4 * 1.5]])
    T = f.tensor(3)
    assert T[0, 0, 0] == pytest.approx(6 * -0.5)
    assert T[0, 0, 1] == pytest.approx(6 * 1.5)
    assert T[0, 1, 1] == pytest.approx(4.0)
    assert T[1, 1, 1] == pytest.approx(0.0)


def test_elementary_functions_match_closed_derivatives():
    s = 0.37
    for fn, d in [
        (ad.exp, [math.exp(s)] * 4),
        (ad.sin, [math.sin(s), math.cos(s), -math.sin(s), -math.cos(s)]),
        (ad.cos, [math.cos(s), -math.sin(s), -math.cos(s), math.sin(s)]),
        (ad.log, [math.log(s), 1 / s, -1 / s**2, 2 / s**3]),
        (ad.sqrt, [math.sqrt(s), 0.5 * s**-0.5, -0.25 * s**-1.5, 0.375 * s**-2.5]),
    ]:
        np.testing.assert_allclose(ad.jet1(fn, s, 3), d, rtol=1e-13)


def test_tan_and_reciprocal():
    s = 0.3
    t = math.tan(s)
    np.testing.assert_allclose(ad.jet1(ad.tan, s, 2), [t, 1 + t * t, 2 * t * (1 + t * t)], rtol=1e-13)
    np.testing.assert_allclose(ad.jet1(lambda u: 1 / u, 2.0, 3), [0.5, -0.25, 0.25, -0.375])


def test_sqrt_of_nonpositive_is_nonsmooth():
    z = ad.seed([0.0], 2)
    with pytest.raises(NonSmoothPoint):
        ad.sqrt(z[0])


def test_grad_y_examples():
    E = euclidean(2)
    np.testing.assert_allclose(ad.grad_y(E, [7.0, -1.0], [3.0, 4.0]), [0.6, 0.8], atol=1e-15)
    q = lambda x, y: ad.dot(y, y)
    np.testing.assert_allclose(ad.grad_y(q, [0.0, 0.0], [1.0, 2.0]), [2.0, 4.0])


def test_grad_y_funk_matches_fd(unit_disk):
    F = funk_metric(unit_disk)
    x, y = np.array([0.5, 0.0]), np.array([1.0, 0.0])
    exact = ad.grad_y(F, x, y, method="taylor")
    fd = ad.grad_y(F, x, y, method="fd")
    np.testing.assert_allclose(exact, fd, atol=1e-9)


def test_hess_y_examples():
    half_sq = lambda x, y: 0.5 * ad.dot(y, y)
    np.testing.assert_allclose(ad.hess_y(half_sq, [0.3, 0.2], [1.0, -2.0]), np.eye(2), atol=1e-15)
    E = euclidean(3)
    L = lambda x, y: 0.5 * E(x, y) ** 2
    np.testing.assert_allclose(ad.hess_y(L, np.zeros(3), [1.0, 2.0, -1.0]), np.eye(3), atol=1e-14)
    K = klein_metric(2)
    LK = lambda x, y: 0.5 * K(x, y) ** 2
    np.testing.assert_allclose(ad.hess_y(LK, np.zeros(2), [0.3, 0.8]), np.eye(2), atol=1e-14)


def test_mixed_xy_vanishes_without_x_dependence():
    E = euclidean(2)
    for i in range(2):
        for j in range(2):
            assert ad.mixed_xy(E, [0.1, 0.4], [1.0, 2.0], i, j) == 0.0
            assert abs(ad.mixed_xy(E, [0.1, 0.4], [1.0, 2.0], i, j, method="fd")) < 1e-9


def test_mixed_xy_taylor_matches_fd(unit_disk):
    F = funk_metric(unit_disk)
    x, y = np.array([0.2, -0.3]), np.array([0.4, 1.1])
    for i in range(2):
        for j in range(2):
            a = ad.mixed_xy(F, x, y, i, j)
            b = ad.mixed_xy(F, x, y, i, j, method="fd")
            assert a == pytest.approx(b, abs=1e-7)


def test_fd_hessian_of_quadratic_is_exact():
    A = np.array([[2.0, 0.5, 0.0], [0.5, 1.0, -0.3], [0.0, -0.3, 3.0]])
    f = lambda z: 0.5 * z @ A @ z
    np.testing.assert_allclose(ad.fd_hessian(f, np.array([0.2, -1.0, 0.7])), A, atol=1e-8)


def test_refine_root_matches_implicit_function():
    # t(a) solves t^3 + a t - 1 = 0; dt/da = -t / (3 t^2 + a)
    a0 = 0.7
    from scipy.optimize import brentq
    t0 = brentq(lambda t: t**3 + a0 * t - 1, 0, 2, xtol=1e-16)
    a = ad.seed([a0], 3)
    t = ad.refine_root(lambda t, a: t**3 + a[0] * t - 1, t0, 3 * t0**2 + a0, (a,))
    dt = -t0 / (3 * t0**2 + a0)
    assert t.value == pytest.approx(t0, abs=1e-15)
    assert t.gradient()[0] == pytest.approx(dt, rel=1e-12)
    h = 1e-4
    roots = [brentq(lambda u, aa=aa: u**3 + aa * u - 1, 0, 2, xtol=1e-16) for aa in (a0 - h, a0, a0 + h)]
    d2 = (roots[0] - 2 * roots[1] + roots[2]) / h**2
    assert t.hessian()[0, 0] == pytest.approx(d2, rel=1e-5)
