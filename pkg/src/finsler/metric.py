"""Finsler Lagrangians, their constructors, the fundamental tensor and length/energy."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from . import ad
from .bodies import ConvexBody
from .errors import (CurveLeavesDomain, DegenerateDirection, FormTooLarge,
                     OriginNotInterior, PointOutsideBody, UnboundedBody,
                     WeakMetricError, WindTooStrong)


class FinslerMetric:
    """A Lagrangian ``F(x, y)`` on ``domain x R^n``.

    ``evaluator`` must be written with the generic operations of
    :mod:`finsler.ad` so that it accepts Taylor arguments, unless
    ``taylor=False`` in which case every derivative falls back to finite
    differences.
    """

    def __init__(self, evaluator: Callable, dim: int, domains=(), *, name: str = "custom",
                 reversible: bool = False, weak: bool = False, taylor: bool = True,
                 x_independent: bool = False, info: dict | None = None,
                 outside_error: type = PointOutsideBody):
        self.outside_error = outside_error
        self.evaluator = evaluator
        self.dim = dim
        self.domains = tuple(d for d in (domains if isinstance(domains, (tuple, list)) else (domains,))
                             if d is not None)
        self.name = name
        self.reversible = reversible
        self.weak = weak
        self.taylor = taylor
        self.x_independent = x_independent
        self.info = dict(info or {})

    @property
    def domain(self) -> ConvexBody | None:
        return self.domains[0] if self.domains else None

    def in_domain(self, x) -> bool:
        xv = np.asarray(ad.value_of(x), float)
        return all(d.contains(xv) for d in self.domains)

    def __call__(self, x, y):
        if not self.in_domain(x):
            raise self.outside_error(f"{self.name}: point {np.asarray(ad.value_of(x))} is outside the domain")
        if ad.is_taylor(x, y):
            return self.evaluator(x, y)
        return float(self.evaluator(np.asarray(x, float), np.asarray(y, float)))

    def __add__(self, other: "FinslerMetric") -> "FinslerMetric":
        if other.dim != self.dim:
            raise ValueError("dimension mismatch")
        f, g = self.evaluator, other.evaluator
        return FinslerMetric(lambda x, y: f(x, y) + g(x, y), self.dim, self.domains + other.domains,
                             name=f"{self.name}+{other.name}",
                             reversible=self.reversible and other.reversible,
                             weak=self.weak and other.weak,
                             taylor=self.taylor and other.taylor,
                             x_independent=self.x_independent and other.x_independent)

    def squared(self) -> Callable:
        def L(x, y):
            v = self(x, y)
            return v * v
        return L

    def __repr__(self) -> str:
        return f"FinslerMetric({self.name!r}, dim={self.dim})"


# ---- constructors --------------------------------------------------------

def euclidean(n: int) -> FinslerMetric:
    return FinslerMetric(lambda x, y: ad.sqrt(ad.dot(y, y)), n, name="euclidean",
                         reversible=True, x_independent=True)


def minkowski(body: ConvexBody) -> FinslerMetric:
    """Gauge of a convex body containing the origin, used as a constant norm."""
    if not body.bounded:
        raise UnboundedBody("a Minkowski norm needs a bounded unit ball")
    origin = np.zeros(body.dim)
    if not body.contains(origin):
        raise OriginNotInterior("the unit ball must contain the origin in its interior")
    f = lambda x, y: body.inverse_hit(origin, y)
    return FinslerMetric(f, body.dim, name="minkowski", x_independent=True,
                         reversible=False, info={"unit_ball": body})


def riemannian(metric_tensor: Callable, n: int, domains=(), name: str = "riemannian") -> FinslerMetric:
    """``F = sqrt(y^T a(x) y)``; ``metric_tensor(x, y)`` returns the quadratic form value."""
    return FinslerMetric(lambda x, y: ad.sqrt(metric_tensor(x, y)), n, domains,
                         name=name, reversible=True)


def _as_field(obj, kind: str):
    """Wrap constant arrays as generic (x, y) -> scalar fields."""
    if callable(obj):
        return obj
    arr = np.asarray(obj, float)
    if kind == "quad":
        return lambda x, y: ad.dot(y, arr @ y)
    return lambda x, y: ad.dot(y, arr)


def randers(quad_form, form, n: int, domains=(), probes=None, name: str = "randers") -> FinslerMetric:
    """``F(x, y) = sqrt(a_x(y, y)) + theta_x(y)``.

    ``quad_form`` and ``form`` are either constant arrays or generic
    callables ``(x, y) -> a_x(y, y)`` and ``(x, y) -> theta_x(y)``.  The
    condition ``|theta|_a < 1`` is checked at the ``probes`` (default: the
    origin or the domain center).
    """
    a = _as_field(quad_form, "quad")
    th = _as_field(form, "form")
    if probes is None:
        doms = domains if isinstance(domains, (tuple, list)) else (domains,)
        doms = [d for d in doms if d is not None]
        probes = [doms[0].center if doms else np.zeros(n)]
    for x in np.atleast_2d(probes):
        e = np.eye(n)[0]
        A = 0.5 * ad.hess_y(a, x, e)
        theta = ad.grad_y(th, x, e)
        if np.linalg.eigvalsh(A).min() <= 0:
            raise FormTooLarge("quadratic part is not positive definite")
        norm = math.sqrt(theta @ np.linalg.solve(A, theta))
        if norm >= 1:
            raise FormTooLarge(f"|theta|_a = {norm:.6g} >= 1 at {x}")
    return FinslerMetric(lambda x, y: ad.sqrt(a(x, y)) + th(x, y), n, domains, name=name,
                         x_independent=not callable(quad_form) and not callable(form))


def reverse(F: FinslerMetric) -> FinslerMetric:
    """``F*(x, y) = F(x, -y)``."""
    if F.info.get("reverse_of") is not None:
        return F.info["reverse_of"]
    if F.reversible:
        return F
    f = F.evaluator
    R = FinslerMetric(lambda x, y: f(x, -y), F.dim, F.domains, name=f"reverse-{F.name}",
                      weak=F.weak, taylor=F.taylor, x_independent=F.x_independent,
                      info={"reverse_of": F})
    return R


def zermelo(F: FinslerMetric, wind: Callable, name: str | None = None) -> FinslerMetric:
    """Zermelo transform: ``F_Z`` with ``F(x, y / F_Z(x, y) + Z(x)) = 1``.

    ``wind`` must be generic in ``x``.  A closed form is used when ``F`` is
    Euclidean; otherwise the defining identity is solved by bracketing and
    its Taylor jet by implicit refinement.
    """
    n = F.dim

    def check(x):
        Zv = np.asarray(ad.value_of(wind(ad.value_of(x))), float)
        if F(ad.value_of(x), Zv) >= 1:
            raise WindTooStrong(f"F(x, Z(x)) >= 1 at {np.asarray(ad.value_of(x))}")

    if F.name == "euclidean":
        def f(x, y):
            check(x)
            Z = wind(x)
            zy = ad.dot(y, Z)
            c = 1 - ad.dot(Z, Z)
            return (zy + ad.sqrt(zy * zy + c * ad.dot(y, y))) / c
    else:
        base = F.evaluator

        def f(x, y):
            check(x)
            xv, yv = ad.value_of(x), np.asarray(ad.value_of(y), float)
            Zv = np.asarray(ad.value_of(wind(xv)), float)
            if not np.any(yv):
                return 0.0
            r = lambda u: float(base(xv, yv / u + Zv)) - 1.0
            lo, hi = 1.0, 1.0
            while r(lo) <= 0:
                lo /= 2
            while r(hi) > 0:
                hi *= 2
            u0 = brentq(r, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps)
            if not ad.is_taylor(x, y):
                return u0
            w = yv / u0 + Zv
            slope = -float(ad.grad_y(base, xv, w) @ yv) / u0**2
            return ad.refine_root(lambda u, x, y: base(x, y / u + wind(x)) - 1.0, u0, slope, (x, y))

    return FinslerMetric(f, n, F.domains, name=name or f"zermelo-{F.name}", taylor=F.taylor)


# ---- fundamental tensor --------------------------------------------------

@dataclass
class FundamentalTensor:
    g: np.ndarray
    x: np.ndarray
    y: np.ndarray
    strongly_convex: bool = field(init=False)

    def __post_init__(self):
        self.strongly_convex = bool(np.linalg.eigvalsh(self.g).min() > 0)

    def inner(self, u, v) -> float:
        return float(np.asarray(u) @ self.g @ np.asarray(v))


def _require_strict(F: FinslerMetric):
    if F.weak:
        raise WeakMetricError(f"{F.name} is a weak metric; this operation needs strong convexity")


def fundamental_tensor(F: FinslerMetric, x, y, method: str | None = None) -> FundamentalTensor:
    """``g_ij = 1/2 d^2 F^2 / dy^i dy^j``."""
    _require_strict(F)
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    method = method or ("taylor" if F.taylor else "fd")
    if method == "taylor":
        g = 0.5 * ad.jet(F.squared(), x, y, 2).hessian()[F.dim:, F.dim:]
    else:
        g = 0.5 * ad.hess_y(F.squared(), x, y, method="fd")
    g = 0.5 * (g + g.T)
    return FundamentalTensor(g, x, y)


def strong_convexity_fraction(F: FinslerMetric, xs, ys) -> float:
    """Fraction of sampled (x, y) where the fundamental tensor is positive definite."""
    ok = [fundamental_tensor(F, x, y).strongly_convex for x, y in zip(xs, ys)]
    return float(np.mean(ok))


# ---- curves, length, energy ----------------------------------------------

@dataclass
class Curve:
    """Parametrized curve with its derivative on ``[a, b]``."""

    point: Callable
    velocity: Callable
    a: float = 0.0
    b: float = 1.0

    @classmethod
    def segment(cls, p, q, a: float = 0.0, b: float = 1.0) -> "Curve":
        p = np.asarray(p, float)
        q = np.asarray(q, float)
        v = (q - p) / (b - a)
        return cls(lambda t: p + (t - a) * v, lambda t: v, a, b)

    def reparametrize(self, sigma: Callable, dsigma: Callable, a: float, b: float) -> "Curve":
        return Curve(lambda t: self.point(sigma(t)),
                     lambda t: self.velocity(sigma(t)) * dsigma(t), a, b)


def _check_curve(F: FinslerMetric, curve: Curve, samples: int = 33):
    for t in np.linspace(curve.a, curve.b, samples):
        if not F.in_domain(curve.point(t)):
            raise CurveLeavesDomain(f"curve leaves the domain at t={t:.6g}")


def _integrate(f, a, b, rtol):
    val, _ = quad(f, a, b, epsabs=0.0, epsrel=rtol, limit=400)
    return val


def length(F: FinslerMetric, curve: Curve, rtol: float = 1e-10) -> float:
    _check_curve(F, curve)
    return _integrate(lambda t: F(curve.point(t), curve.velocity(t)), curve.a, curve.b, rtol)


def energy(F: FinslerMetric, curve: Curve, rtol: float = 1e-10) -> float:
    _check_curve(F, curve)
    return _integrate(lambda t: F(curve.point(t), curve.velocity(t)) ** 2, curve.a, curve.b, rtol)


def segment_length(F: FinslerMetric, p, q, rtol: float = 1e-10) -> float:
    return length(F, Curve.segment(p, q), rtol)


# ---- indicatrix ----------------------------------------------------------

def _directions(n: int, m: int) -> np.ndarray:
    if n == 1:
        return np.array([[1.0], [-1.0]] * (m // 2 + 1))[:m]
    if n == 2:
        t = 2 * np.pi * np.arange(m) / m
        return np.stack([np.cos(t), np.sin(t)], 1)
    if n == 3:
        k = np.arange(m) + 0.5
        z = 1 - 2 * k / m
        phi = np.pi * (1 + 5**0.5) * k
        r = np.sqrt(1 - z * z)
        return np.stack([r * np.cos(phi), r * np.sin(phi), z], 1)
    g = np.random.default_rng(0).normal(size=(m, n))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def indicatrix_sample(F: FinslerMetric, x, m: int) -> np.ndarray:
    """``m`` points ``xi`` with ``F(x, xi) = 1`` along spread-out directions."""
    out = []
    for u in _directions(F.dim, m):
        val = F(x, u)
        if val <= 0:
            raise DegenerateDirection(f"F vanishes along direction {u}")
        out.append(u / val)
    return np.array(out)
