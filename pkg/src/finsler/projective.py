"""Projective flatness: Hamel conditions, projective factor, Hilbert form, Hamel potentials."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from . import ad
from .errors import SegmentLeavesDomain, ZeroLagrangian
from .metric import FinslerMetric

FLAT_TOL = 1e-6
NONFLAT_TOL = 1e-3


def _jet2(F: FinslerMetric, x, y):
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    if F.taylor:
        J = ad.jet(F, x, y, 2)
        return J.value, J.gradient(), J.hessian()
    n = F.dim
    f = lambda w: float(F(w[:n], w[n:]))
    z = np.concatenate([x, y])
    h = 1e-3 * max(1.0, float(np.linalg.norm(z)))
    val, grad, hess = ad.fd_vector_derivatives(f, z, h)
    return float(val), grad, hess


def hamel_residual(F: FinslerMetric, x, y) -> float:
    """Normalized ``|y^k d2F/dx^k dy^m - dF/dx^m|``."""
    n = F.dim
    val, grad, hess = _jet2(F, x, y)
    r = np.asarray(y, float) @ hess[:n, n:] - grad[:n]
    return float(np.linalg.norm(r) / (np.linalg.norm(grad[:n]) + val))


def hamel_symmetry_residual(F: FinslerMetric, x, y) -> float:
    """Normalized asymmetry of the mixed block ``d2F/dx^j dy^m``."""
    n = F.dim
    val, grad, hess = _jet2(F, x, y)
    B = hess[:n, n:]
    scale = (np.linalg.norm(grad[:n]) + val) / np.linalg.norm(y)
    return float(np.linalg.norm(B - B.T) / scale)


@dataclass
class FlatnessVerdict:
    verdict: str  # "flat", "non-flat" or "indeterminate"
    max_residual: float
    max_symmetry_residual: float
    samples: int

    def __bool__(self) -> bool:
        return self.verdict == "flat"


def sample_base_points(F: FinslerMetric, rng: np.random.Generator, m: int) -> np.ndarray:
    dom = F.domain
    if dom is not None and dom.bounded:
        return dom.sample_interior(rng, m)
    pts = []
    while len(pts) < m:
        x = rng.uniform(-1, 1, size=F.dim)
        if F.in_domain(x):
            pts.append(x)
    return np.array(pts)


def classify_projective_flatness(F: FinslerMetric, rng: np.random.Generator | None = None,
                                 samples: int = 200, points=None) -> FlatnessVerdict:
    """Three-way verdict from Hamel residuals at sampled (x, y)."""
    rng = np.random.default_rng(0) if rng is None else rng
    xs = sample_base_points(F, rng, samples) if points is None else np.atleast_2d(points)
    r_max = s_max = 0.0
    for x in xs:
        y = rng.normal(size=F.dim)
        r_max = max(r_max, hamel_residual(F, x, y))
        s_max = max(s_max, hamel_symmetry_residual(F, x, y))
    worst = max(r_max, s_max)
    if worst < FLAT_TOL:
        v = "flat"
    elif worst > NONFLAT_TOL:
        v = "non-flat"
    else:
        v = "indeterminate"
    return FlatnessVerdict(v, r_max, s_max, len(xs))


def projective_factor(F: FinslerMetric, x, y) -> float:
    """``P = y^k dF/dx^k / (2F)``."""
    n = F.dim
    val, grad, _ = _jet2(F, x, y)
    if val <= 0:
        raise ZeroLagrangian("projective factor needs F(x, y) > 0")
    return float(np.asarray(y, float) @ grad[:n] / (2 * val))


def projective_factor_jet(F: FinslerMetric, x, y) -> tuple[ad.Taylor, ad.Taylor]:
    """Order-2 jets of ``P`` and ``F`` in (x, y), from one order-3 jet of ``F``."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    n = F.dim
    J = ad.jet(F, x, y, 3)
    if J.value <= 0:
        raise ZeroLagrangian("projective factor needs F(x, y) > 0")
    _, Y = ad.variables(x, y, 2)
    Fj = J.truncate(2)
    num = sum((J.partial(k) * Y[k] for k in range(n)), ad.Taylor.constant(0.0, Y.basis))
    return num / (2.0 * Fj), Fj


def gradient_identity_residual(F: FinslerMetric, x, y) -> float:
    """``|dF/dx^m - P dF/dy^m - F dP/dy^m|`` normalized by ``|dF/dx| + F``."""
    n = F.dim
    P, Fj = projective_factor_jet(F, x, y)
    gF, gP = Fj.gradient(), P.gradient()
    r = gF[:n] - P.value * gF[n:] - Fj.value * gP[n:]
    return float(np.linalg.norm(r) / (np.linalg.norm(gF[:n]) + Fj.value))


def hilbert_form(F: FinslerMetric, x, y) -> np.ndarray:
    """``omega_j = dF/dy^j``."""
    n = F.dim
    if F.taylor:
        return ad.jet(F, np.asarray(x, float), np.asarray(y, float), 1).gradient()[n:]
    return ad.grad_y(F, np.asarray(x, float), np.asarray(y, float), method="fd")


def hamel_potential(F: FinslerMetric, p0, x, y, rtol: float = 1e-12) -> float:
    """``h(x, y) = int_0^1 <x - p0, dF/dy(p0 + t (x - p0), y)> dt``."""
    p0 = np.asarray(p0, float)
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    if not (F.in_domain(p0) and F.in_domain(x)):
        raise SegmentLeavesDomain("both the base point and x must lie in the domain")
    u = x - p0
    if not np.any(u):
        return 0.0
    f = lambda t: float(hilbert_form(F, p0 + t * u, y) @ u)
    val, _ = quad(f, 0.0, 1.0, epsabs=1e-15, epsrel=rtol, limit=200)
    return val


def distance_from_potential(F: FinslerMetric, p0, p, q) -> float:
    """``h(q, q - p) - h(p, q - p)``, the length of the segment from p to q."""
    p = np.asarray(p, float)
    q = np.asarray(q, float)
    if np.array_equal(p, q):
        return 0.0
    y = q - p
    return hamel_potential(F, p0, q, y) - hamel_potential(F, p0, p, y)
