"""Christoffel symbols, sprays and the geodesic equation.

Conventions: ``L = F**2``, ``g = 1/2 L_yy`` and the spray satisfies

    G^k = 1/4 g^{km} (L_{y^m x^j} y^j - L_{x^m}) = 1/2 gamma^k_ij y^i y^j,

so geodesics solve ``x' = y, y' = -2 G(x, y)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import ad
from .errors import (BoundaryReached, SingularFundamentalTensor,
                     StepUnderflow)
from .metric import FinslerMetric, _require_strict


def _cholesky(g):
    try:
        return np.linalg.cholesky(g)
    except np.linalg.LinAlgError as exc:
        raise SingularFundamentalTensor(f"fundamental tensor is not positive definite: {exc}") from exc


def _spd_solve(g, b):
    c = _cholesky(g)
    return np.linalg.solve(c.T, np.linalg.solve(c, b))


def _method(F: FinslerMetric, method: str | None) -> str:
    return method or ("taylor" if F.taylor else "fd")


def _fd_step(F, x, y) -> float:
    """FD step that keeps the stencil inside the domain."""
    h = 2e-3 * max(1.0, float(np.linalg.norm(y)))
    for d in F.domains:
        if d.bounded:
            lo, hi = d.bounding_box()
            h = min(h, 1e-3 * float(np.linalg.norm(hi - lo)))
    return h


def _l_derivatives(F: FinslerMetric, x, y, method: str | None = None):
    """Gradient and Hessian of L = F^2 in (x, y) at the base point."""
    L = F.squared()
    if _method(F, method) == "taylor":
        J = ad.jet(L, x, y, 2)
        return J.gradient(), J.hessian()
    n = F.dim
    z = np.concatenate([x, y])
    h = _fd_step(F, x, y)
    f = lambda w: float(L(w[:n], w[n:]))
    _, grad, hess = ad.fd_vector_derivatives(f, z, h)
    return grad, hess


def spray(F: FinslerMetric, x, y, method: str | None = None) -> np.ndarray:
    """Spray coefficients ``G^k(x, y)``.

    ``method`` is ``"taylor"`` (exact jets), ``"fd"`` (finite differences of
    ``F**2``) or ``"christoffel"`` (contraction of the formal Christoffel
    symbols, an independent route).
    """
    _require_strict(F)
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    if F.x_independent:
        return np.zeros(F.dim)
    if method == "christoffel":
        return 0.5 * np.einsum("kij,i,j->k", christoffel(F, x, y), y, y)
    n = F.dim
    grad, hess = _l_derivatives(F, x, y, method)
    g = 0.5 * hess[n:, n:]
    rhs = hess[n:, :n] @ y - grad[:n]
    return 0.25 * _spd_solve(g, rhs)


def christoffel(F: FinslerMetric, x, y) -> np.ndarray:
    """Formal Christoffel symbols ``gamma[k, i, j]``, symmetric in ``(i, j)``."""
    _require_strict(F)
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    n = F.dim
    if F.x_independent:
        return np.zeros((n, n, n))
    J = ad.jet(F.squared(), x, y, 3)
    T = J.tensor(3)
    g = 0.5 * J.hessian()[n:, n:]
    dg = 0.5 * T[n:, n:, :n]  # dg[i, m, j] = d g_im / d x^j
    lower = np.empty((n, n, n))
    for i in range(n):
        for j in range(n):
            for m in range(n):
                lower[i, j, m] = dg[i, m, j] + dg[j, m, i] - dg[i, j, m]
    ginv = _spd_solve(g, np.eye(n))
    gamma = 0.5 * np.einsum("km,ijm->kij", ginv, lower)
    return 0.5 * (gamma + gamma.transpose(0, 2, 1))


@dataclass
class SprayJet:
    """Order-2 jet of the spray in (x, y) plus the base-point tensors."""

    G: ad.Taylor  # shape (n,), basis of order 2 in 2n variables
    g: np.ndarray
    n: int

    @property
    def value(self) -> np.ndarray:
        return self.G.value

    def gradient(self) -> np.ndarray:
        return self.G.gradient()

    def hessian(self) -> np.ndarray:
        return self.G.hessian()


def spray_jet(F: FinslerMetric, x, y) -> SprayJet:
    """Exact order-2 jet of ``G`` from one order-4 jet of ``F**2``."""
    _require_strict(F)
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    n = F.dim
    J = ad.jet(F.squared(), x, y, 4)
    dy = [J.partial(n + m) for m in range(n)]
    g = [[0.5 * dy[a].partial(n + b) for b in range(n)] for a in range(n)]
    _, Y = ad.variables(x, y, 2)
    M = [sum((dy[a].partial(j) * Y[j] for j in range(n)), ad.Taylor.constant(0.0, Y.basis))
         for a in range(n)]
    rhs = [0.25 * (M[a] - J.partial(a).truncate(2)) for a in range(n)]
    g0 = np.array([[g[a][b].value for b in range(n)] for a in range(n)])
    g0_inv = np.linalg.inv(_cholesky(g0) @ _cholesky(g0).T)
    # solve g G = rhs: G <- g0^{-1}(rhs - (g - g0) G), exact after order+1 sweeps
    G = [ad.Taylor.constant(0.0, Y.basis) for _ in range(n)]
    for _ in range(3):
        resid = []
        for a in range(n):
            r = rhs[a]
            for b in range(n):
                nil = g[a][b] - g[a][b].value
                r = r - nil * G[b]
            resid.append(r)
        G = [sum((g0_inv[a, b] * resid[b] for b in range(n)), ad.Taylor.constant(0.0, Y.basis))
             for a in range(n)]
    return SprayJet(ad.stack(G, Y.basis), g0, n)


# ---- geodesic integration ------------------------------------------------

# Dormand-Prince 5(4) tableau
_C = np.array([0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1, 1])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
_B4 = np.array([5179 / 57600, 0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])


@dataclass
class GeodesicTrace:
    """Samples ``(s, x, y)`` of a geodesic, ``s`` strictly increasing."""

    s: np.ndarray
    x: np.ndarray
    y: np.ndarray
    dy: np.ndarray
    speed: np.ndarray
    stats: dict = field(default_factory=dict)

    @property
    def speed_drift(self) -> float:
        return float(np.max(np.abs(self.speed - self.speed[np.argmin(np.abs(self.s))])))

    def at(self, s: float):
        """Cubic Hermite dense output of (x, y) at ``s``."""
        if not self.s[0] <= s <= self.s[-1]:
            raise ValueError(f"s={s} outside the integrated range [{self.s[0]}, {self.s[-1]}]")
        i = int(np.clip(np.searchsorted(self.s, s) - 1, 0, len(self.s) - 2))
        s0, s1 = self.s[i], self.s[i + 1]
        h = s1 - s0
        t = (s - s0) / h
        h00, h10 = 2 * t**3 - 3 * t**2 + 1, t**3 - 2 * t**2 + t
        h01, h11 = -2 * t**3 + 3 * t**2, t**3 - t**2
        x = h00 * self.x[i] + h10 * h * self.y[i] + h01 * self.x[i + 1] + h11 * h * self.y[i + 1]
        y = h00 * self.y[i] + h10 * h * self.dy[i] + h01 * self.y[i + 1] + h11 * h * self.dy[i + 1]
        return x, y

    def join_after(self, before: "GeodesicTrace") -> "GeodesicTrace":
        """Prepend a trace ending at this one's first sample."""
        cat = lambda a, b: np.concatenate([a[:-1], b])
        return GeodesicTrace(cat(before.s, self.s), cat(before.x, self.x), cat(before.y, self.y),
                             cat(before.dy, self.dy), cat(before.speed, self.speed),
                             {k: self.stats.get(k, 0) + before.stats.get(k, 0) for k in self.stats})


def _near_boundary(F: FinslerMetric, x, y, tol: float) -> bool:
    """Euclidean distance to the boundary along the motion, relative to body size."""
    for d in F.domains:
        if not d.bounded and not np.isfinite(d.ray_hit(x, y)):
            continue
        t = d.ray_hit(x, y)
        scale = float(np.linalg.norm(np.subtract(*d.bounding_box()))) if d.bounded else 1.0
        if t * np.linalg.norm(y) < tol * scale:
            return True
    return False


def integrate_geodesic(F: FinslerMetric, p, xi, s_end: float, rtol: float = 1e-9,
                       atol: float = 1e-12, max_step: float = 0.1, method: str | None = None,
                       boundary_tol: float = 1e-6, min_step: float = 1e-14) -> GeodesicTrace:
    """Solve ``x' = y, y' = -2 G(x, y)`` from ``(p, xi)`` up to ``s = s_end``.

    Integration runs backwards when ``s_end < 0``; the returned samples are
    always sorted by increasing ``s``.  ``y`` is never renormalized.
    """
    _require_strict(F)
    p = np.asarray(p, float)
    xi = np.asarray(xi, float)
    n = F.dim
    direction = 1.0 if s_end >= 0 else -1.0
    stats = {"accepted": 0, "rejected": 0, "rhs_evals": 0}

    def rhs(z):
        if not F.in_domain(z[:n]):
            return None
        stats["rhs_evals"] += 1
        return np.concatenate([z[n:], -2.0 * spray(F, z[:n], z[n:], method)])

    z = np.concatenate([p, xi])
    k1 = rhs(z)
    if k1 is None:
        raise BoundaryReached("initial point is outside the domain")
    s = 0.0
    S, Z, D = [s], [z.copy()], [k1.copy()]
    h = direction * min(max_step, 0.01 * max(1.0, abs(s_end)))

    def finish():
        Zs = np.array(Z)
        Ds = np.array(D)
        order = slice(None) if direction > 0 else slice(None, None, -1)
        speeds = np.array([F(zz[:n], zz[n:]) for zz in Zs])
        return GeodesicTrace(np.array(S)[order], Zs[order, :n], Zs[order, n:], Ds[order, n:],
                             speeds[order], dict(stats))

    while direction * (s_end - s) > 0:
        if _near_boundary(F, z[:n], direction * z[n:], boundary_tol):
            raise BoundaryReached(f"geodesic reached the boundary at s={s:.6g}", finish())
        h = direction * min(abs(h), max_step, abs(s_end - s))
        ks = [k1]
        ok = True
        for i in range(1, 7):
            zi = z + h * sum(a * k for a, k in zip(_A[i], ks))
            ki = rhs(zi)
            if ki is None:
                ok = False
                break
            ks.append(ki)
        if ok:
            z5 = z + h * sum(b * k for b, k in zip(_B5, ks))
            z4 = z + h * sum(b * k for b, k in zip(_B4, ks))
            scale = atol + rtol * np.maximum(np.abs(z), np.abs(z5))
            err = float(np.sqrt(np.mean(((z5 - z4) / scale) ** 2)))
        else:
            err = math.inf
        if err <= 1.0:
            s += h
            z = z5
            k1 = ks[6]
            S.append(s)
            Z.append(z.copy())
            D.append(k1.copy())
            stats["accepted"] += 1
            fac = 5.0 if err == 0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
            h *= fac
        else:
            stats["rejected"] += 1
            h *= 0.2 if not np.isfinite(err) else max(0.2, 0.9 * err ** -0.25)
            if abs(h) < min_step * max(1.0, abs(s)):
                if _near_boundary(F, z[:n], direction * z[n:], math.sqrt(boundary_tol)):
                    raise BoundaryReached(f"geodesic reached the boundary at s={s:.6g}", finish())
                raise StepUnderflow(f"step size underflow at s={s:.6g}")
    return finish()


def integrate_geodesic_span(F: FinslerMetric, p, xi, s_min: float, s_max: float, **kw) -> GeodesicTrace:
    """Geodesic on ``[s_min, s_max]`` (containing 0), integrated both ways from ``p``."""
    fwd = integrate_geodesic(F, p, xi, s_max, **kw)
    if s_min >= 0:
        return fwd
    back = integrate_geodesic(F, p, xi, s_min, **kw)
    return fwd.join_after(back)


def exponential(F: FinslerMetric, p, xi, **kw) -> np.ndarray:
    """``exp_p(xi)``: the geodesic with initial velocity ``xi`` at ``s = 1``."""
    p = np.asarray(p, float)
    xi = np.asarray(xi, float)
    if not np.any(xi):
        return p.copy()
    tr = integrate_geodesic(F, p, xi, 1.0, **kw)
    return tr.x[-1]


def geodesic_equation_residual(F: FinslerMetric, curve, s: float) -> float:
    """``|x'' + 2 G(x, x')|`` for a curve with generic ``phi`` (``p + phi(s) xi``)."""
    d = ad.jet1(curve.phi, s, 2)
    x = curve.p + d[0] * curve.xi
    v = d[1] * curve.xi
    acc = d[2] * curve.xi
    return float(np.linalg.norm(acc + 2 * spray(F, x, v)))


def berwald_quadraticity_residual(F: FinslerMetric, x, directions) -> float:
    """Relative least-squares misfit of ``y -> G(x, y)`` by quadratic forms."""
    x = np.asarray(x, float)
    Y = np.asarray(directions, float)
    n = F.dim
    G = np.array([spray(F, x, y) for y in Y])
    iu = np.triu_indices(n)
    design = np.array([np.outer(y, y)[iu] for y in Y])
    if design.shape[0] < design.shape[1]:
        raise ValueError("need at least n(n+1)/2 sample directions")
    scale = float(np.mean(np.abs(G)))
    if scale < 1e-14:
        return 0.0
    coef, *_ = np.linalg.lstsq(design, G, rcond=None)
    resid = design @ coef - G
    return float(np.sqrt(np.mean(resid**2)) / scale)
