"""Proper convex domains with membership and ray/boundary queries.

Every body answers three questions:

* ``contains(x)``: is ``x`` in the open domain?
* ``ray_hit(x, xi)``: the exit time ``t*`` of the ray ``x + t xi`` (``inf``
  if the ray never leaves);
* ``inverse_hit(x, xi)``: ``1 / t*``, written generically so that it also
  accepts :class:`~finsler.ad.Taylor` arguments.  This is exactly the Funk
  Lagrangian of the body, and it is how the derivative machinery sees the
  body.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, linprog

from . import ad
from .errors import (BadSpec, InvalidBody, NonSmoothPoint, PointOutsideBody,
                     UnboundedBody, UnboundedRay)

TIE_RTOL = 1e-12


class ConvexBody:
    """Common interface; subclasses fill in the geometry."""

    dim: int
    bounded: bool
    smooth: bool = False
    center: np.ndarray  # interior reference point, also the sampling center

    def contains(self, x) -> bool:
        raise NotImplementedError

    def ray_hit(self, x, xi) -> float:
        raise NotImplementedError

    def inverse_hit(self, x, xi):
        raise NotImplementedError

    def gauge_taylor(self, x, xi):
        """Exit time ``t*`` carried through Taylor arithmetic."""
        inv = self.inverse_hit(x, xi)
        if ad.value_of(inv) == 0:
            raise UnboundedRay("ray never leaves the body")
        return 1.0 / inv

    def affine_image(self, M, b) -> "ConvexBody":
        raise NotImplementedError

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        raise UnboundedBody(f"{type(self).__name__} is unbounded")

    def _require_inside(self, x):
        if not self.contains(ad.value_of(x) if ad.is_taylor(x) else x):
            raise PointOutsideBody(f"point {np.asarray(ad.value_of(x))} is not in the open domain")

    def sample_interior(self, rng: np.random.Generator, m: int, shrink: float = 0.9) -> np.ndarray:
        """``m`` uniform points of the copy of the body scaled by ``shrink`` about its center."""
        lo, hi = self.bounding_box()
        out = []
        while len(out) < m:
            z = rng.uniform(lo, hi, size=(max(4 * m, 64), self.dim))
            for p in z:
                if self.contains(p):
                    out.append(self.center + shrink * (p - self.center))
                    if len(out) == m:
                        break
        return np.array(out)

    def check_convexity(self, rng: np.random.Generator, trials: int = 200) -> bool:
        """Random-segment membership test."""
        pts = self.sample_interior(rng, 2 * trials, shrink=1.0)
        for p, q in zip(pts[::2], pts[1::2]):
            t = rng.uniform()
            if not self.contains((1 - t) * p + t * q):
                return False
        return True

    def boundary_point(self, x, xi) -> np.ndarray:
        t = self.ray_hit(x, xi)
        if not np.isfinite(t):
            raise UnboundedRay("ray never leaves the body")
        return np.asarray(x, float) + t * np.asarray(xi, float)


@dataclass(frozen=True, eq=False)
class HalfSpace(ConvexBody):
    """``{x : <normal, x> < offset}``."""

    normal: np.ndarray
    offset: float
    bounded: bool = field(default=False, init=False)

    def __post_init__(self):
        nu = np.asarray(self.normal, dtype=float)
        norm = np.linalg.norm(nu)
        if norm == 0:
            raise InvalidBody("half-space normal must be nonzero")
        object.__setattr__(self, "normal", nu)
        object.__setattr__(self, "offset", float(self.offset))
        object.__setattr__(self, "center", nu * (self.offset - 1.0) / norm**2)

    @property
    def dim(self) -> int:
        return self.normal.size

    def contains(self, x) -> bool:
        return bool(np.dot(self.normal, x) < self.offset)

    def ray_hit(self, x, xi) -> float:
        self._require_inside(x)
        d = float(np.dot(self.normal, xi))
        if d <= 0:
            return math.inf
        return (self.offset - float(np.dot(self.normal, x))) / d

    def inverse_hit(self, x, xi):
        self._require_inside(x)
        d = ad.dot(xi, self.normal)
        dv = ad.value_of(d)
        if dv < 0:
            return 0.0 * d
        if dv == 0 and ad.is_taylor(d):
            raise NonSmoothPoint("direction is parallel to the boundary hyperplane")
        return d / (self.offset - ad.dot(x, self.normal))

    def affine_image(self, M, b) -> "HalfSpace":
        Minv_t = np.linalg.inv(np.asarray(M, float)).T
        nu = Minv_t @ self.normal
        return HalfSpace(nu, self.offset + float(nu @ np.asarray(b, float)))


def _normalize_rows(normals, offsets):
    N = np.atleast_2d(np.asarray(normals, dtype=float))
    tau = np.asarray(offsets, dtype=float).reshape(-1)
    if N.shape[0] != tau.size or N.shape[0] == 0:
        raise InvalidBody("need one offset per normal and at least one half-space")
    norms = np.linalg.norm(N, axis=1)
    if np.any(norms == 0):
        raise InvalidBody("half-space normal must be nonzero")
    return N / norms[:, None], tau / norms


def _chebyshev_center(N, tau):
    """Center and radius of the largest inscribed ball (N has unit rows)."""
    n = N.shape[1]
    c = np.zeros(n + 1)
    c[-1] = -1.0
    A = np.hstack([N, np.ones((N.shape[0], 1))])
    bounds = [(None, None)] * n + [(0, 1e6)]
    res = linprog(c, A_ub=A, b_ub=tau, bounds=bounds, method="highs")
    if res.status != 0:
        raise InvalidBody(f"could not locate an interior point: {res.message}")
    return res.x[:n], res.x[-1]


def _lp_box(N, tau):
    n = N.shape[1]
    lo, hi = np.empty(n), np.empty(n)
    for i in range(n):
        for sign, arr in ((1.0, lo), (-1.0, hi)):
            c = np.zeros(n)
            c[i] = sign
            res = linprog(c, A_ub=N, b_ub=tau, bounds=[(None, None)] * n, method="highs")
            if res.status == 3:
                return None
            if res.status != 0:
                raise InvalidBody(f"bounding-box LP failed: {res.message}")
            arr[i] = res.x[i]
    return lo, hi


class Polytope(ConvexBody):
    """Intersection of finitely many open half-spaces."""

    def __init__(self, normals, offsets):
        N, tau = _normalize_rows(normals, offsets)
        for i in range(len(tau)):
            for j in range(i):
                if np.allclose(N[i], N[j], atol=1e-12, rtol=0) and abs(tau[i] - tau[j]) <= 1e-12:
                    raise InvalidBody(f"duplicate facets {j} and {i}")
        self.normals, self.offsets = N, tau
        self.dim = N.shape[1]
        self.center, self.inradius = _chebyshev_center(N, tau)
        if self.inradius <= 1e-12:
            raise InvalidBody("polytope has empty interior")
        self._box = _lp_box(N, tau)
        self.bounded = self._box is not None

    @property
    def halfspaces(self) -> list[HalfSpace]:
        return [HalfSpace(nu, t) for nu, t in zip(self.normals, self.offsets)]

    def contains(self, x) -> bool:
        return bool(np.all(self.normals @ np.asarray(x, float) < self.offsets))

    def bounding_box(self):
        if self._box is None:
            raise UnboundedBody("polytope is unbounded")
        return self._box

    def ray_hit(self, x, xi) -> float:
        self._require_inside(x)
        d = self.normals @ np.asarray(xi, float)
        slack = self.offsets - self.normals @ np.asarray(x, float)
        pos = d > 0
        if not np.any(pos):
            return math.inf
        with np.errstate(over="ignore"):  # a subnormal d gives t* = inf, which is right
            return float(np.min(slack[pos] / d[pos]))

    def ray_hit_bisect(self, x, xi, tol: float = 1e-15) -> float:
        """Safeguarded bisection on the max-of-affine gauge (cross-check route)."""
        self._require_inside(x)
        x = np.asarray(x, float)
        xi = np.asarray(xi, float)
        inside = lambda t: np.max(self.normals @ (x + t * xi) - self.offsets) < 0
        lo, hi = 0.0, 1.0
        while inside(hi):
            lo, hi = hi, 2 * hi
            if hi > 1e300:
                return math.inf
        while hi - lo > tol * (1 + hi):
            mid = 0.5 * (lo + hi)
            if mid in (lo, hi):
                break
            lo, hi = (mid, hi) if inside(mid) else (lo, mid)
        return 0.5 * (lo + hi)

    def inverse_hit(self, x, xi):
        self._require_inside(x)
        if not ad.is_taylor(x, xi):
            d = self.normals @ np.asarray(xi, float)
            slack = self.offsets - self.normals @ np.asarray(x, float)
            return float(max(np.max(d / slack), 0.0))
        xv, xiv = ad.value_of(x), ad.value_of(xi)
        ratios = (self.normals @ xiv) / (self.offsets - self.normals @ xv)
        order = np.argsort(ratios)[::-1]
        top = ratios[order[0]]
        scale = max(abs(top), np.max(np.abs(ratios)), 1e-300)
        if top <= 0:
            if abs(top) <= TIE_RTOL * scale:
                raise NonSmoothPoint("direction is tangent to a facet at the boundary hit")
            return 0.0 * ad.dot(xi, self.normals[0])
        if len(ratios) > 1 and top - ratios[order[1]] <= TIE_RTOL * scale:
            raise NonSmoothPoint("ray hits the boundary at a facet tie")
        i = order[0]
        return ad.dot(xi, self.normals[i]) / (self.offsets[i] - ad.dot(x, self.normals[i]))

    def affine_image(self, M, b) -> "Polytope":
        Minv_t = np.linalg.inv(np.asarray(M, float)).T
        N = self.normals @ Minv_t.T
        return Polytope(N, self.offsets + N @ np.asarray(b, float))


class Ellipsoid(ConvexBody):
    """``{x : <A(x-c), x-c> < 1}`` with ``A`` symmetric positive definite."""

    smooth = True
    bounded = True

    def __init__(self, center, shape):
        self.center = np.asarray(center, dtype=float).reshape(-1)
        A = np.atleast_2d(np.asarray(shape, dtype=float))
        if A.shape != (self.center.size, self.center.size):
            raise InvalidBody("shape matrix must be n x n with n = len(center)")
        if not np.allclose(A, A.T, atol=1e-14 * max(1.0, np.abs(A).max())):
            raise InvalidBody("shape matrix must be symmetric")
        A = 0.5 * (A + A.T)
        if np.linalg.eigvalsh(A).min() <= 0:
            raise InvalidBody("shape matrix must be positive definite")
        self.A = A
        self.dim = self.center.size

    @classmethod
    def ball(cls, center=None, radius: float = 1.0, dim: int = 2) -> "Ellipsoid":
        if radius <= 0:
            raise InvalidBody("radius must be positive")
        c = np.zeros(dim) if center is None else np.asarray(center, float)
        return cls(c, np.eye(c.size) / radius**2)

    def contains(self, x) -> bool:
        u = np.asarray(x, float) - self.center
        return bool(u @ self.A @ u < 1.0)

    def bounding_box(self):
        half = np.sqrt(np.diag(np.linalg.inv(self.A)))
        return self.center - half, self.center + half

    def _coeffs(self, x, xi):
        u = x - self.center
        Axi = self.A @ xi
        return ad.dot(xi, Axi), ad.dot(u, Axi), ad.dot(u, self.A @ u)

    def ray_hit(self, x, xi) -> float:
        self._require_inside(x)
        a, b, q = self._coeffs(np.asarray(x, float), np.asarray(xi, float))
        if a == 0:
            raise ValueError("zero direction")
        r = math.sqrt(b * b + a * (1 - q))
        return (1 - q) / (b + r) if b >= 0 else (r - b) / a

    def inverse_hit(self, x, xi):
        self._require_inside(x)
        a, b, q = self._coeffs(x, xi)
        r = ad.sqrt(b * b + a * (1 - q))
        if ad.value_of(b) >= 0:
            return (b + r) / (1 - q)
        return a / (r - b)

    def affine_image(self, M, b) -> "Ellipsoid":
        M = np.asarray(M, float)
        Minv = np.linalg.inv(M)
        return Ellipsoid(M @ self.center + np.asarray(b, float), Minv.T @ self.A @ Minv)


class LSEPolytope(ConvexBody):
    """Smooth convex body ``{phi < 0}``, ``phi`` a log-sum-exp smoothing of a polytope.

    ``phi(z) = (1/beta) log sum_i exp(beta (<n_i, z> - t_i))``.  Since
    ``phi >= max_i (<n_i, z> - t_i)`` the body sits inside the polytope.
    """

    smooth = True

    def __init__(self, normals, offsets, beta: float | None = None, normalize: bool = True):
        if normalize:
            N, tau = _normalize_rows(normals, offsets)
        else:
            N = np.atleast_2d(np.asarray(normals, float))
            tau = np.asarray(offsets, float).reshape(-1)
        self.normals, self.offsets = N, tau
        self.dim = N.shape[1]
        self.polytope = Polytope(N, tau)
        if not self.polytope.bounded:
            raise InvalidBody("lse_polytope requires a bounded polytope")
        self.bounded = True
        lo, hi = self.polytope.bounding_box()
        self.beta = 20.0 / float(np.linalg.norm(hi - lo)) if beta is None else float(beta)
        if self.beta <= 0:
            raise InvalidBody("beta must be positive")
        self.center = self.polytope.center
        if not self.phi(self.center) < 0:
            raise InvalidBody(
                f"beta={self.beta:.6g} smooths the polytope away; increase beta "
                f"(need phi < 0 at the inscribed center)")

    def phi(self, z):
        ell = self.normals @ z - self.offsets
        m0 = float(np.max(ad.value_of(ell)))
        s = ad.exp(self.beta * (ell - m0))
        return m0 + ad.log(s.sum() if ad.is_taylor(s) else np.sum(s)) / self.beta

    def grad_phi(self, z) -> np.ndarray:
        ell = self.normals @ z - self.offsets
        w = np.exp(self.beta * (ell - ell.max()))
        return (w / w.sum()) @ self.normals

    def hess_phi(self, z) -> np.ndarray:
        ell = self.normals @ z - self.offsets
        w = np.exp(self.beta * (ell - ell.max()))
        w /= w.sum()
        mean = w @ self.normals
        return self.beta * ((self.normals.T * w) @ self.normals - np.outer(mean, mean))

    def contains(self, x) -> bool:
        return bool(self.phi(np.asarray(x, float)) < 0)

    def bounding_box(self):
        return self.polytope.bounding_box()

    def _phi_slope(self, z, xi):
        ell = self.normals @ z - self.offsets
        m0 = ell.max()
        w = np.exp(self.beta * (ell - m0))
        tot = w.sum()
        return m0 + math.log(tot) / self.beta, float(w @ (self.normals @ xi)) / tot

    def ray_hit(self, x, xi) -> float:
        self._require_inside(x)
        x = np.asarray(x, float)
        xi = np.asarray(xi, float)
        hi = self.polytope.ray_hit(x, xi)
        # phi is convex along the ray and nonnegative at the polytope hit, so
        # Newton started there decreases monotonically onto the root
        t = hi
        for _ in range(60):
            f, slope = self._phi_slope(x + t * xi, xi)
            if f <= 0 or slope <= 0:
                break
            t_new = t - f / slope
            if not t_new < t:
                break
            t = t_new
            if f / slope <= 4 * np.finfo(float).eps * t:
                break
        else:
            f = lambda s: self.phi(x + s * xi)
            t = brentq(f, 0.0, hi * (1 + 1e-12), xtol=1e-300, rtol=4 * np.finfo(float).eps)
        return t

    def inverse_hit(self, x, xi):
        self._require_inside(x)
        t0 = self.ray_hit(ad.value_of(x), ad.value_of(xi))
        if not ad.is_taylor(x, xi):
            return 1.0 / t0
        xv, xiv = ad.value_of(x), ad.value_of(xi)
        slope = float(self.grad_phi(xv + t0 * xiv) @ xiv)
        t = ad.refine_root(lambda t, x, xi: self.phi(x + t * xi), t0, slope, (x, xi))
        return 1.0 / t

    def affine_image(self, M, b) -> "LSEPolytope":
        Minv_t = np.linalg.inv(np.asarray(M, float)).T
        N = self.normals @ Minv_t.T
        return LSEPolytope(N, self.offsets + N @ np.asarray(b, float), self.beta, normalize=False)


# ---- JSON specifications -------------------------------------------------

def _req(spec: dict, key: str):
    if key not in spec:
        raise BadSpec(f"body spec of type {spec.get('type')!r} is missing {key!r}")
    return spec[key]


def _halfspace_lists(spec):
    hs = _req(spec, "halfspaces")
    if not isinstance(hs, list) or not hs:
        raise BadSpec("'halfspaces' must be a nonempty list")
    try:
        N = [list(map(float, h["normal"])) for h in hs]
        tau = [float(h["offset"]) for h in hs]
    except (KeyError, TypeError, ValueError) as exc:
        raise BadSpec(f"malformed half-space entry: {exc}") from exc
    if len({len(r) for r in N}) != 1:
        raise BadSpec("half-space normals have inconsistent dimensions")
    return N, tau


def body_from_spec(spec) -> ConvexBody:
    """Build a body from a parsed JSON object, a JSON string or a file path."""
    if isinstance(spec, str):
        text = spec
        if not spec.lstrip().startswith("{"):
            try:
                with open(spec) as fh:
                    text = fh.read()
            except OSError as exc:
                raise BadSpec(f"cannot read body spec {spec!r}: {exc}") from exc
        try:
            spec = json.loads(text)
        except json.JSONDecodeError as exc:
            raise BadSpec(f"malformed JSON: {exc.msg}", exc.lineno, exc.colno) from exc
    if not isinstance(spec, dict) or "type" not in spec:
        raise BadSpec("body spec must be an object with a 'type' field")
    kind = spec["type"]
    try:
        if kind == "ball":
            center = np.asarray(_req(spec, "center"), float)
            return Ellipsoid.ball(center, float(spec.get("radius", 1.0)))
        if kind == "ellipsoid":
            return Ellipsoid(_req(spec, "center"), _req(spec, "shape"))
        if kind == "polytope":
            return Polytope(*_halfspace_lists(spec))
        if kind == "lse_polytope":
            return LSEPolytope(*_halfspace_lists(spec), beta=spec.get("beta"))
        if kind == "halfspace":
            return HalfSpace(np.asarray(_req(spec, "normal"), float), float(_req(spec, "offset")))
    except InvalidBody as exc:
        raise BadSpec(f"invalid {kind}: {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise BadSpec(f"invalid {kind}: {exc}") from exc
    raise BadSpec(f"unknown body type {kind!r}")


def box(lo, hi) -> Polytope:
    """Axis-aligned box as a polytope."""
    lo = np.asarray(lo, float)
    hi = np.asarray(hi, float)
    n = lo.size
    eye = np.eye(n)
    return Polytope(np.vstack([eye, -eye]), np.concatenate([hi, -lo]))


def regular_polygon(k: int, radius: float = 1.0) -> Polytope:
    ang = 2 * np.pi * np.arange(k) / k
    return Polytope(np.stack([np.cos(ang), np.sin(ang)], 1), np.full(k, radius))
