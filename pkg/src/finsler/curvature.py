"""Riemann, flag and Ricci curvature; the Schwarzian derivative and its curvature route."""

from __future__ import annotations

import contextvars
import math
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import ad
from .errors import (DegenerateFlag, InconsistentBoundaryData,
                     NotProjectivelyFlat, StationaryPoint)
from .geodesics import integrate_geodesic, spray, spray_jet
from .metric import FinslerMetric, _require_strict, fundamental_tensor
from .projective import classify_projective_flatness, projective_factor_jet

# verification self-test hook: flips the sign of the 2 G^j d2G^i/dy^j dy^k term
_flip_term = contextvars.ContextVar("flip_term", default=False)


@contextmanager
def injected_sign_bug():
    token = _flip_term.set(True)
    try:
        yield
    finally:
        _flip_term.reset(token)


@dataclass
class RiemannCurvature:
    R: np.ndarray  # R[i, k] = R^i_k
    g: np.ndarray
    x: np.ndarray
    y: np.ndarray

    @property
    def lowered(self) -> np.ndarray:
        """``R_mk = g_mi R^i_k``."""
        return self.g @ self.R

    @property
    def F2(self) -> float:
        return float(self.y @ self.g @ self.y)

    def ricci(self) -> float:
        return float(np.trace(self.R))

    def flag(self, w) -> float:
        return _flag_from(self, np.asarray(w, float))


def _assemble(G, dG, d2G, y, n):
    Gx, Gy = dG[:, :n], dG[:, n:]
    Gxy = d2G[:, :n, n:]  # [i, j, k] = d2 G^i / dx^j dy^k
    Gyy = d2G[:, n:, n:]
    third = 2 * np.einsum("j,ijk->ik", G, Gyy)
    if _flip_term.get():
        third = -third
    return 2 * Gx - np.einsum("ijk,j->ik", Gxy, y) + third - Gy @ Gy


def riemann_curvature(F: FinslerMetric, x, y, method: str | None = None,
                      step: float | None = None) -> RiemannCurvature:
    """``R^i_k`` from the spray.

    ``method="taylor"`` differentiates an exact order-2 jet of the spray;
    ``method="fd"`` applies Richardson-extrapolated central differences to
    the spray itself.
    """
    _require_strict(F)
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    n = F.dim
    method = method or ("taylor" if F.taylor else "fd")
    g = fundamental_tensor(F, x, y).g
    if F.x_independent:
        return RiemannCurvature(np.zeros((n, n)), g, x, y)
    if method == "taylor":
        sj = spray_jet(F, x, y)
        G, dG, d2G = sj.value, sj.gradient(), sj.hessian()
    else:
        h = step if step is not None else _curvature_step(F, y)
        inner = "taylor" if F.taylor else "fd"
        f = lambda z: spray(F, z[:n], z[n:], method=inner)
        G, dG, d2G = ad.fd_vector_derivatives(f, np.concatenate([x, y]), h)
    return RiemannCurvature(_assemble(G, dG, d2G, y, n), g, x, y)


def _curvature_step(F: FinslerMetric, y) -> float:
    h = 1e-3 * max(1.0, float(np.linalg.norm(y)))
    dom = F.domain
    if dom is not None and dom.bounded:
        lo, hi = dom.bounding_box()
        h = min(h, 1e-3 * float(np.linalg.norm(hi - lo)))
    return h


@dataclass
class Flag:
    x: np.ndarray
    y: np.ndarray
    w: np.ndarray


def _flag_from(Rc: RiemannCurvature, w) -> float:
    g, y = Rc.g, Rc.y
    gww, gwy, gyy = w @ g @ w, w @ g @ y, y @ g @ y
    if gyy * gww - gwy**2 <= 1e-12 * gyy * gww:
        raise DegenerateFlag("transverse vector is (nearly) parallel to the flagpole")
    # same quotient with w replaced by its g-orthogonal part; R y = 0 makes this
    # exact, and it keeps truncation error in R y out of near-parallel flags
    u = w - (gwy / gyy) * y
    return float(u @ Rc.lowered @ u / (gyy * (u @ g @ u)))


def flag_curvature(F: FinslerMetric, flag: Flag, method: str | None = None) -> float:
    """``K = R_mk w^k w^m / (F^2 g(w, w) - g(w, y)^2)``."""
    return riemann_curvature(F, flag.x, flag.y, method).flag(flag.w)


def ricci(F: FinslerMetric, x, y, method: str | None = None) -> float:
    """Trace of ``R^i_k``."""
    return riemann_curvature(F, x, y, method).ricci()


def scalar_sc(F: FinslerMetric, x, y) -> float:
    """``Sc = P^2 - y^j dP/dx^j``; for projectively flat metrics ``K = Sc / F^2``."""
    n = F.dim
    P, _ = projective_factor_jet(F, x, y)
    return float(P.value**2 - np.asarray(y, float) @ P.gradient()[:n])


def projector_residual(Rc: RiemannCurvature, sc: float) -> float:
    """``|R - Sc (I - y (g y)^T / F^2)|``, the scalar-curvature structure."""
    y, g = Rc.y, Rc.g
    proj = np.eye(len(y)) - np.outer(y, g @ y) / Rc.F2
    return float(np.linalg.norm(Rc.R - sc * proj))


# ---- Schwarzian derivative -----------------------------------------------

def _fd_derivs(phi: Callable, s: float, h: float = 1e-2):
    f = lambda t: float(phi(t))

    def st(hh):
        fp2, fp1, f0, fm1, fm2 = f(s + 2 * hh), f(s + hh), f(s), f(s - hh), f(s - 2 * hh)
        d1 = (-fp2 + 8 * fp1 - 8 * fm1 + fm2) / (12 * hh)
        d2 = (-fp2 + 16 * fp1 - 30 * f0 + 16 * fm1 - fm2) / (12 * hh * hh)
        d3 = (fp2 - 2 * fp1 + 2 * fm1 - fm2) / (2 * hh**3)
        return np.array([d1, d2, d3])

    a, b = st(h), st(h / 2)
    out = (16 * b - a) / 15
    out[2] = (4 * b[2] - a[2]) / 3  # the third-derivative stencil is second order
    return out


def schwarzian(phi: Callable, s: float, method: str = "auto") -> float:
    """``phi'''/phi' - 3/2 (phi''/phi')^2`` at ``s``."""
    d = None
    if method in ("auto", "taylor"):
        try:
            d = ad.jet1(phi, s, 3)[1:]
        except (TypeError, AttributeError):
            if method == "taylor":
                raise
    if d is None:
        d = _fd_derivs(phi, s)
    d1, d2, d3 = d
    if abs(d1) < 1e-14 * max(1.0, abs(d2), abs(d3)):
        raise StationaryPoint(f"phi'({s}) = 0")
    return float(d3 / d1 - 1.5 * (d2 / d1) ** 2)


def _closed_form_phi(F: FinslerMetric, p, xi):
    """Unit-speed reparametrization phi of the segment geodesic, if known."""
    from .funk import funk_geodesic, hilbert_geodesic

    kind = F.info.get("kind")
    body = F.info.get("body")
    if kind == "funk":
        return funk_geodesic(body, p, xi).phi
    if kind == "hilbert":
        return hilbert_geodesic(body, p, xi).phi
    if F.x_independent:
        c = float(F(p, xi))
        return lambda s: s / c
    return None


def _phi_derivs_from_ode(F: FinslerMetric, p, xi, h: float = 2e-2):
    """(phi', phi'', phi''') at 0 along the integrated unit-speed geodesic.

    ``phi''`` comes straight from the geodesic equation, ``phi'''`` from a
    5-point stencil over geodesic states integrated to ``+-h, +-2h``.
    """
    c = float(F(p, xi))
    v = xi / c
    u = xi / float(xi @ xi)

    def acc(s):
        if s == 0:
            x, y = p, v
        else:
            tr = integrate_geodesic(F, p, v, s, rtol=1e-12, atol=1e-14, max_step=h / 2)
            x, y = (tr.x[-1], tr.y[-1]) if s > 0 else (tr.x[0], tr.y[0])
        return float(-2 * spray(F, x, y) @ u)

    a = {k: acc(k * h) for k in (-2, -1, 0, 1, 2)}
    d3 = (-a[2] + 8 * a[1] - 8 * a[-1] + a[-2]) / (12 * h)
    return np.array([float(v @ u), a[0], d3])


def curvature_via_schwarzian(F: FinslerMetric, p, xi, check_flat: bool = True,
                             rng: np.random.Generator | None = None) -> float:
    """``K(p, xi) = {phi, s}(0) / (2 phi'(0)^2 F(p, xi)^2)``.

    ``phi`` reparametrizes the straight geodesic ``p + phi(s) xi``; it is
    taken from a closed form when one is known and otherwise read off the
    integrated geodesic.
    """
    p = np.asarray(p, float)
    xi = np.asarray(xi, float)
    if check_flat:
        rng = np.random.default_rng(0) if rng is None else rng
        verdict = classify_projective_flatness(F, rng, samples=20)
        if verdict.verdict != "flat":
            raise NotProjectivelyFlat(f"Hamel verdict: {verdict.verdict} "
                                      f"(max residual {verdict.max_residual:.3g})")
    Fp = float(F(p, xi))
    phi = _closed_form_phi(F, p, xi)
    if phi is not None:
        d = ad.jet1(phi, 0.0, 3)[1:]
    else:
        d = _phi_derivs_from_ode(F, p, xi)
    d1, d2, d3 = d
    S = d3 / d1 - 1.5 * (d2 / d1) ** 2
    return float(S / (2 * d1**2 * Fp**2))


# ---- Moebius reconstruction ----------------------------------------------

def moebius_reconstruct(rho: float, phi_plus: float | None = None, phi_minus: float | None = None,
                        dphi0: float | None = None, ddphi0: float = 0.0) -> Callable:
    """Solution of ``{phi, s} = rho`` with ``phi(0) = 0`` fitted to boundary data.

    * ``rho < 0``: the limits ``phi(+inf) = phi_plus > 0`` and
      ``phi(-inf) = phi_minus < 0`` (either may be infinite) fix the solution;
      ``dphi0``, if given, must agree.
    * ``rho = 0``: ``dphi0`` is required; a finite ``phi_plus`` adds the pole.
    * ``rho > 0``: ``dphi0`` and ``ddphi0`` fix the solution.

    The returned callable is generic in ``s`` (floats or Taylor values).
    """
    if rho < 0:
        mu = math.sqrt(-2.0 * rho)
        if phi_plus is None or phi_minus is None:
            raise InconsistentBoundaryData("rho < 0 needs both limits phi(+inf) and phi(-inf)")
        if not (phi_plus > 0 > phi_minus):
            raise InconsistentBoundaryData("need phi(-inf) < 0 = phi(0) < phi(+inf)")
        a = 1.0 / phi_plus  # 0 for an infinite limit
        b = -1.0 / phi_minus
        if a == 0 and b == 0:
            raise InconsistentBoundaryData("both limits infinite is impossible for rho < 0")
        slope = mu / (a + b)
        if dphi0 is not None and not math.isclose(dphi0, slope, rel_tol=1e-9):
            raise InconsistentBoundaryData(f"phi'(0) = {dphi0} contradicts the limits (expected {slope})")

        def phi(s):
            if ad.value_of(s) >= 0:
                e = ad.exp(-mu * s)
                return (1 - e) / (a + b * e)
            e = ad.exp(mu * s)
            return (e - 1) / (a * e + b)

        return phi
    if dphi0 is None or dphi0 <= 0:
        raise InconsistentBoundaryData("rho >= 0 needs phi'(0) > 0")
    if rho == 0:
        c = 0.0 if phi_plus is None or math.isinf(phi_plus) else 1.0 / phi_plus
        if phi_minus is not None and not math.isinf(phi_minus):
            if c == 0 or not math.isclose(1.0 / phi_minus, c, rel_tol=1e-9):
                raise InconsistentBoundaryData("for rho = 0 both finite limits must coincide")
        return lambda s: dphi0 * s / (c * dphi0 * s + 1)
    lam = math.sqrt(rho / 2.0)
    A = dphi0 / lam
    C = -ddphi0 / (2 * A * lam * lam)
    return lambda s: A * ad.tan(lam * s) / (C * ad.tan(lam * s) + 1)
