"""Truncated multivariate Taylor arithmetic and finite-difference fallbacks.

A :class:`Taylor` value carries the Taylor coefficients of a (possibly
array-valued) quantity in ``d`` perturbation variables, truncated at total
degree ``order``.  Coefficients are stored as ``c[..., k]`` with ``k``
running over the monomials of a graded :class:`Basis`; the coefficient of
the monomial ``z**alpha`` is ``D^alpha f / alpha!``.

Lagrangians are written once, generically, with the operators and the
elementary functions of this module (``sqrt``, ``exp``, ``log``...); they
then accept plain floats/arrays as well as Taylor values.  Order-4 jets are
enough for the Riemann curvature; :meth:`Taylor.partial` turns an order-4
jet of ``F**2`` into order-2 jets of its second derivatives, which is how
the spray is differentiated.
"""

from __future__ import annotations

import math
from functools import lru_cache
from itertools import combinations_with_replacement
from typing import Callable

import numpy as np

from .errors import NonSmoothPoint

MAX_ORDER = 4


def _monomials(d: int, degree: int) -> list[tuple[int, ...]]:
    out = []
    for combo in combinations_with_replacement(range(d), degree):
        alpha = [0] * d
        for v in combo:
            alpha[v] += 1
        out.append(tuple(alpha))
    return out


class Basis:
    """Graded monomial basis in ``d`` variables up to total degree ``order``.

    Within each degree the monomial order does not depend on ``order``, so
    the basis of a lower order is a prefix of this one.
    """

    def __init__(self, d: int, order: int):
        if order < 0 or order > MAX_ORDER:
            raise ValueError(f"order must be in [0, {MAX_ORDER}], got {order}")
        self.d = d
        self.order = order
        monos: list[tuple[int, ...]] = []
        self.degree_start = []
        for deg in range(order + 1):
            self.degree_start.append(len(monos))
            monos.extend(_monomials(d, deg))
        self.monomials = monos
        self.size = len(monos)
        self.index = {m: i for i, m in enumerate(monos)}
        self.exponents = np.array(monos, dtype=int).reshape(self.size, d)
        self.degrees = self.exponents.sum(axis=1)
        self.alpha_factorial = np.array(
            [math.prod(math.factorial(a) for a in m) for m in monos], dtype=float
        )

        I, J, K = [], [], []
        for i, a in enumerate(monos):
            da = self.degrees[i]
            for j, b in enumerate(monos):
                if da + self.degrees[j] <= order:
                    I.append(i)
                    J.append(j)
                    K.append(self.index[tuple(x + y for x, y in zip(a, b))])
        self._I = np.array(I, dtype=int)
        self._J = np.array(J, dtype=int)
        scatter = np.zeros((len(I), self.size))
        scatter[np.arange(len(I)), K] = 1.0
        self._scatter = scatter

    def unit(self, v: int) -> int:
        e = [0] * self.d
        e[v] = 1
        return self.index[tuple(e)]

    @lru_cache(maxsize=None)
    def derivative_map(self, v: int):
        """Index map for d/dz_v into the basis of order ``order - 1``."""
        lower = get_basis(self.d, self.order - 1)
        src, dst, fac = [], [], []
        for i, a in enumerate(self.monomials):
            if a[v] == 0:
                continue
            b = list(a)
            b[v] -= 1
            src.append(i)
            dst.append(lower.index[tuple(b)])
            fac.append(float(a[v]))
        return lower, np.array(src, int), np.array(dst, int), np.array(fac)

    @lru_cache(maxsize=None)
    def tensor_map(self, k: int):
        """Flat monomial index and ``alpha!`` for every k-fold index tuple."""
        shape = (self.d,) * k
        idx = np.empty(shape, dtype=int)
        for tup in np.ndindex(*shape):
            alpha = [0] * self.d
            for v in tup:
                alpha[v] += 1
            idx[tup] = self.index[tuple(alpha)]
        return idx, self.alpha_factorial[idx]


@lru_cache(maxsize=None)
def get_basis(d: int, order: int) -> Basis:
    return Basis(d, order)


class Taylor:
    """Array of truncated multivariate Taylor polynomials."""

    __slots__ = ("c", "basis")
    __array_ufunc__ = None  # let numpy defer to our reflected operators

    def __init__(self, c, basis: Basis):
        self.c = np.asarray(c, dtype=float)
        self.basis = basis

    # ---- construction -------------------------------------------------
    @classmethod
    def constant(cls, value, basis: Basis) -> "Taylor":
        value = np.asarray(value, dtype=float)
        c = np.zeros(value.shape + (basis.size,))
        c[..., 0] = value
        return cls(c, basis)

    # ---- shape handling -----------------------------------------------
    @property
    def shape(self) -> tuple[int, ...]:
        return self.c.shape[:-1]

    @property
    def ndim(self) -> int:
        return self.c.ndim - 1

    def __len__(self) -> int:
        return self.c.shape[0]

    @property
    def value(self):
        v = self.c[..., 0]
        return float(v) if v.ndim == 0 else v.copy()

    def __getitem__(self, idx) -> "Taylor":
        if not isinstance(idx, tuple):
            idx = (idx,)
        if any(i is Ellipsis for i in idx):
            return Taylor(self.c[idx + (slice(None),)], self.basis)
        return Taylor(self.c[idx + (Ellipsis,)], self.basis)

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def sum(self, axis: int = -1) -> "Taylor":
        if self.ndim == 0:
            return self
        axis = axis % self.ndim
        return Taylor(self.c.sum(axis=axis), self.basis)

    def reshape(self, *shape) -> "Taylor":
        if len(shape) == 1 and isinstance(shape[0], tuple):
            shape = shape[0]
        return Taylor(self.c.reshape(tuple(shape) + (self.basis.size,)), self.basis)

    # ---- arithmetic ---------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Taylor):
            if other.basis is not self.basis:
                raise ValueError("Taylor operands live in different bases")
            return other
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is not None:
            return Taylor(self.c + o.c, self.basis)
        if isinstance(other, (float, int)):
            c = self.c.copy()
            c[..., 0] += other
            return Taylor(c, self.basis)
        other = np.asarray(other, dtype=float)
        c = np.array(np.broadcast_to(self.c, np.broadcast_shapes(self.c.shape, other.shape + (1,))))
        c[..., 0] += other
        return Taylor(c, self.basis)

    __radd__ = __add__

    def __neg__(self):
        return Taylor(-self.c, self.basis)

    def __pos__(self):
        return self

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            other = np.asarray(other, dtype=float)
            return Taylor(self.c * other[..., None], self.basis)
        b = self.basis
        prod = self.c[..., b._I] * o.c[..., b._J]
        return Taylor(prod @ b._scatter, b)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            other = np.asarray(other, dtype=float)
            return Taylor(self.c / other[..., None], self.basis)
        return self * o.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, p):
        if isinstance(p, (int, np.integer)) and p >= 0:
            out = Taylor.constant(np.ones(self.shape), self.basis)
            base = self
            while p:
                if p & 1:
                    out = out * base
                p >>= 1
                if p:
                    base = base * base
            return out
        p = float(p)
        v = self.c[..., 0]
        k = np.arange(self.basis.order + 1)
        falling = np.array([math.prod(p - i for i in range(j)) for j in k])
        derivs = falling * v[..., None] ** (p - k)
        return self._compose(derivs)

    def __matmul__(self, other):
        # vector/matrix products over the array axes (1-d and 2-d only)
        if isinstance(other, Taylor):
            if self.ndim == 1 and other.ndim == 1:
                return (self * other).sum()
            if self.ndim == 2 and other.ndim == 1:
                return (self * other[None, :]).sum(axis=1)
            if self.ndim == 1 and other.ndim == 2:
                return (self[:, None] * other).sum(axis=0)
            return (self[:, :, None] * other[None, :, :]).sum(axis=1)
        other = np.asarray(other, dtype=float)
        if self.ndim == 1 and other.ndim == 1:
            return Taylor(np.einsum("jk,j->k", self.c, other), self.basis)
        if self.ndim == 2 and other.ndim == 1:
            return Taylor(np.einsum("ijk,j->ik", self.c, other), self.basis)
        if self.ndim == 1:
            return Taylor(np.einsum("jk,jl->lk", self.c, other), self.basis)
        return Taylor(np.einsum("ijk,jl->ilk", self.c, other), self.basis)

    def __rmatmul__(self, other):
        other = np.asarray(other, dtype=float)
        if other.ndim == 1 and self.ndim == 1:
            return Taylor(np.einsum("j,jk->k", other, self.c), self.basis)
        if other.ndim == 1:
            return Taylor(np.einsum("j,jlk->lk", other, self.c), self.basis)
        if self.ndim == 1:
            return Taylor(np.einsum("ij,jk->ik", other, self.c), self.basis)
        return Taylor(np.einsum("ij,jlk->ilk", other, self.c), self.basis)

    # ---- elementary functions -----------------------------------------
    def _compose(self, derivs) -> "Taylor":
        """f(self) from f^(k)(value), k = 0..order, stacked on the last axis."""
        K = self.basis.order
        h = Taylor(self.c.copy(), self.basis)
        h.c[..., 0] = 0.0
        out = Taylor.constant(derivs[..., K] / math.factorial(K), self.basis)
        for k in range(K - 1, -1, -1):
            out = out * h + derivs[..., k] / math.factorial(k)
        return out

    def reciprocal(self) -> "Taylor":
        v = self.c[..., 0]
        if np.any(v == 0):
            raise ZeroDivisionError("reciprocal of a Taylor value with zero constant term")
        k = np.arange(self.basis.order + 1)
        fact = np.array([(-1.0) ** j * math.factorial(j) for j in k])
        return self._compose(fact / v[..., None] ** (k + 1))

    def sqrt(self) -> "Taylor":
        if np.any(self.c[..., 0] <= 0):
            raise NonSmoothPoint("sqrt of a non-positive Taylor value")
        return self ** 0.5

    def exp(self) -> "Taylor":
        e = np.exp(self.c[..., 0])
        return self._compose(np.repeat(e[..., None], self.basis.order + 1, axis=-1))

    def log(self) -> "Taylor":
        v = self.c[..., 0]
        if np.any(v <= 0):
            raise ValueError("log of a non-positive Taylor value")
        K = self.basis.order
        derivs = np.empty(v.shape + (K + 1,))
        derivs[..., 0] = np.log(v)
        for j in range(1, K + 1):
            derivs[..., j] = (-1.0) ** (j - 1) * math.factorial(j - 1) / v ** j
        return self._compose(derivs)

    def sin(self) -> "Taylor":
        v = self.c[..., 0]
        cyc = [np.sin(v), np.cos(v), -np.sin(v), -np.cos(v)]
        return self._compose(np.stack([cyc[j % 4] for j in range(self.basis.order + 1)], -1))

    def cos(self) -> "Taylor":
        v = self.c[..., 0]
        cyc = [np.cos(v), -np.sin(v), -np.cos(v), np.sin(v)]
        return self._compose(np.stack([cyc[j % 4] for j in range(self.basis.order + 1)], -1))

    # ---- derivative extraction ----------------------------------------
    def partial(self, v: int) -> "Taylor":
        """d/dz_v as a jet of one order less."""
        lower, src, dst, fac = self.basis.derivative_map(v)
        c = np.zeros(self.shape + (lower.size,))
        c[..., dst] = self.c[..., src] * fac
        return Taylor(c, lower)

    def truncate(self, order: int) -> "Taylor":
        lower = get_basis(self.basis.d, order)
        return Taylor(self.c[..., : lower.size].copy(), lower)

    def derivative(self, alpha) -> np.ndarray:
        i = self.basis.index[tuple(alpha)]
        return self.c[..., i] * self.basis.alpha_factorial[i]

    def gradient(self) -> np.ndarray:
        idx, fac = self.basis.tensor_map(1)
        return self.c[..., idx] * fac

    def hessian(self) -> np.ndarray:
        idx, fac = self.basis.tensor_map(2)
        return self.c[..., idx] * fac

    def tensor(self, k: int) -> np.ndarray:
        """All k-th order partial derivatives as a symmetric ``d**k`` array."""
        if k == 0:
            return self.c[..., 0].copy()
        idx, fac = self.basis.tensor_map(k)
        return self.c[..., idx] * fac

    def __repr__(self) -> str:
        return f"Taylor(shape={self.shape}, d={self.basis.d}, order={self.basis.order}, value={self.value})"


# ---- generic helpers -----------------------------------------------------

def is_taylor(*xs) -> bool:
    return any(isinstance(x, Taylor) for x in xs)


def value_of(x):
    """Plain numeric value of a float, array or Taylor quantity."""
    if isinstance(x, Taylor):
        return x.value
    return np.asarray(x, dtype=float) if np.ndim(x) else float(x)


def sqrt(x):
    return x.sqrt() if isinstance(x, Taylor) else np.sqrt(x)


def exp(x):
    return x.exp() if isinstance(x, Taylor) else np.exp(x)


def log(x):
    return x.log() if isinstance(x, Taylor) else np.log(x)


def sin(x):
    return x.sin() if isinstance(x, Taylor) else np.sin(x)


def cos(x):
    return x.cos() if isinstance(x, Taylor) else np.cos(x)


def tan(x):
    return x.sin() / x.cos() if isinstance(x, Taylor) else np.tan(x)


def dot(a, b):
    """Contract the last (array) axis of two vectors, Taylor-aware."""
    if isinstance(a, Taylor) or isinstance(b, Taylor):
        if not isinstance(a, Taylor):
            a, b = b, a
        return (a * b).sum(axis=-1)
    return np.dot(a, b)


def stack(items, basis: Basis | None = None):
    """np.stack for a list mixing floats and Taylor scalars."""
    if basis is None:
        for it in items:
            if isinstance(it, Taylor):
                basis = it.basis
                break
    if basis is None:
        return np.array(items, dtype=float)
    cs = [it.c if isinstance(it, Taylor) else Taylor.constant(it, basis).c for it in items]
    return Taylor(np.stack(cs, axis=0), basis)


def as_taylor(x, basis: Basis) -> Taylor:
    return x if isinstance(x, Taylor) else Taylor.constant(x, basis)


def variables(x, y, order: int) -> tuple[Taylor, Taylor]:
    """Seed (x, y) as the 2n independent variables of a jet."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.shape[0]
    basis = get_basis(2 * n, order)
    X = Taylor.constant(x, basis)
    Y = Taylor.constant(y, basis)
    if order >= 1:
        for i in range(n):
            X.c[i, basis.unit(i)] = 1.0
            Y.c[i, basis.unit(n + i)] = 1.0
    return X, Y


def seed(z, order: int) -> Taylor:
    """Seed a flat vector ``z`` as independent variables."""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    basis = get_basis(z.shape[0], order)
    Z = Taylor.constant(z, basis)
    if order >= 1:
        for i in range(z.shape[0]):
            Z.c[i, basis.unit(i)] = 1.0
    return Z


def jet(f: Callable, x, y, order: int) -> Taylor:
    """Order-``order`` jet of ``f(x, y)`` in the 2n variables (x, y)."""
    X, Y = variables(x, y, order)
    out = f(X, Y)
    return as_taylor(out, X.basis)


def jet1(phi: Callable, s: float, order: int) -> np.ndarray:
    """Derivatives ``phi(s), phi'(s), ..., phi^(order)(s)`` of a scalar map."""
    S = seed([s], order)[0]
    out = as_taylor(phi(S), S.basis)
    return out.c[..., :] * np.array([math.factorial(k) for k in range(order + 1)])


def refine_root(residual: Callable, t0: float, slope: float, inputs: tuple) -> Taylor:
    """Jet of the root t(z) of ``residual(t, *inputs) = 0`` given its value ``t0``.

    ``slope`` is d residual / dt at the root.  Each simplified Newton step
    t <- t - residual/slope fixes one more Taylor degree, so step k runs in
    the basis truncated at degree k, which keeps the early steps cheap.
    """
    basis = next(v.basis for v in inputs if isinstance(v, Taylor))
    t = Taylor.constant(t0, get_basis(basis.d, 0))
    for k in range(1, basis.order + 1):
        bk = get_basis(basis.d, k)
        c = np.zeros(bk.size)
        c[: t.basis.size] = t.c
        t = Taylor(c, bk)
        args = [v.truncate(k) if isinstance(v, Taylor) else v for v in inputs]
        t = t - as_taylor(residual(t, *args), bk) / slope
    return t


# ---- derivative operators on (x, y) Lagrangians --------------------------

def _split(n: int, arr: np.ndarray, axes: str) -> np.ndarray:
    sl = {"x": slice(0, n), "y": slice(n, 2 * n)}
    return arr[tuple(sl[a] for a in axes)]


def grad_y(f: Callable, x, y, method: str = "taylor", step: float | None = None) -> np.ndarray:
    """(df/dy^1, ..., df/dy^n) at (x, y)."""
    n = len(x)
    if method == "taylor":
        return _split(n, jet(f, x, y, 1).gradient(), "y")
    return _split(n, fd_gradient(_flat(f, n), np.concatenate([x, y]), step), "y")


def hess_y(f: Callable, x, y, method: str = "taylor", step: float | None = None) -> np.ndarray:
    n = len(x)
    if method == "taylor":
        H = jet(f, x, y, 2).hessian()
    else:
        H = fd_hessian(_flat(f, n), np.concatenate([x, y]), step)
    return _split(n, H, "yy")


def mixed_xy(f: Callable, x, y, i: int, j: int, method: str = "taylor",
             step: float | None = None) -> float:
    """d^2 f / dx^i dy^j."""
    n = len(x)
    if method == "taylor":
        return float(jet(f, x, y, 2).hessian()[i, n + j])
    z = np.concatenate([x, y])
    return fd_mixed(_flat(f, n), z, i, n + j, step)


def _flat(f: Callable, n: int) -> Callable:
    return lambda z: float(f(z[:n], z[n:]))


# ---- finite differences --------------------------------------------------

def default_step(z, k: int = 1) -> float:
    """Base step for the Richardson-extrapolated k-th derivative stencils."""
    base = 2e-3 if k == 1 else 5e-3
    return base * max(1.0, float(np.linalg.norm(z)))


def _d1(f, z, e, h):
    return (-f(z + 2 * h * e) + 8 * f(z + h * e) - 8 * f(z - h * e) + f(z - 2 * h * e)) / (12 * h)


def _richardson(stencil, h):
    # both stencils are O(h^4); one extrapolation step removes that term
    coarse = stencil(h)
    fine = stencil(h / 2)
    return (16 * fine - coarse) / 15


def fd_gradient(f: Callable, z, step: float | None = None, richardson: bool = True) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    h = default_step(z) if step is None else step
    out = []
    for i in range(z.size):
        e = np.zeros_like(z)
        e[i] = 1.0
        st = lambda hh: _d1(f, z, e, hh)
        out.append(_richardson(st, h) if richardson else st(h))
    return np.array(out)


def fd_second(f: Callable, z, i: int, j: int, step: float | None = None,
              richardson: bool = True) -> float:
    """d^2 f / dz_i dz_j with 5-point stencils."""
    z = np.asarray(z, dtype=float)
    h = default_step(z) if step is None else step
    ei = np.zeros_like(z)
    ei[i] = 1.0
    if step is None:
        h = default_step(z, 2)
    if i == j:
        def st(hh):
            return (-f(z + 2 * hh * ei) + 16 * f(z + hh * ei) - 30 * f(z)
                    + 16 * f(z - hh * ei) - f(z - 2 * hh * ei)) / (12 * hh * hh)
    else:
        ej = np.zeros_like(z)
        ej[j] = 1.0

        def st(hh):
            return _d1(lambda w: _d1(f, w, ej, hh), z, ei, hh)
    return float(_richardson(st, h) if richardson else st(h))


fd_mixed = fd_second


def fd_hessian(f: Callable, z, step: float | None = None, richardson: bool = True) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    m = z.size
    H = np.empty((m, m))
    for i in range(m):
        for j in range(i, m):
            H[i, j] = H[j, i] = fd_second(f, z, i, j, step, richardson)
    return H


def fd_vector_derivatives(f: Callable, z, step: float, richardson: bool = True):
    """Value, gradient (..., m) and Hessian (..., m, m) of an array-valued map."""
    z = np.asarray(z, dtype=float)
    m = z.size
    f0 = np.asarray(f(z), dtype=float)
    cache: dict = {}

    def F(w):
        key = w.tobytes()
        if key not in cache:
            cache[key] = np.asarray(f(w), dtype=float)
        return cache[key]

    def d1(g, w, e, h):
        return (-g(w + 2 * h * e) + 8 * g(w + h * e) - 8 * g(w - h * e) + g(w - 2 * h * e)) / (12 * h)

    def ext(st):
        return (16 * st(step / 2) - st(step)) / 15 if richardson else st(step)

    eye = np.eye(m)
    grad = np.stack([ext(lambda h, e=eye[i]: d1(F, z, e, h)) for i in range(m)], axis=-1)
    hess = np.empty(f0.shape + (m, m))
    for i in range(m):
        for j in range(i, m):
            if i == j:
                def st(h, e=eye[i]):
                    return (-F(z + 2 * h * e) + 16 * F(z + h * e) - 30 * f0
                            + 16 * F(z - h * e) - F(z - 2 * h * e)) / (12 * h * h)
            else:
                def st(h, a=eye[i], b=eye[j]):
                    return d1(lambda w: d1(F, w, b, h), z, a, h)
            hess[..., i, j] = hess[..., j, i] = ext(st)
    return f0, grad, hess
