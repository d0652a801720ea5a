"""Truncated Taylor jets in the conjugate pair (z - z0, conj(z - z0)).

A :class:`WirtingerJet` of order ``N`` at ``z0`` stores the coefficients
``c[a, b]`` of ``(z - z0)**a * conj(z - z0)**b`` for ``a + b <= N``.  The
Wirtinger partial ``d_z^a d_zbar^b F(z0)`` is ``a! b! c[a, b]``.

:class:`UnivariateJet` is the scalar counterpart used for functions of a
single variable (series in ``u`` and the holomorphic maps of rigid
equivalences).
"""
from __future__ import annotations

import cmath
import functools
import math
from typing import Callable, Sequence, Union

import numpy as np

from .exceptions import ImplicitSolveError, JetError, SeriesDomainError

DEFAULT_ORDER = 6
MAX_ORDER = 10
RECIPROCAL_THRESHOLD = 1e-12
CENTER_TOL = 1e-14

Number = Union[int, float, complex]


@functools.lru_cache(maxsize=None)
def _tri_mask(order: int) -> np.ndarray:
    a, b = np.indices((order + 1, order + 1))
    mask = (a + b) <= order
    mask.setflags(write=False)
    return mask


@functools.lru_cache(maxsize=None)
def _shift_tables(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Binomial matrix ``C(m, k)`` (upper triangle) and exponents ``m - k``."""
    binom = np.zeros((n, n))
    for k in range(n):
        for m in range(k, n):
            binom[k, m] = math.comb(m, k)
    k = np.arange(n)
    expo = np.clip(k[None, :] - k[:, None], 0, None)
    binom.setflags(write=False)
    expo.setflags(write=False)
    return binom, expo


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


class WirtingerJet:
    """Immutable truncated bivariate Taylor expansion in (z - z0, conj(z - z0)).

    Parameters
    ----------
    coeffs : array_like, shape (N + 1, N + 1)
        ``coeffs[a, b]`` multiplies ``(z - z0)**a conj(z - z0)**b``.  Entries
        with ``a + b > N`` are discarded.
    center : complex
        Base point ``z0``.
    real : bool
        Whether the jet represents a real-valued function.
    """

    __slots__ = ("_c", "center", "order", "real")

    def __init__(self, coeffs, center: complex = 0j, real: bool = False):
        c = np.array(coeffs, dtype=complex)
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise JetError("jet coefficients must form a square array")
        order = c.shape[0] - 1
        c[~_tri_mask(order)] = 0.0
        self._c = _frozen(c)
        self.center = complex(center)
        self.order = order
        self.real = bool(real)

    @classmethod
    def _wrap(cls, c: np.ndarray, center: complex, real: bool) -> WirtingerJet:
        # c must be a fresh, already-masked complex array
        out = cls.__new__(cls)
        c.setflags(write=False)
        out._c = c
        out.center = center
        out.order = c.shape[0] - 1
        out.real = real
        return out

    # construction helpers
    @classmethod
    def constant(cls, value: Number, center: complex = 0j, order: int = DEFAULT_ORDER) -> WirtingerJet:
        c = np.zeros((order + 1, order + 1), dtype=complex)
        c[0, 0] = value
        return cls(c, center, real=abs(complex(value).imag) == 0.0)

    @classmethod
    def zero(cls, center: complex = 0j, order: int = DEFAULT_ORDER) -> WirtingerJet:
        return cls.constant(0.0, center, order)

    @classmethod
    def variable(cls, center: complex = 0j, order: int = DEFAULT_ORDER) -> WirtingerJet:
        """Jet of the coordinate function ``z``."""
        c = np.zeros((order + 1, order + 1), dtype=complex)
        c[0, 0] = center
        if order >= 1:
            c[1, 0] = 1.0
        return cls(c, center)

    @classmethod
    def conj_variable(cls, center: complex = 0j, order: int = DEFAULT_ORDER) -> WirtingerJet:
        """Jet of ``conj(z)``."""
        c = np.zeros((order + 1, order + 1), dtype=complex)
        c[0, 0] = complex(center).conjugate()
        if order >= 1:
            c[0, 1] = 1.0
        return cls(c, center)

    @classmethod
    def from_dict(cls, terms: dict, center: complex = 0j, order: int = DEFAULT_ORDER,
                  real: bool = False) -> WirtingerJet:
        c = np.zeros((order + 1, order + 1), dtype=complex)
        for (a, b), v in terms.items():
            if a + b <= order:
                c[a, b] = v
        return cls(c, center, real)

    # accessors
    @property
    def coeffs(self) -> np.ndarray:
        return self._c

    @property
    def value(self) -> complex:
        return complex(self._c[0, 0])

    def __getitem__(self, ab) -> complex:
        a, b = ab
        if a < 0 or b < 0 or a + b > self.order:
            return 0j
        return complex(self._c[a, b])

    def partial(self, a: int, b: int) -> complex:
        """Wirtinger partial ``d_z^a d_zbar^b`` at the center."""
        return self[a, b] * math.factorial(a) * math.factorial(b)

    def items(self):
        for a in range(self.order + 1):
            for b in range(self.order + 1 - a):
                yield (a, b), complex(self._c[a, b])

    def __repr__(self):
        nz = {ab: v for ab, v in self.items() if abs(v) > 1e-15}
        return f"WirtingerJet(order={self.order}, center={self.center!r}, real={self.real}, {nz})"

    # structure
    def truncate(self, order: int) -> WirtingerJet:
        if order > self.order:
            raise JetError(f"cannot raise jet order from {self.order} to {order}")
        return WirtingerJet(self._c[: order + 1, : order + 1], self.center, self.real)

    def conj(self) -> WirtingerJet:
        """Jet of the complex conjugate function."""
        return WirtingerJet(self._c.T.conj(), self.center, self.real)

    def real_part(self) -> WirtingerJet:
        return WirtingerJet._wrap(0.5 * (self._c + self._c.T.conj()), self.center, True)

    def imag_part(self) -> WirtingerJet:
        return WirtingerJet((self._c - self._c.T.conj()) / 2j, self.center, real=True)

    def realify(self) -> WirtingerJet:
        """Project onto the real-valued jets (alias of :meth:`real_part`)."""
        return self.real_part()

    def reality_defect(self) -> float:
        return float(np.max(np.abs(self._c - self._c.T.conj())))

    def max_abs(self) -> float:
        return float(np.max(np.abs(self._c)))

    def evaluate(self, z: complex) -> complex:
        """Sum the truncated expansion at ``z``."""
        dz = complex(z) - self.center
        a, b = np.indices(self._c.shape)
        return complex(np.sum(self._c * dz ** a * dz.conjugate() ** b))

    # arithmetic
    def _coerce(self, other) -> WirtingerJet:
        if isinstance(other, WirtingerJet):
            return other
        if isinstance(other, (int, float, complex, np.number)):
            return WirtingerJet.constant(other, self.center, self.order)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return jet_add(self, other)

    __radd__ = __add__

    def __neg__(self):
        return WirtingerJet._wrap(-self._c, self.center, self.real)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return jet_add(self, -other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            other = complex(other)
            return WirtingerJet._wrap(self._c * other, self.center, self.real and other.imag == 0.0)
        if isinstance(other, WirtingerJet):
            return jet_mul(self, other)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return self * (1.0 / other)
        if isinstance(other, WirtingerJet):
            return jet_mul(self, jet_recip(other))
        return NotImplemented

    def __rtruediv__(self, other):
        return jet_recip(self) * other

    def __pow__(self, n: int):
        if not isinstance(n, (int, np.integer)) or n < 0:
            raise JetError("only non-negative integer powers are supported")
        out = WirtingerJet.constant(1.0, self.center, self.order)
        base = self
        while n:
            if n & 1:
                out = out * base
            n >>= 1
            if n:
                base = base * base
        return out


def _check_centers(a: WirtingerJet, b: WirtingerJet) -> None:
    if abs(a.center - b.center) > CENTER_TOL * max(1.0, abs(a.center)):
        raise JetError("center mismatch")


def jet_add(a: WirtingerJet, b: WirtingerJet) -> WirtingerJet:
    """Coefficientwise sum, truncated to the smaller order."""
    _check_centers(a, b)
    n = min(a.order, b.order)
    c = a.coeffs[: n + 1, : n + 1] + b.coeffs[: n + 1, : n + 1]
    if a.order != b.order:
        c[~_tri_mask(n)] = 0.0
    return WirtingerJet._wrap(c, a.center, a.real and b.real)


def _mul_arrays(x: np.ndarray, y: np.ndarray, order: int) -> np.ndarray:
    # rows padded to width 2n - 1 so the flattened 1-d convolution does not wrap
    n = order + 1
    w = 2 * n - 1
    px = np.zeros((n, w), dtype=complex)
    px[:, :n] = x[:n, :n]
    py = np.zeros((n, w), dtype=complex)
    py[:, :n] = y[:n, :n]
    out = np.convolve(px.ravel(), py.ravel())[: n * w].reshape(n, w)[:, :n].copy()
    out[~_tri_mask(order)] = 0.0
    return out


def jet_mul(a: WirtingerJet, b: WirtingerJet) -> WirtingerJet:
    """Truncated Cauchy product."""
    _check_centers(a, b)
    n = min(a.order, b.order)
    return WirtingerJet._wrap(_mul_arrays(a.coeffs, b.coeffs, n), a.center, a.real and b.real)


def jet_powers(h: WirtingerJet, n: int) -> list[WirtingerJet]:
    """``[1, h, h**2, ..., h**n]`` by repeated multiplication."""
    out = [WirtingerJet.constant(1.0, h.center, h.order)]
    for _ in range(n):
        out.append(out[-1] * h)
    return out


def jet_recip(a: WirtingerJet, threshold: float = RECIPROCAL_THRESHOLD) -> WirtingerJet:
    """Multiplicative inverse via the geometric series at the constant term."""
    c0 = a.value
    if abs(c0) <= threshold:
        raise JetError("division by (near-)zero jet")
    h = (a - c0) * (1.0 / c0)
    # 1/(c0 (1 + h)) = (1/c0) sum (-h)^k
    out = WirtingerJet.constant(1.0, a.center, a.order)
    for _ in range(a.order):
        out = 1.0 - h * out
    out = out * (1.0 / c0)
    return WirtingerJet(out.coeffs, a.center, a.real)


def d_z(a: WirtingerJet) -> WirtingerJet:
    """Wirtinger derivative in z; the order drops by one."""
    if a.order < 1:
        raise JetError("cannot differentiate an order-0 jet")
    k = np.arange(1, a.order + 1)[:, None]
    return WirtingerJet._wrap(a.coeffs[1:, :-1] * k, a.center, False)


def d_zbar(a: WirtingerJet) -> WirtingerJet:
    """Wirtinger derivative in conj(z); the order drops by one."""
    if a.order < 1:
        raise JetError("cannot differentiate an order-0 jet")
    k = np.arange(1, a.order + 1)[None, :]
    return WirtingerJet._wrap(a.coeffs[:-1, 1:] * k, a.center, False)


def d_x(a: WirtingerJet) -> WirtingerJet:
    return d_z(a) + d_zbar(a)


def d_y(a: WirtingerJet) -> WirtingerJet:
    return (d_z(a) - d_zbar(a)) * 1j


# ---------------------------------------------------------------------------
# univariate series


class UnivariateJet:
    """Immutable truncated Taylor series ``sum d_k (t - center)**k``."""

    __slots__ = ("_d", "center")

    def __init__(self, coeffs: Sequence[Number], center: complex = 0j):
        d = np.array(coeffs, dtype=complex).ravel()
        if d.size == 0:
            raise JetError("a series needs at least one coefficient")
        self._d = _frozen(d)
        self.center = complex(center)

    @property
    def coeffs(self) -> np.ndarray:
        return self._d

    @property
    def order(self) -> int:
        return self._d.size - 1

    def __getitem__(self, k: int) -> complex:
        return complex(self._d[k]) if 0 <= k <= self.order else 0j

    def __repr__(self):
        return f"UnivariateJet({np.round(self._d, 15).tolist()}, center={self.center!r})"

    @classmethod
    def identity(cls, order: int, center: complex = 0j) -> UnivariateJet:
        d = np.zeros(order + 1, dtype=complex)
        d[0] = center
        if order >= 1:
            d[1] = 1.0
        return cls(d, center)

    def is_real(self, tol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self._d.imag) <= tol)) and abs(self.center.imag) <= tol

    def truncate(self, order: int) -> UnivariateJet:
        return UnivariateJet(self._d[: order + 1], self.center)

    def __call__(self, t):
        """Evaluate the truncated series (as a polynomial) at ``t``."""
        s = t - self.center
        out = 0.0
        for d in self._d[::-1]:
            out = out * s + d
        return out

    def _same(self, other: UnivariateJet) -> None:
        if abs(self.center - other.center) > CENTER_TOL * max(1.0, abs(self.center)):
            raise JetError("center mismatch")

    def __add__(self, other):
        if isinstance(other, (int, float, complex)):
            d = self._d.copy()
            d[0] += other
            return UnivariateJet(d, self.center)
        self._same(other)
        n = min(self.order, other.order) + 1
        return UnivariateJet(self._d[:n] + other._d[:n], self.center)

    __radd__ = __add__

    def __neg__(self):
        return UnivariateJet(-self._d, self.center)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            return UnivariateJet(self._d * other, self.center)
        self._same(other)
        n = min(self.order, other.order) + 1
        return UnivariateJet(np.convolve(self._d[:n], other._d[:n])[:n], self.center)

    __rmul__ = __mul__

    def derivative(self) -> UnivariateJet:
        if self.order == 0:
            return UnivariateJet([0.0], self.center)
        return UnivariateJet(self._d[1:] * np.arange(1, self.order + 1), self.center)

    def integrate(self, constant: Number = 0.0) -> UnivariateJet:
        d = np.empty(self.order + 2, dtype=complex)
        d[0] = constant
        d[1:] = self._d / np.arange(1, self.order + 2)
        return UnivariateJet(d, self.center)

    def power(self, alpha: float) -> UnivariateJet:
        """``self**alpha`` by the Miller recurrence (constant term must be nonzero)."""
        p = self._d
        if p[0] == 0:
            raise SeriesDomainError("power of a series with zero constant term")
        n = self.order
        y = np.zeros(n + 1, dtype=complex)
        y[0] = p[0] ** alpha
        for m in range(1, n + 1):
            k = np.arange(1, m + 1)
            y[m] = np.sum(((alpha + 1) * k - m) * p[1: m + 1] * y[m - k]) / (m * p[0])
        return UnivariateJet(y, self.center)

    def recip(self) -> UnivariateJet:
        return self.power(-1.0)

    def taylor_shift(self, new_center: complex) -> UnivariateJet:
        """Re-expand the truncated series, read as a polynomial, about ``new_center``."""
        s = complex(new_center) - self.center
        if s == 0:
            return self
        n = self.order + 1
        binom, expo = _shift_tables(n)
        # d'_k = sum_m C(m, k) s^(m-k) d_m
        pw = s ** np.arange(n)
        return UnivariateJet((binom * pw[expo]) @ self._d, new_center)

    def compose(self, inner: UnivariateJet) -> UnivariateJet:
        """``self(inner(t))`` truncated to ``inner``'s order."""
        outer = self.taylor_shift(inner[0])
        n = inner.order
        h = UnivariateJet(np.concatenate([[0.0], inner.coeffs[1:]]), inner.center)
        out = UnivariateJet(np.zeros(n + 1), inner.center) + outer[min(outer.order, n)]
        for k in range(min(outer.order, n) - 1, -1, -1):
            out = out * h + outer[k]
        return out


def series_exp(x0: Number, order: int) -> UnivariateJet:
    e = cmath.exp(x0)
    return UnivariateJet([e / math.factorial(k) for k in range(order + 1)], x0)


def series_log(x0: Number, order: int) -> UnivariateJet:
    if x0 == 0:
        raise SeriesDomainError("log is not expandable at 0")
    d = [cmath.log(x0)] + [(-1) ** (k + 1) / (k * x0 ** k) for k in range(1, order + 1)]
    if isinstance(x0, (int, float)) or complex(x0).imag == 0:
        if complex(x0).real < 0:
            raise SeriesDomainError("log of a negative real constant term")
        d = [complex(v).real for v in d]
    return UnivariateJet(d, x0)


def series_sin(x0: Number, order: int) -> UnivariateJet:
    s, c = cmath.sin(x0), cmath.cos(x0)
    cyc = [s, c, -s, -c]
    return UnivariateJet([cyc[k % 4] / math.factorial(k) for k in range(order + 1)], x0)


def series_cos(x0: Number, order: int) -> UnivariateJet:
    s, c = cmath.sin(x0), cmath.cos(x0)
    cyc = [c, -s, -c, s]
    return UnivariateJet([cyc[k % 4] / math.factorial(k) for k in range(order + 1)], x0)


def series_power(x0: Number, alpha: float, order: int) -> UnivariateJet:
    if x0 == 0:
        raise SeriesDomainError(f"t**{alpha} is not expandable at 0")
    d = np.zeros(order + 1, dtype=complex)
    d[0] = x0
    if order >= 1:
        d[1] = 1.0
    return UnivariateJet(d, x0).power(alpha)


def series_sqrt(x0: Number, order: int) -> UnivariateJet:
    return series_power(x0, 0.5, order)


def series_arcsin(x0: Number, order: int) -> UnivariateJet:
    if abs(x0) >= 1:
        raise SeriesDomainError("arcsin is not expandable at |t| >= 1")
    x0 = complex(x0)
    val = cmath.asin(x0)
    if x0.imag == 0:
        val = complex(math.asin(x0.real))
    if order == 0:
        return UnivariateJet([val], x0)
    q = UnivariateJet([1 - x0 * x0, -2 * x0, -1.0] + [0.0] * max(order - 3, 0), x0).truncate(order - 1)
    return q.power(-0.5).integrate(val)


SeriesLike = Union[UnivariateJet, Callable[[complex, int], UnivariateJet]]


def _series_at(series: SeriesLike, x0: complex, order: int) -> UnivariateJet:
    if isinstance(series, UnivariateJet):
        return series.taylor_shift(x0)
    x = x0.real if x0.imag == 0 else x0
    return series(x, order)


def jet_compose_many(series_list: Sequence[SeriesLike], a: WirtingerJet) -> list[WirtingerJet]:
    """Compose several univariate series with the same inner jet.

    The powers of ``a - a(center)`` are formed once and shared.
    """
    c0 = a.value
    h = a - c0
    powers = jet_powers(h, a.order)
    stack = np.stack([p.coeffs for p in powers])
    out = []
    for series in series_list:
        s = _series_at(series, c0, a.order)
        d = np.zeros(a.order + 1, dtype=complex)
        m = min(s.order, a.order) + 1
        d[:m] = s.coeffs[:m]
        real = a.real and s.is_real()
        out.append(WirtingerJet._wrap(np.tensordot(d, stack, axes=1), a.center, real))
    return out


def jet_compose_analytic(series: SeriesLike, a: WirtingerJet) -> WirtingerJet:
    """Taylor expansion of ``series(a)``, truncated to ``a.order``.

    ``series`` is either a :class:`UnivariateJet` (read as a polynomial and
    re-expanded at the constant term of ``a``) or a callable
    ``(x0, order) -> UnivariateJet`` such as :func:`series_exp`.
    """
    return jet_compose_many([series], a)[0]


def jet_exp(a: WirtingerJet) -> WirtingerJet:
    return jet_compose_analytic(series_exp, a)


def jet_log(a: WirtingerJet) -> WirtingerJet:
    return jet_compose_analytic(series_log, a)


def jet_sin(a: WirtingerJet) -> WirtingerJet:
    return jet_compose_analytic(series_sin, a)


def jet_cos(a: WirtingerJet) -> WirtingerJet:
    return jet_compose_analytic(series_cos, a)


def jet_arcsin(a: WirtingerJet) -> WirtingerJet:
    return jet_compose_analytic(series_arcsin, a)


def jet_sqrt(a: WirtingerJet) -> WirtingerJet:
    return jet_compose_analytic(series_sqrt, a)


def jet_compose_bivariate(f: WirtingerJet, p: WirtingerJet, q: WirtingerJet) -> WirtingerJet:
    """Substitute ``z - z0 -> p`` and ``conj(z - z0) -> q`` in the polynomial ``f``.

    ``p`` and ``q`` must have zero constant term; the result lives at their center.
    """
    if abs(p.value) > 1e-14 or abs(q.value) > 1e-14:
        raise JetError("bivariate substitution needs inner jets with zero constant term")
    n = min(p.order, q.order, f.order)
    pp = jet_powers(p.truncate(n), n)
    qq = jet_powers(q.truncate(n), n)
    acc = np.zeros((n + 1, n + 1), dtype=complex)
    for (a, b), c in f.truncate(n).items():
        if c != 0:
            acc += c * (pp[a] * qq[b]).coeffs
    return WirtingerJet(acc, p.center)


# ---------------------------------------------------------------------------
# integration and implicit solving


def _realified_antiderivative(g: WirtingerJet, value: float, axis: int) -> WirtingerJet:
    n = g.order + 1
    c = np.zeros((n + 1, n + 1), dtype=complex)
    if axis == 0:
        c[1:, :-1] = g.coeffs / np.arange(1, n + 1)[:, None]
        c[0, 1:] = c[1:, 0].conj()
    else:
        c[:-1, 1:] = g.coeffs / np.arange(1, n + 1)[None, :]
        c[1:, 0] = c[0, 1:].conj()
    c[0, 0] = value
    return WirtingerJet(c, g.center).realify()


def antiderivative_z_realify(f: WirtingerJet, value_at_center: float = 0.0,
                             tol: float = 1e-10) -> WirtingerJet:
    """Real-valued jet ``F`` with ``d_z F = f`` and ``F(center) = value_at_center``.

    The pure ``conj(z)`` column is filled by conjugating the pure ``z`` row,
    which adds the antiholomorphic term making ``F`` real.
    """
    F = _realified_antiderivative(f, float(np.real(value_at_center)), axis=0)
    err = np.max(np.abs(d_z(F).coeffs - f.coeffs), initial=0.0)
    if err > tol * max(1.0, f.max_abs()):
        raise JetError("f is not the z-gradient of a real function")
    return F


def antiderivative_zbar_realify(g: WirtingerJet, value_at_center: float = 0.0,
                                tol: float = 1e-10) -> WirtingerJet:
    """Real-valued jet ``L`` with ``d_zbar L = g`` and ``L(center) = value_at_center``."""
    L = _realified_antiderivative(g, float(np.real(value_at_center)), axis=1)
    err = np.max(np.abs(d_zbar(L).coeffs - g.coeffs), initial=0.0)
    if err > tol * max(1.0, g.max_abs()):
        raise JetError("g is not the zbar-gradient of a real function")
    return L


# psi(z_jet, u_jet) -> (Psi jet, dPsi/du jet)
ImplicitFunction = Callable[[WirtingerJet, WirtingerJet], "tuple[WirtingerJet, WirtingerJet]"]


def scalar_newton(psi: ImplicitFunction, z0: complex, u0: float, max_iter: int = 50,
                  tol: float = 1e-10, degenerate: float = 1e-8) -> float:
    """Solve ``psi(z0, conj(z0), u) = 0`` for real ``u`` starting at ``u0``.

    If ``psi`` has a ``scalar(z0, u) -> (value, du)`` method it is used instead
    of order-0 jets.
    """
    scalar = getattr(psi, "scalar", None)
    if scalar is None:
        Z = WirtingerJet.variable(z0, 0)

        def scalar(_z, u):
            val, du = psi(Z, WirtingerJet.constant(u, z0, 0))
            return val.value.real, du.value.real

    u = float(u0)
    for _ in range(max_iter):
        v, d = scalar(z0, u)
        if not (math.isfinite(v) and math.isfinite(d)):
            raise ImplicitSolveError("no graph point")
        if abs(d) <= degenerate:
            raise ImplicitSolveError("implicit function degenerate")
        step = v / d
        u -= step
        if abs(step) <= 1e-15 * max(1.0, abs(u)):
            break
    v, _ = scalar(z0, u)
    if not (math.isfinite(u) and abs(v) < tol):
        raise ImplicitSolveError("no graph point")
    return u


def implicit_jet_solve(psi: ImplicitFunction, u0: float, center: complex = 0j,
                       order: int = DEFAULT_ORDER, seed: WirtingerJet | None = None,
                       max_iter: int = 50) -> WirtingerJet:
    """Jet of the real function ``u(z, zbar)`` defined by ``psi(z, zbar, u) = 0``.

    ``psi`` receives the jet of ``z`` and a real candidate jet ``U`` and returns
    the pair ``(psi(z, zbar, U), dpsi/du(z, zbar, U))`` as jets.  ``u0`` is a
    starting guess for the graph value at ``center``; it is polished by scalar
    Newton before the jet Newton iteration, which doubles the attained order
    each step.
    """
    if seed is None:
        u = scalar_newton(psi, center, u0, max_iter=max_iter)
        U = WirtingerJet.constant(u, center, order)
        # attained order doubles per sweep: 1, 3, 7, ...
        targets = []
        k = 1
        while k < order:
            targets.append(k)
            k = 2 * k + 1
        targets.append(order)
    else:
        U = seed.truncate(order).realify()
        targets = [order]
    for n in targets:
        Z = WirtingerJet.variable(center, n)
        Un = U.truncate(n)
        val, du = psi(Z, Un)
        if abs(du.value) <= 1e-8:
            raise ImplicitSolveError("implicit function degenerate")
        delta = (val * jet_recip(du)).realify()
        c = U.coeffs.copy()
        c[: n + 1, : n + 1] -= delta.coeffs
        U = WirtingerJet(c, center, real=True)
    return U.realify()


def univariate_reversion(g: UnivariateJet) -> UnivariateJet:
    """Compositional inverse of ``g`` with ``g(0) = 0`` and ``g'(0) != 0``."""
    if abs(g.center) > 0 or abs(g[0]) > 1e-14:
        raise JetError("reversion needs g(0) = 0 at center 0")
    d1 = g[1]
    if abs(d1) <= 1e-10:
        raise JetError("reversion needs g'(0) != 0")
    n = g.order
    h = np.zeros(n + 1, dtype=complex)
    h[1] = 1.0 / d1
    for k in range(2, n + 1):
        err = g.compose(UnivariateJet(h[: k + 1]))[k]
        h[k] = -err / d1
    return UnivariateJet(h)
