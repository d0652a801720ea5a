"""Rigid hypersurfaces ``u = F(z, zbar)`` in C^2 that emit jets of ``F``."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .exceptions import DomainError, ImplicitSolveError, JetError, SpecError
from .jets import (
    DEFAULT_ORDER,
    ImplicitFunction,
    UnivariateJet,
    WirtingerJet,
    d_z,
    d_zbar,
    implicit_jet_solve,
    jet_arcsin,
    jet_compose_analytic,
    jet_compose_bivariate,
    jet_powers,
    univariate_reversion,
)

DEFAULT_RADIUS = 0.3
LEVI_THRESHOLD = 1e-8


@dataclass(frozen=True)
class Disc:
    center: complex = 0j
    radius: float = DEFAULT_RADIUS

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("disc radius must be positive")

    def contains(self, z: complex) -> bool:
        return abs(complex(z) - self.center) <= self.radius * (1 + 1e-12)


class RigidSurface:
    """Base class; subclasses implement :meth:`_jet`."""

    kind = "abstract"

    def __init__(self, domain: Disc | None = None):
        self.domain = domain if domain is not None else Disc()

    def _check(self, z0: complex) -> complex:
        z0 = complex(z0)
        if not self.domain.contains(z0):
            raise DomainError(f"point {z0} outside domain {self.domain}")
        return z0

    def jet(self, z0: complex, order: int = DEFAULT_ORDER) -> WirtingerJet:
        return self._jet(self._check(z0), order)

    def _jet(self, z0: complex, order: int) -> WirtingerJet:
        raise NotImplementedError

    def value(self, z0: complex) -> float:
        """Closed-form ``F(z0)``; falls back to the order-0 jet."""
        return self.jet(z0, 0).value.real

    def levi_form(self, z0: complex) -> float:
        """``F_{z zbar}(z0)``."""
        return self.jet(z0, 2)[1, 1].real

    def with_domain(self, domain: Disc) -> RigidSurface:
        raise NotImplementedError


def _zz(z0: complex, order: int) -> tuple[WirtingerJet, WirtingerJet]:
    return WirtingerJet.variable(z0, order), WirtingerJet.conj_variable(z0, order)


class HeisenbergSurface(RigidSurface):
    """``u = |z|^2``."""

    kind = "heisenberg"

    def _jet(self, z0, order):
        Z, Zb = _zz(z0, order)
        return (Z * Zb).realify()

    def value(self, z0):
        return abs(self._check(z0)) ** 2

    def with_domain(self, domain):
        return HeisenbergSurface(domain)


class SinQuadricSurface(RigidSurface):
    """``sin u = |z|^2``, i.e. ``u = arcsin(|z|^2)``."""

    kind = "sin_quadric"

    def __init__(self, domain: Disc | None = None):
        super().__init__(domain)
        if abs(self.domain.center) + self.domain.radius >= 1:
            raise DomainError("sin_quadric needs |z| < 1 on its domain")

    def _jet(self, z0, order):
        Z, Zb = _zz(z0, order)
        return jet_arcsin((Z * Zb).realify())

    def value(self, z0):
        return math.asin(abs(self._check(z0)) ** 2)

    def with_domain(self, domain):
        return SinQuadricSurface(domain)


class PolynomialSurface(RigidSurface):
    """``u = sum c_ab z^a zbar^b`` with a Hermitian coefficient table.

    ``coeffs`` maps ``(a, b)`` to a complex value.  Missing mirror entries are
    filled with ``conj(c_ab)``; given mirrors must agree.
    """

    kind = "polynomial"

    def __init__(self, coeffs: dict, domain: Disc | None = None):
        super().__init__(domain)
        table: dict[tuple[int, int], complex] = {}
        for (a, b), v in coeffs.items():
            a, b, v = int(a), int(b), complex(v)
            if a < 0 or b < 0:
                raise SpecError("polynomial exponents must be non-negative")
            table[(a, b)] = table.get((a, b), 0j) + v
        for (a, b), v in list(table.items()):
            mirror = table.get((b, a))
            if mirror is None:
                table[(b, a)] = v.conjugate()
            elif abs(mirror - v.conjugate()) > 1e-12 * max(1.0, abs(v)):
                raise SpecError(f"coefficient table not Hermitian at ({a}, {b})")
        self.coeffs = {k: v for k, v in sorted(table.items()) if v != 0}
        self.degree = max((a + b for a, b in self.coeffs), default=0)

    def _jet(self, z0, order):
        Z, Zb = _zz(z0, order)
        amax = max((a for a, _ in self.coeffs), default=0)
        zp, zbp = jet_powers(Z, amax), jet_powers(Zb, amax)
        acc = WirtingerJet.zero(z0, order)
        for (a, b), v in self.coeffs.items():
            acc = acc + (zp[a] * zbp[b]) * v
        return acc.realify()

    def value(self, z0):
        z0 = self._check(z0)
        return sum(v * z0 ** a * z0.conjugate() ** b for (a, b), v in self.coeffs.items()).real if self.coeffs else 0.0

    def conjugate_reflected(self) -> PolynomialSurface:
        """Surface with table ``c_ab -> c_ba``, i.e. ``F(conj z)``."""
        dom = Disc(self.domain.center.conjugate(), self.domain.radius)
        return PolynomialSurface({(b, a): v for (a, b), v in self.coeffs.items()}, dom)

    def with_domain(self, domain):
        return PolynomialSurface(self.coeffs, domain)


class ImplicitSurface(RigidSurface):
    """Graph of the real solution ``u`` of ``psi(z, zbar, u) = 0`` near ``u = 0``.

    ``psi`` follows the :func:`cr_rigid.jets.implicit_jet_solve` convention.
    Scalar Newton at each point starts from ``guess(z0)`` (default 0).
    """

    kind = "implicit"

    def __init__(self, psi: ImplicitFunction, domain: Disc | None = None,
                 guess: Callable[[complex], float] | None = None):
        super().__init__(domain)
        self.psi = psi
        self.guess = guess or (lambda z0: 0.0)

    def _jet(self, z0, order):
        return implicit_jet_solve(self.psi, self.guess(z0), z0, order)

    def with_domain(self, domain):
        return ImplicitSurface(self.psi, domain, self.guess)


@dataclass(frozen=True)
class RigidMap:
    """``(z, w) -> (g(z), a w + h(z))`` with polynomial ``g``, ``h`` at 0."""

    g: UnivariateJet
    a: float = 1.0
    h: UnivariateJet = field(default_factory=lambda: UnivariateJet([0.0]))

    def __post_init__(self):
        if abs(self.g.center) or abs(self.h.center):
            raise ValueError("rigid map series must be centered at 0")
        if abs(self.g[0]) > 1e-14 or abs(self.h[0]) > 1e-14:
            raise ValueError("rigid map needs g(0) = h(0) = 0")
        if abs(self.g[1]) <= 1e-10:
            raise ValueError("rigid map needs g'(0) != 0")
        if not (math.isfinite(self.a) and self.a != 0):
            raise ValueError("rigid map needs a real nonzero scale a")

    @classmethod
    def identity(cls, order: int = DEFAULT_ORDER) -> RigidMap:
        return cls(UnivariateJet.identity(order), 1.0, UnivariateJet(np.zeros(order + 1)))

    def inverse(self, order: int | None = None) -> RigidMap:
        """Inverse map, exact to the truncation order of the stored series."""
        n = order if order is not None else max(self.g.order, self.h.order)
        g = UnivariateJet(np.pad(self.g.coeffs, (0, max(0, n - self.g.order)))[: n + 1])
        ginv = univariate_reversion(g)
        h = UnivariateJet(np.pad(self.h.coeffs, (0, max(0, n - self.h.order)))[: n + 1])
        hinv = h.compose(ginv) * (-1.0 / self.a)
        return RigidMap(ginv, 1.0 / self.a, UnivariateJet(hinv.coeffs))


def _holomorphic_inverse(g: UnivariateJet, zp: complex, order: int, guess: complex) -> WirtingerJet:
    """Jet at ``zp`` of the local inverse ``w`` of the polynomial ``g``."""
    dg = g.derivative()
    w = complex(guess)
    for _ in range(60):
        step = (g(w) - zp) / dg(w)
        w -= step
        if abs(step) <= 1e-16 * max(1.0, abs(w)):
            break
    if abs(g(w) - zp) > 1e-12 * max(1.0, abs(zp)):
        raise JetError("rigid map inversion failed")
    if order == 0:
        return WirtingerJet.constant(w, zp, 0)
    # g(w + t) - zp as a series in t, then reverted: w(z) is holomorphic
    shifted = g.taylor_shift(w).coeffs
    local = np.zeros(order + 1, dtype=complex)
    local[1: min(order, g.order) + 1] = shifted[1: order + 1]
    inv = univariate_reversion(UnivariateJet(local))
    c = np.zeros((order + 1, order + 1), dtype=complex)
    c[:, 0] = inv.coeffs
    c[0, 0] = w
    return WirtingerJet(c, zp)


class MappedSurface(RigidSurface):
    """Image of ``base`` under a :class:`RigidMap`.

    ``F'(z') = a F(g^-1(z'), conj(g^-1(z'))) + Re h(g^-1(z'))``.
    """

    kind = "mapped"

    def __init__(self, base: RigidSurface, rigid_map: RigidMap, domain: Disc | None = None):
        self.base = base
        self.map = rigid_map
        if domain is None:
            domain = self._image_domain()
        super().__init__(domain)
        self._ginv = univariate_reversion(rigid_map.g)

    def _image_domain(self) -> Disc:
        g, d = self.map.g, self.base.domain
        c = g(d.center)
        theta = np.linspace(0, 2 * np.pi, 128, endpoint=False)
        rim = np.array([g(d.center + d.radius * np.exp(1j * t)) for t in theta])
        return Disc(complex(c), 0.9 * float(np.min(np.abs(rim - c))))

    def _jet(self, zp, order):
        guess = self._ginv(zp) if abs(zp) < 0.5 else self.base.domain.center
        W = _holomorphic_inverse(self.map.g, zp, order, guess)
        w0 = W.value
        base = self.base.jet(w0, order)
        dW = W - w0
        F = jet_compose_bivariate(base, dW, dW.conj())
        hW = jet_compose_analytic(self.map.h, W)
        Fp = F * self.map.a + hW.real_part()
        return Fp.realify()

    def with_domain(self, domain):
        return MappedSurface(self.base, self.map, domain)


def apply_rigid_map(s: RigidSurface, m: RigidMap) -> RigidSurface:
    return MappedSurface(s, m)


def surface_jet(s: RigidSurface, z0: complex, order: int = DEFAULT_ORDER) -> WirtingerJet:
    return s.jet(z0, order)


def levi_form(s: RigidSurface, z0: complex) -> float:
    return s.levi_form(z0)


def levi_derivatives(F: WirtingerJet) -> tuple[WirtingerJet, WirtingerJet]:
    """``(F_{z zbar}, F_{z zbar zbar})`` as jets."""
    L = d_zbar(d_z(F))
    return L, d_zbar(L)


# ---------------------------------------------------------------------------
# specification documents

_TOP_KEYS = {"kind", "coeffs", "es", "domain"}
_ES_KEYS = {"c_re", "c_im", "tau", "rho", "root_index"}
_DOMAIN_KEYS = {"center_re", "center_im", "radius"}


def _reject_unknown(obj: dict, allowed: set, where: str) -> None:
    if not isinstance(obj, dict):
        raise SpecError(f"{where} must be a JSON object")
    extra = set(obj) - allowed
    if extra:
        raise SpecError(f"unknown keys in {where}: {sorted(extra)}")


def _number(obj: dict, key: str, default=None) -> float:
    v = obj.get(key, default)
    if v is None:
        raise SpecError(f"missing required key {key!r}")
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise SpecError(f"{key!r} must be a finite number")
    return float(v)


def parse_domain(obj: dict | None) -> Disc | None:
    if obj is None:
        return None
    _reject_unknown(obj, _DOMAIN_KEYS, "domain")
    radius = _number(obj, "radius", DEFAULT_RADIUS)
    if radius <= 0:
        raise SpecError("domain radius must be positive")
    return Disc(complex(_number(obj, "center_re", 0.0), _number(obj, "center_im", 0.0)), radius)


def parse_es(obj: dict | None):
    """``(ESParams, root_index or None)`` from the ``es`` block of a spec."""
    from .es_family import ESParams

    obj = {} if obj is None else obj
    _reject_unknown(obj, _ES_KEYS, "es")
    params = ESParams(complex(_number(obj, "c_re", 0.0), _number(obj, "c_im", 0.0)),
                      _number(obj, "tau", 0.0), _number(obj, "rho", 0.0))
    idx = obj.get("root_index")
    if idx is not None and (isinstance(idx, bool) or not isinstance(idx, int)):
        raise SpecError("root_index must be an integer")
    return params, idx


def surface_from_spec(spec: dict, root_index: int | None = None) -> RigidSurface:
    """Build a surface from a specification document (see README)."""
    _reject_unknown(spec, _TOP_KEYS, "surface spec")
    kind = spec.get("kind")
    domain = parse_domain(spec.get("domain"))
    if kind == "heisenberg":
        return HeisenbergSurface(domain)
    if kind == "sin_quadric":
        try:
            return SinQuadricSurface(domain)
        except DomainError as exc:
            raise SpecError(str(exc)) from exc
    if kind == "polynomial":
        rows = spec.get("coeffs")
        if not isinstance(rows, list) or not rows:
            raise SpecError("polynomial spec needs a non-empty 'coeffs' list")
        table = {}
        for row in rows:
            if not (isinstance(row, list) and len(row) == 4):
                raise SpecError("each coefficient row must be [a, b, re, im]")
            a, b, re, im = row
            if not (isinstance(a, int) and isinstance(b, int)) or isinstance(a, bool) or isinstance(b, bool):
                raise SpecError("coefficient exponents must be integers")
            if not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in (re, im)):
                raise SpecError("coefficient values must be numbers")
            table[(a, b)] = table.get((a, b), 0j) + complex(re, im)
        # a one-sided table is completed by conjugate mirroring
        return PolynomialSurface(table, domain)
    if kind == "es":
        from .es_family import es_surface

        params, idx = parse_es(spec.get("es"))
        idx = root_index if root_index is not None else (idx or 0)
        try:
            return es_surface(params, idx, radius=domain.radius if domain else DEFAULT_RADIUS)
        except IndexError as exc:
            raise SpecError(str(exc)) from exc
    raise SpecError(f"unknown surface kind {kind!r}")


def load_surface_spec(path: str) -> dict:
    try:
        with open(path) as fh:
            spec = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise SpecError(f"cannot read spec {path}: {exc}") from exc
    _reject_unknown(spec, _TOP_KEYS, "surface spec")
    return spec


__all__ = [
    "Disc",
    "RigidSurface",
    "HeisenbergSurface",
    "SinQuadricSurface",
    "PolynomialSurface",
    "ImplicitSurface",
    "MappedSurface",
    "RigidMap",
    "apply_rigid_map",
    "surface_jet",
    "levi_form",
    "levi_derivatives",
    "surface_from_spec",
    "parse_es",
    "load_surface_spec",
    "ImplicitSolveError",
]
