"""The ES family of rigid spherical hypersurfaces.

Each parameter triple ``(c, tau, rho)`` and real root ``phi`` of

    4 phi^3 + 4 tau phi^2 + (tau^2 - rho) phi - |c|^2

defines the germ at 0 of

    (1 - 4 phi |z|^2) S(u) - exp(-2 theta u) |z|^2
        - (phi + conj(c) z + c conj(z) + 4 phi (phi - theta) |z|^2) E(u) = 0

with ``theta = tau + 3 phi``, ``r^2 = 3 phi^2 + 2 tau phi - rho`` and

    S(u) = sin(2 r u) / (2 r),
    E(u) = (exp(-2 theta u) - cos(2 r u) + theta sin(2 r u) / r) / (r^2 + theta^2).

Only ``r^2`` is ever used: both ``S`` and ``E`` are entire in ``u`` with
Taylor coefficients polynomial in ``r^2`` and ``theta``, so the three cases
``r`` real, imaginary or zero, and the removable set ``r^2 + theta^2 = 0``,
need no special handling.

The coefficient of ``phi |z|^2`` in the leading factor is exposed as
``lead``.  Only ``lead = -4`` gives spherical germs for ``phi != 0``; the
variant ``1 + 2 phi |z|^2`` fails the sphericity residuals at the 1e-1 level
and is kept reachable for comparison only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ImplicitSolveError, RealizationError
from .jets import (
    UnivariateJet,
    WirtingerJet,
    implicit_jet_solve,
    jet_compose_many,
)
from .surfaces import DEFAULT_RADIUS, LEVI_THRESHOLD, Disc, ImplicitSurface

ZERO_BAND = 1e-12
MIN_RADIUS = 1e-3
# extra terms kept in S and E so that re-expansion at u0 != 0 is exact to rounding
SERIES_PADDING = 16
LEAD_COEFFICIENT = -4.0


@dataclass(frozen=True)
class ESParams:
    c: complex = 0j
    tau: float = 0.0
    rho: float = 0.0

    def __post_init__(self):
        vals = (complex(self.c).real, complex(self.c).imag, self.tau, self.rho)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("ES parameters must be finite")
        object.__setattr__(self, "c", complex(self.c))
        object.__setattr__(self, "tau", float(self.tau))
        object.__setattr__(self, "rho", float(self.rho))

    def cubic(self, phi: float) -> float:
        t, r = self.tau, self.rho
        return 4 * phi ** 3 + 4 * t * phi ** 2 + (t * t - r) * phi - abs(self.c) ** 2

    def cubic_derivative(self, phi: float) -> float:
        t, r = self.tau, self.rho
        return 12 * phi ** 2 + 8 * t * phi + (t * t - r)


@dataclass(frozen=True)
class RealRoot:
    value: float
    multiplicity: int


@dataclass(frozen=True)
class ESDerived:
    params: ESParams
    phi: float
    all_real_roots: tuple[RealRoot, ...]
    root_index: int
    theta: float
    r_squared: float
    regime: str

    def record(self) -> dict:
        """Machine-readable derivation record."""
        return {
            "c_re": self.params.c.real,
            "c_im": self.params.c.imag,
            "tau": self.params.tau,
            "rho": self.params.rho,
            "roots": [{"value": r.value, "multiplicity": r.multiplicity} for r in self.all_real_roots],
            "chosen": self.root_index,
            "phi": self.phi,
            "theta": self.theta,
            "r_squared": self.r_squared,
            "regime": self.regime,
        }


def _polish(p: ESParams, x: float, steps: int = 3) -> float:
    for _ in range(steps):
        d = p.cubic_derivative(x)
        if d == 0:
            break
        nx = x - p.cubic(x) / d
        if abs(p.cubic(nx)) > abs(p.cubic(x)):
            break
        x = nx
    return x


def solve_cubic_real_roots(p: ESParams) -> list[RealRoot]:
    """Real roots of the ES cubic in ascending order, with multiplicities.

    Closed form (trigonometric or Cardano) on the depressed cubic, followed
    by Newton polishing of each root.
    """
    # monic: phi^3 + a phi^2 + b phi + k, rescaled phi = scale * x so that
    # the coefficients are O(1) and the discriminant cannot under/overflow
    a = p.tau
    b = (p.tau ** 2 - p.rho) / 4.0
    k = -abs(p.c) ** 2 / 4.0
    scale = max(abs(a), abs(b) ** 0.5, abs(k) ** (1 / 3))
    if scale == 0.0:
        return [RealRoot(0.0, 3)]
    a, b, k = a / scale, b / scale / scale, k / scale / scale / scale
    # x = t - a/3:  t^3 + P t + Q
    P = b - a * a / 3.0
    Q = 2 * a ** 3 / 27.0 - a * b / 3.0 + k
    shift = -a / 3.0
    disc = -(4 * P ** 3 + 27 * Q ** 2)
    if abs(P) <= 1e-14 and abs(Q) <= 1e-14:
        xs = [(shift, 3)]
    elif abs(disc) <= 1e-12:
        xs = sorted([(-1.5 * Q / P + shift, 2), (3.0 * Q / P + shift, 1)])
    elif disc > 0:
        m = 2.0 * math.sqrt(-P / 3.0)
        arg = min(1.0, max(-1.0, 3.0 * Q / (P * m)))
        ang = math.acos(arg) / 3.0
        xs = [(m * math.cos(ang - 2 * math.pi * j / 3.0) + shift, 1) for j in range(3)]
    else:
        sq = math.sqrt(-disc / 108.0)
        xs = [(float(np.cbrt(-Q / 2.0 + sq) + np.cbrt(-Q / 2.0 - sq)) + shift, 1)]
    roots = [RealRoot(scale * x, m) for x, m in xs]
    out = []
    for r in roots:
        v = _polish(p, r.value) if r.multiplicity == 1 else r.value
        out.append(RealRoot(float(v) + 0.0, r.multiplicity))
    return sorted(out, key=lambda r: r.value)


def derive(p: ESParams, root_index: int = 0) -> ESDerived:
    roots = solve_cubic_real_roots(p)
    if not 0 <= root_index < len(roots):
        raise IndexError(f"root index {root_index} out of range for {len(roots)} real root(s)")
    phi = roots[root_index].value
    theta = p.tau + 3 * phi
    r2 = 3 * phi * phi + 2 * p.tau * phi - p.rho
    if abs(r2) < ZERO_BAND:
        regime = "r_zero"
    elif r2 > 0:
        regime = "r_real"
    else:
        regime = "r_imaginary"
    return ESDerived(p, phi, tuple(roots), root_index, theta, r2, regime)


def series_S(d: ESDerived, order: int) -> UnivariateJet:
    """Taylor coefficients of ``sin(2 r u) / (2 r)`` (equal to ``u`` when ``r = 0``)."""
    out = np.zeros(order + 1)
    for k in range((order - 1) // 2 + 1):
        out[2 * k + 1] = (-4.0 * d.r_squared) ** k / math.factorial(2 * k + 1)
    return UnivariateJet(out)


def series_E(d: ESDerived, order: int) -> UnivariateJet:
    """Taylor coefficients of the ``E`` factor, computed without division.

    With ``x = theta^2``, ``y = -r^2`` the numerator coefficient of ``u^n`` is
    ``2^n/n! (x^m - y^m)`` for ``n = 2m`` and ``-theta 2^n/n! (x^m - y^m)``
    for ``n = 2m + 1``; ``(x^m - y^m)/(x - y)`` is a finite geometric sum.
    """
    x, y, th = d.theta ** 2, -d.r_squared, d.theta
    out = np.zeros(order + 1)
    for n in range(2, order + 1):
        m = n // 2
        g = sum(x ** j * y ** (m - 1 - j) for j in range(m))
        coef = 2.0 ** n / math.factorial(n) * g
        out[n] = coef if n % 2 == 0 else -th * coef
    return UnivariateJet(out)


@dataclass
class ESDefiningFunction:
    """Callable ``psi(Z, U) -> (Psi, Psi_u)`` for :func:`implicit_jet_solve`."""

    derived: ESDerived
    lead: float = LEAD_COEFFICIENT
    n_terms: int = 10 + SERIES_PADDING
    _S: UnivariateJet = field(init=False, repr=False)
    _E: UnivariateJet = field(init=False, repr=False)

    def __post_init__(self):
        self._S = series_S(self.derived, self.n_terms)
        self._E = series_E(self.derived, self.n_terms)
        self._dS = self._S.derivative()
        self._dE = self._E.derivative()

    def __call__(self, Z: WirtingerJet, U: WirtingerJet):
        d = self.derived
        phi, th, c = d.phi, d.theta, d.params.c
        Zb = Z.conj()
        t = (Z * Zb).realify()
        S, dS, E, dE, ex = jet_compose_many(
            [self._S, self._dS, self._E, self._dE, _exp_series(th)], U)
        lead = 1.0 + (self.lead * phi) * t
        bracket = (Z * c.conjugate() + Zb * c).realify() + phi + t * (4 * phi * (phi - th))
        val = lead * S - ex * t - bracket * E
        dval = lead * dS + ex * t * (2 * th) - bracket * dE
        return val.realify(), dval.realify()

    def scalar(self, z0: complex, u: float) -> tuple[float, float]:
        """Value and u-derivative of the defining function at one point."""
        d = self.derived
        phi, th, c = d.phi, d.theta, d.params.c
        t = abs(z0) ** 2
        ex = math.exp(-2 * th * u)
        lead = 1.0 + self.lead * phi * t
        bracket = 2 * (c.conjugate() * z0).real + phi + 4 * phi * (phi - th) * t
        S, dS = self._S(u).real, self._dS(u).real
        E, dE = self._E(u).real, self._dE(u).real
        return lead * S - ex * t - bracket * E, lead * dS + 2 * th * ex * t - bracket * dE


def _exp_series(theta: float):
    """Taylor series of ``exp(-2 theta u)`` about any ``u0``."""
    def series(x0, n):
        base = math.exp(-2 * theta * x0)
        return UnivariateJet([base * (-2 * theta) ** k / math.factorial(k) for k in range(n + 1)], x0)
    return series


def defining_function(p: ESParams, d: ESDerived | None = None,
                      lead: float = LEAD_COEFFICIENT) -> ESDefiningFunction:
    return ESDefiningFunction(d if d is not None else derive(p), lead)


def _square_grid(domain: Disc, n: int) -> np.ndarray:
    half = domain.radius / math.sqrt(2.0)
    xs = np.linspace(-half, half, n)
    X, Y = np.meshgrid(xs, xs)
    return domain.center + X + 1j * Y


def _solves_on(psi, domain: Disc, n: int) -> bool:
    for z0 in _square_grid(domain, n).ravel():
        try:
            U = implicit_jet_solve(psi, 0.0, complex(z0), 2)
        except ImplicitSolveError:
            return False
        if not abs(U[1, 1].real) > LEVI_THRESHOLD:
            return False
    return True


class ESSurface(ImplicitSurface):
    kind = "es"

    def __init__(self, derived: ESDerived, domain: Disc):
        super().__init__(defining_function(derived.params, derived), domain)
        self.derived = derived

    def with_domain(self, domain):
        return ESSurface(self.derived, domain)


def es_surface(p: ESParams, root_index: int = 0, radius: float = DEFAULT_RADIUS,
               grid: int = 9) -> ESSurface:
    """Implicit surface of the ES family, with its radius shrunk until usable."""
    d = derive(p, root_index)
    psi = defining_function(p, d)
    r = radius
    while r >= MIN_RADIUS:
        dom = Disc(0j, r)
        if _solves_on(psi, dom, grid):
            return ESSurface(d, dom)
        r *= 0.5
    raise RealizationError("ES surface not realizable at requested scale")
