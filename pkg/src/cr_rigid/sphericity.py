"""Zero CR-curvature tests for rigid surfaces.

Two independent characterizations are evaluated pointwise from an order-6
jet of ``F``:

* ``R1``: the graph satisfies ``F_zz = A f^3 + B f^2 + C f + D`` (``f = F_z``)
  with holomorphic ``A..D``.  Differentiating in ``zbar`` three times
  determines ``P'(f), P''(f)`` and ``A``; the fourth ``zbar`` derivative must
  then be consistent with ``P'''' = 0``.
* ``R2``: ``mu = F_{z zbar zbar} / F_{z zbar}`` satisfies
  ``mu_{z zbar zbar} - 3 mu_{z zbar} mu + 2 mu_z mu^2 - mu_z mu_zbar = 0``.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from .exceptions import CRRigidError, GridError, LeviDegenerateError
from .jets import DEFAULT_ORDER, WirtingerJet, d_z, d_zbar, jet_recip
from .surfaces import LEVI_THRESHOLD, Disc, RigidSurface
from .utils import as_complex_points, cartesian_grid

SPHERICAL_TOL = 1e-6
NONSPHERICAL_TOL = 1e-3
MAX_FAILURE_FRACTION = 0.2


def _levi_checked(F: WirtingerJet, threshold: float = LEVI_THRESHOLD) -> WirtingerJet:
    L = d_zbar(d_z(F))
    if not abs(L.value) > threshold:
        raise LeviDegenerateError("Levi form below threshold")
    return L


def mu_from_jet(F: WirtingerJet, threshold: float = LEVI_THRESHOLD) -> WirtingerJet:
    """Jet of ``mu = F_{z zbar zbar} / F_{z zbar}``; order drops by three."""
    L = _levi_checked(F, threshold)
    return d_zbar(L) * jet_recip(L.truncate(L.order - 1))


def mu_jet(s: RigidSurface, z0: complex, order: int = 3) -> WirtingerJet:
    return mu_from_jet(s.jet(z0, order + 3))


@dataclass(frozen=True)
class Residual:
    value: complex
    normalizer: float

    @property
    def relative(self) -> float:
        return abs(self.value) / self.normalizer


def mu_terms(mu: WirtingerJet) -> tuple[complex, complex, complex, complex]:
    """The four terms of the mu-equation at the jet center."""
    m = mu.value
    m_z, m_zb = mu.partial(1, 0), mu.partial(0, 1)
    m_zzb, m_zzbzb = mu.partial(1, 1), mu.partial(1, 2)
    return m_zzbzb, -3 * m_zzb * m, 2 * m_z * m * m, -m_z * m_zb


def residual_mu_from_jet(F: WirtingerJet) -> Residual:
    terms = mu_terms(mu_from_jet(F))
    return Residual(complex(sum(terms)), 1.0 + sum(abs(t) for t in terms))


def residual_mu(s: RigidSurface, z0: complex) -> Residual:
    """``R2`` at ``z0`` with its normalizer ``1 + sum |terms|``."""
    return residual_mu_from_jet(s.jet(z0, 6))


@dataclass(frozen=True)
class CoeffQuadruple:
    """Coefficients ``A, B, C, D`` of ``F_zz = A f^3 + B f^2 + C f + D``.

    In ``"pointwise"`` mode ``A..D`` are complex numbers at ``base``.  In
    ``"polynomial"`` mode they are coefficient arrays in powers of
    ``z - base`` (lowest degree first), so they depend on ``z`` alone.
    """

    A: object
    B: object
    C: object
    D: object
    mode: str = "pointwise"
    base: complex = 0j

    @classmethod
    def zero(cls, degree: int = 0, base: complex = 0j) -> CoeffQuadruple:
        z = np.zeros(degree + 1, dtype=complex)
        return cls(z, z, z, z, "polynomial", base)

    @classmethod
    def polynomial(cls, A=(0,), B=(0,), C=(0,), D=(0,), base: complex = 0j) -> CoeffQuadruple:
        arrs = [np.asarray(x, dtype=complex).ravel() for x in (A, B, C, D)]
        return cls(*arrs, mode="polynomial", base=complex(base))

    def values(self) -> tuple[complex, complex, complex, complex]:
        if self.mode != "pointwise":
            raise ValueError("values() needs a pointwise quadruple")
        return tuple(complex(v) for v in (self.A, self.B, self.C, self.D))

    def evaluate(self, z) -> np.ndarray:
        """Stack of ``A(z), B(z), C(z), D(z)`` with shape ``(4,) + z.shape``."""
        if self.mode != "polynomial":
            raise ValueError("evaluate() needs a polynomial quadruple")
        z = np.asarray(z, dtype=complex) - self.base
        return np.stack([np.polynomial.polynomial.polyval(z, np.asarray(c)) for c in
                         (self.A, self.B, self.C, self.D)])

    def P(self, z, f):
        A, B, C, D = self.evaluate(z)
        return ((A * f + B) * f + C) * f + D

    def dP(self, z, f):
        A, B, C, _ = self.evaluate(z)
        return (3 * A * f + 2 * B) * f + C

    def to_dict(self) -> dict:
        def enc(v):
            arr = np.atleast_1d(np.asarray(v, dtype=complex))
            return [[float(x.real), float(x.imag)] for x in arr]
        return {"mode": self.mode, "base": [self.base.real, self.base.imag],
                **{k: enc(getattr(self, k)) for k in "ABCD"}}


@dataclass(frozen=True)
class PointExtraction:
    quadruple: CoeffQuadruple
    dP1: complex
    dP2: complex
    residual: Residual


def _extract(F: WirtingerJet, z0: complex, with_residual: bool) -> PointExtraction:
    _levi_checked(F)
    p = F.partial
    f0 = p(1, 0)
    f1, f2, f3, f4 = p(1, 1), p(1, 2), p(1, 3), p(1, 4)
    P1 = p(2, 1) / f1
    P2 = (p(2, 2) - P1 * f2) / f1 ** 2
    A6 = (p(2, 3) - 3 * P2 * f1 * f2 - P1 * f3) / f1 ** 3
    A = A6 / 6
    B = (P2 - 6 * A * f0) / 2
    C = P1 - 3 * A * f0 ** 2 - 2 * B * f0
    D = p(2, 0) - A * f0 ** 3 - B * f0 ** 2 - C * f0
    q = CoeffQuadruple(A, B, C, D, "pointwise", z0)
    res = Residual(0j, 1.0)
    if with_residual:
        lhs = p(2, 4)
        # fourth zbar derivative of P(f) by Faa di Bruno, P'''' = 0
        terms = (6 * A6 * f1 ** 2 * f2, P2 * (3 * f2 ** 2 + 4 * f1 * f3), P1 * f4)
        res = Residual(lhs - sum(terms), 1.0 + abs(lhs) + sum(abs(t) for t in terms))
    return PointExtraction(q, P1, P2, res)


def extract_coeffs_pointwise(s: RigidSurface, z0: complex) -> CoeffQuadruple:
    """Pointwise ``A, B, C, D`` from an order-5 jet."""
    return _extract(s.jet(z0, 5), complex(z0), False).quadruple


def residual_consistency(s: RigidSurface, z0: complex) -> Residual:
    """``R1`` at ``z0`` with its normalizer."""
    return _extract(s.jet(z0, 6), complex(z0), True).residual


# ---------------------------------------------------------------------------
# holomorphic fit


class HolomorphicQuadrupleRegressor(RegressorMixin, BaseEstimator):
    """Least-squares fit of ``A, B, C, D`` by polynomials in ``z`` alone.

    ``fit(z, Q)`` takes sample points ``z`` (complex, shape ``(n,)``) and
    pointwise values ``Q`` (complex, shape ``(n, 4)``).
    """

    def __init__(self, degree: int = 1, center: complex = 0j):
        self.degree = degree
        self.center = center

    def _design(self, z):
        return np.vander(z - complex(self.center), self.degree + 1, increasing=True)

    def fit(self, z, Q):
        z = as_complex_points(z)
        Q = np.asarray(Q, dtype=complex).reshape(len(z), -1)
        if self.degree < 0:
            raise ValueError("degree must be non-negative")
        if len(z) < 4 * (self.degree + 1):
            raise GridError("grid insufficient")
        V = self._design(z)
        coef, _, rank, _ = np.linalg.lstsq(V, Q, rcond=None)
        if rank < self.degree + 1:
            raise GridError("grid insufficient")
        self.coef_ = coef
        self.n_features_in_ = 1
        self.fit_residual_ = np.max(np.abs(V @ coef - Q), axis=0)
        return self

    def predict(self, z):
        check_is_fitted(self, "coef_")
        return self._design(as_complex_points(z)) @ self.coef_

    def score(self, z, Q, sample_weight=None):
        """Negative max absolute deviation (complex data; R^2 is not meaningful)."""
        return -float(np.max(np.abs(self.predict(z) - np.asarray(Q, dtype=complex))))

    def quadruple(self) -> CoeffQuadruple:
        check_is_fitted(self, "coef_")
        return CoeffQuadruple.polynomial(*self.coef_.T, base=complex(self.center))


@dataclass
class FitReport:
    quadruple: CoeffQuadruple
    degree: int
    fit_residual: list[float]
    cr_residual: list[float]
    holomorphic: bool
    tolerance: float

    def to_dict(self) -> dict:
        return {"quadruple": self.quadruple.to_dict(), "degree": self.degree,
                "fit_residual": self.fit_residual, "cr_residual": self.cr_residual,
                "holomorphic": self.holomorphic, "tolerance": self.tolerance}


def _cr_residual(grid: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Max ``|d/dzbar|`` of each field by central differences on a Cartesian grid."""
    if grid.ndim != 2 or min(grid.shape) < 3:
        return np.full(values.shape[-1], np.nan)
    hx = abs(grid[0, 1] - grid[0, 0])
    hy = abs(grid[1, 0] - grid[0, 0])
    out = []
    for k in range(values.shape[-1]):
        v = values[..., k]
        vx = (v[1:-1, 2:] - v[1:-1, :-2]) / (2 * hx)
        vy = (v[2:, 1:-1] - v[:-2, 1:-1]) / (2 * hy)
        out.append(np.nanmax(np.abs(0.5 * (vx + 1j * vy))))
    return np.array(out)


def fit_holomorphic_models(s: RigidSurface, grid=None, degree: int = 1,
                           tolerance: float = 1e-6) -> FitReport:
    """Fit holomorphic polynomial models to pointwise ``A..D`` over ``grid``."""
    grid = cartesian_grid(s.domain) if grid is None else np.asarray(grid, dtype=complex)
    vals = np.full(grid.shape + (4,), np.nan + 0j)
    for idx in np.ndindex(grid.shape):
        try:
            vals[idx] = extract_coeffs_pointwise(s, complex(grid[idx])).values()
        except CRRigidError:
            pass
    ok = np.all(np.isfinite(vals), axis=-1)
    model = HolomorphicQuadrupleRegressor(degree, s.domain.center).fit(grid[ok], vals[ok])
    cr = _cr_residual(grid, vals)
    fit_res = [float(x) for x in model.fit_residual_]
    holo = max(fit_res) < tolerance and not np.nanmax(cr) >= tolerance
    return FitReport(model.quadruple(), degree, fit_res, [float(x) for x in cr], bool(holo), tolerance)


# ---------------------------------------------------------------------------
# grid reports


@dataclass
class PointReport:
    z: complex
    levi: float | None = None
    r1: complex | None = None
    r1_norm: float | None = None
    r2: complex | None = None
    r2_norm: float | None = None
    error: str | None = None

    @property
    def r1_rel(self) -> float | None:
        return None if self.r1 is None else abs(self.r1) / self.r1_norm

    @property
    def r2_rel(self) -> float | None:
        return None if self.r2 is None else abs(self.r2) / self.r2_norm

    def to_dict(self) -> dict:
        def c(v):
            return None if v is None else [v.real, v.imag]
        return {"z": c(self.z), "levi": self.levi, "r1": c(self.r1), "r1_normalizer": self.r1_norm,
                "r1_relative": self.r1_rel, "r2": c(self.r2), "r2_normalizer": self.r2_norm,
                "r2_relative": self.r2_rel, "error": self.error}


@dataclass
class ResidualReport:
    kind: str
    domain: Disc
    points: list[PointReport]
    spherical_tol: float
    nonspherical_tol: float
    verdict: str = "indeterminate"
    summary: dict = field(default_factory=dict)

    @property
    def failures(self) -> list[PointReport]:
        return [p for p in self.points if p.error is not None]

    def to_dict(self) -> dict:
        return {
            "surface": self.kind,
            "domain": {"center": [self.domain.center.real, self.domain.center.imag],
                       "radius": self.domain.radius},
            "thresholds": {"spherical": self.spherical_tol, "nonspherical": self.nonspherical_tol},
            "verdict": self.verdict,
            "summary": self.summary,
            "points": [p.to_dict() for p in self.points],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["re_z", "im_z", "levi", "r1_rel", "r2_rel"])
        for p in self.points:
            w.writerow([repr(p.z.real), repr(p.z.imag),
                        "" if p.levi is None else repr(p.levi),
                        "" if p.r1_rel is None else repr(p.r1_rel),
                        "" if p.r2_rel is None else repr(p.r2_rel)])
        return buf.getvalue()


def evaluate_point(s: RigidSurface, z0: complex, order: int = DEFAULT_ORDER) -> PointReport:
    """Levi value, ``R1`` and ``R2`` at one point from a single jet of ``F``."""
    pr = PointReport(complex(z0))
    try:
        F = s.jet(z0, max(order, 6))
        pr.levi = F[1, 1].real
        ext = _extract(F, complex(z0), True)
        pr.r1, pr.r1_norm = ext.residual.value, ext.residual.normalizer
        r2 = residual_mu_from_jet(F)
        pr.r2, pr.r2_norm = r2.value, r2.normalizer
    except CRRigidError as exc:
        pr.error = f"{type(exc).__name__}: {exc}"
    return pr


def sphericity_report(s: RigidSurface, n: int = 9, radius: float | None = None,
                      spherical_tol: float = SPHERICAL_TOL,
                      nonspherical_tol: float = NONSPHERICAL_TOL,
                      order: int = DEFAULT_ORDER, grid=None) -> ResidualReport:
    """Evaluate both residuals over a Cartesian grid inscribed in the domain.

    Verdict: ``spherical`` if every point succeeds and both max relative
    residuals are below ``spherical_tol``; ``non-spherical`` if either exceeds
    ``nonspherical_tol``; ``indeterminate`` otherwise.  More than 20% failed
    points raise.
    """
    if not spherical_tol < nonspherical_tol:
        raise ValueError("spherical_tol must be below nonspherical_tol")
    if order < 6:
        raise ValueError("sphericity residuals need jet order >= 6")
    domain = s.domain if radius is None else Disc(s.domain.center, min(radius, s.domain.radius))
    pts = cartesian_grid(domain, n) if grid is None else np.asarray(grid, dtype=complex)
    points = [evaluate_point(s, complex(z), order) for z in pts.ravel()]
    rep = ResidualReport(s.kind, domain, points, spherical_tol, nonspherical_tol)
    good = [p for p in points if p.error is None]
    nfail = len(points) - len(good)
    if nfail > MAX_FAILURE_FRACTION * len(points):
        raise CRRigidError(f"{nfail} of {len(points)} grid points failed; first: {rep.failures[0].error}")
    r1 = np.array([p.r1_rel for p in good]) if good else np.array([np.nan])
    r2 = np.array([p.r2_rel for p in good]) if good else np.array([np.nan])
    levi = np.array([p.levi for p in good]) if good else np.array([np.nan])
    rep.summary = {
        "n_points": len(points), "n_failed": nfail,
        "max_r1_relative": float(np.max(r1)), "mean_r1_relative": float(np.mean(r1)),
        "max_r2_relative": float(np.max(r2)), "mean_r2_relative": float(np.mean(r2)),
        "min_abs_levi": float(np.min(np.abs(levi))),
    }
    m1, m2 = rep.summary["max_r1_relative"], rep.summary["max_r2_relative"]
    if m1 > nonspherical_tol or m2 > nonspherical_tol:
        rep.verdict = "non-spherical"
    elif nfail == 0 and m1 < spherical_tol and m2 < spherical_tol:
        rep.verdict = "spherical"
    else:
        rep.verdict = "indeterminate"
    return rep


__all__ = [
    "CoeffQuadruple",
    "FitReport",
    "HolomorphicQuadrupleRegressor",
    "PointReport",
    "Residual",
    "ResidualReport",
    "evaluate_point",
    "extract_coeffs_pointwise",
    "fit_holomorphic_models",
    "mu_from_jet",
    "mu_jet",
    "mu_terms",
    "residual_consistency",
    "residual_mu",
    "residual_mu_from_jet",
    "sphericity_report",
]
