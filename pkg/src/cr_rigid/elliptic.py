"""Elliptic systems behind the sphericity equations.

The first-order system for ``r = Re f``, ``s = Im f`` (``f = F_z``)

    r_x + s_y = 2 Re P(z, f),    -r_y + s_x = 2 Im P(z, f),

with ``P(z, f) = A f^3 + B f^2 + C f + D``, is discretized by second-order
finite differences and solved by damped Gauss-Newton.  The third-order
system for ``nu = Re mu``, ``eta = Im mu`` is only checked as the real and
imaginary split of the mu-equation.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .exceptions import CRRigidError, GridError, JetError
from .jets import WirtingerJet, antiderivative_z_realify, antiderivative_zbar_realify, d_x, d_y, jet_exp
from .sphericity import CoeffQuadruple, mu_from_jet, mu_terms
from .surfaces import RigidSurface
from .utils import check_resolution

BOUNDARY_WEIGHT = 1e3


# ---------------------------------------------------------------------------
# symbols


def symbol_determinant_first_order(l1: float, l2: float) -> tuple[float, float]:
    """``(det of the symbol matrix, l1^2 + l2^2)``."""
    m = np.array([[l1, l2], [-l2, l1]], dtype=float)
    return float(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]), float(l1 * l1 + l2 * l2)


def symbol_determinant_third_order(l1: float, l2: float) -> tuple[float, float]:
    """``(det of the cubic symbol matrix, l1^6 + l1^4 l2^2 + l1^2 l2^4 + l2^6)``."""
    m = np.array([[l1 ** 3 + l1 * l2 ** 2, -l1 ** 2 * l2 - l2 ** 3],
                  [l1 ** 2 * l2 + l2 ** 3, l1 ** 3 - l1 * l2 ** 2]], dtype=float)
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    return float(det), float(l1 ** 6 + l1 ** 4 * l2 ** 2 + l1 ** 2 * l2 ** 4 + l2 ** 6)


# ---------------------------------------------------------------------------
# grids and problems


@dataclass(frozen=True)
class GridSpec:
    x_range: tuple[float, float] = (-0.25, 0.25)
    y_range: tuple[float, float] = (-0.25, 0.25)
    nx: int = 17
    ny: int = 17

    def __post_init__(self):
        check_resolution(self.nx, name="nx")
        check_resolution(self.ny, name="ny")
        if not (self.x_range[1] > self.x_range[0] and self.y_range[1] > self.y_range[0]):
            raise GridError("empty rectangle")

    @classmethod
    def square(cls, half_width: float = 0.25, n: int = 17) -> GridSpec:
        return cls((-half_width, half_width), (-half_width, half_width), n, n)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(*self.x_range, self.nx)

    @property
    def y(self) -> np.ndarray:
        return np.linspace(*self.y_range, self.ny)

    @property
    def hx(self) -> float:
        return (self.x_range[1] - self.x_range[0]) / (self.nx - 1)

    @property
    def hy(self) -> float:
        return (self.y_range[1] - self.y_range[0]) / (self.ny - 1)

    def points(self) -> np.ndarray:
        """Complex node coordinates, shape ``(ny, nx)``."""
        X, Y = np.meshgrid(self.x, self.y)
        return X + 1j * Y

    def boundary_mask(self) -> np.ndarray:
        m = np.zeros((self.ny, self.nx), dtype=bool)
        m[0, :] = m[-1, :] = m[:, 0] = m[:, -1] = True
        return m


@dataclass(frozen=True)
class GridField:
    grid: GridSpec
    values: np.ndarray
    name: str = ""

    def __post_init__(self):
        if self.values.shape != (self.grid.ny, self.grid.nx):
            raise GridError("field shape does not match grid")
        if not np.all(np.isfinite(self.values)):
            raise GridError("field values must be finite")


def fields_to_csv(r: GridField, s: GridField) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "y", "r", "s"])
    pts = r.grid.points()
    for idx in np.ndindex(pts.shape):
        w.writerow([repr(pts[idx].real), repr(pts[idx].imag), repr(float(r.values[idx])),
                    repr(float(s.values[idx]))])
    return buf.getvalue()


@dataclass
class EllipticProblem:
    """First-order system with right-hand sides ``G = 2 Re P``, ``H = 2 Im P``."""

    quadruple: CoeffQuadruple
    grid: GridSpec
    boundary_r: np.ndarray
    boundary_s: np.ndarray
    reference_r: np.ndarray | None = None
    reference_s: np.ndarray | None = None

    def rhs(self, r: np.ndarray, s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        P = self.quadruple.P(self.grid.points(), r + 1j * s)
        return 2 * P.real, 2 * P.imag

    def rhs_jacobian(self, r, s):
        """``(G_r, G_s, H_r, H_s)`` pointwise."""
        dP = self.quadruple.dP(self.grid.points(), r + 1j * s)
        return 2 * dP.real, -2 * dP.imag, 2 * dP.imag, 2 * dP.real


def build_problem(q: CoeffQuadruple, grid: GridSpec, source: RigidSurface) -> EllipticProblem:
    """Problem whose boundary data (and reference solution) is ``f = F_z`` of ``source``."""
    if q.mode != "polynomial":
        raise ValueError("build_problem needs a polynomial quadruple")
    pts = grid.points()
    f = np.empty(pts.shape, dtype=complex)
    for idx in np.ndindex(pts.shape):
        F = source.jet(complex(pts[idx]), 2)
        if not abs(F[1, 1]) > 1e-8:
            raise CRRigidError(f"source Levi-degenerate at {pts[idx]}")
        f[idx] = F[1, 0]
    return EllipticProblem(q, grid, f.real.copy(), f.imag.copy(), f.real.copy(), f.imag.copy())


def _diff_matrix(n: int, h: float) -> sp.csr_matrix:
    """Central differences inside, one-sided second order at both ends."""
    rows, cols, vals = [], [], []
    for i in range(n):
        if i == 0:
            rows += [0, 0, 0]; cols += [0, 1, 2]; vals += [-1.5, 2.0, -0.5]
        elif i == n - 1:
            rows += [i, i, i]; cols += [i - 2, i - 1, i]; vals += [0.5, -2.0, 1.5]
        else:
            rows += [i, i]; cols += [i - 1, i + 1]; vals += [-0.5, 0.5]
    return sp.csr_matrix((np.array(vals) / h, (rows, cols)), shape=(n, n))


def _coons(grid: GridSpec, b: np.ndarray) -> np.ndarray:
    """Transfinite interpolation of boundary values into the interior."""
    s = np.linspace(0, 1, grid.nx)[None, :]
    t = np.linspace(0, 1, grid.ny)[:, None]
    bottom, top = b[0:1, :], b[-1:, :]
    left, right = b[:, 0:1], b[:, -1:]
    out = ((1 - t) * bottom + t * top + (1 - s) * left + s * right
           - ((1 - s) * (1 - t) * b[0, 0] + s * (1 - t) * b[0, -1]
              + (1 - s) * t * b[-1, 0] + s * t * b[-1, -1]))
    return out


class FirstOrderSystemSolver(BaseEstimator):
    """Damped Gauss-Newton for the discretized first-order system.

    The residual stacks both equations at every node (one-sided stencils on
    the boundary ring) and both boundary mismatches weighted by
    ``boundary_weight``.  Stops when the residual 2-norm drops below ``tol``,
    when the step stagnates (a least-squares solution of inconsistent data),
    or after ``max_iter`` iterations.  A ``"stationary"`` status with a
    nonzero ``residual_norm_`` flags inconsistent data (or discretization
    error, for manufactured data).
    """

    def __init__(self, max_iter: int = 50, tol: float = 1e-10,
                 boundary_weight: float = BOUNDARY_WEIGHT, min_damping: float = 2.0 ** -10,
                 step_tol: float = 1e-13):
        self.max_iter = max_iter
        self.tol = tol
        self.boundary_weight = boundary_weight
        self.min_damping = min_damping
        self.step_tol = step_tol

    def _operators(self, g: GridSpec):
        Dx = sp.kron(sp.identity(g.ny), _diff_matrix(g.nx, g.hx), format="csr")
        Dy = sp.kron(_diff_matrix(g.ny, g.hy), sp.identity(g.nx), format="csr")
        bidx = np.flatnonzero(g.boundary_mask().ravel())
        Eb = sp.csr_matrix((np.ones(bidx.size), (np.arange(bidx.size), bidx)),
                           shape=(bidx.size, g.nx * g.ny))
        return Dx, Dy, Eb, bidx

    def _residual(self, p, ops, x):
        Dx, Dy, Eb, bidx = ops
        n = p.grid.nx * p.grid.ny
        r, s = x[:n], x[n:]
        shape = (p.grid.ny, p.grid.nx)
        G, H = p.rhs(r.reshape(shape), s.reshape(shape))
        w = self.boundary_weight
        return np.concatenate([
            Dx @ r + Dy @ s - G.ravel(),
            -(Dy @ r) + Dx @ s - H.ravel(),
            w * (r[bidx] - p.boundary_r.ravel()[bidx]),
            w * (s[bidx] - p.boundary_s.ravel()[bidx]),
        ])

    def _jacobian(self, p, ops, x):
        Dx, Dy, Eb, _ = ops
        n = p.grid.nx * p.grid.ny
        shape = (p.grid.ny, p.grid.nx)
        Gr, Gs, Hr, Hs = (sp.diags(a.ravel()) for a in p.rhs_jacobian(x[:n].reshape(shape), x[n:].reshape(shape)))
        w = self.boundary_weight
        Z = sp.csr_matrix(Eb.shape)
        return sp.bmat([[Dx - Gr, Dy - Gs], [-Dy - Hr, Dx - Hs], [w * Eb, Z], [Z, w * Eb]], format="csr")

    def fit(self, problem: EllipticProblem, x0: np.ndarray | None = None):
        g = problem.grid
        ops = self._operators(g)
        if x0 is None:
            x0 = np.concatenate([_coons(g, problem.boundary_r).ravel(), _coons(g, problem.boundary_s).ravel()])
        x = np.asarray(x0, dtype=float).copy()
        res = self._residual(problem, ops, x)
        norm = float(np.linalg.norm(res))
        log = [{"iteration": 0, "residual_norm": norm, "damping": None}]
        status = "max_iter"
        for it in range(1, self.max_iter + 1):
            if norm < self.tol:
                status = "converged"
                break
            J = self._jacobian(problem, ops, x)
            step = spsolve((J.T @ J).tocsc(), -(J.T @ res))
            alpha = 1.0
            while True:
                trial = x + alpha * step
                tres = self._residual(problem, ops, trial)
                tnorm = float(np.linalg.norm(tres))
                if tnorm <= norm or alpha <= self.min_damping:
                    break
                alpha *= 0.5
            stalled = tnorm >= norm * (1 - 1e-12) or alpha * np.linalg.norm(step) <= self.step_tol * max(1.0, np.linalg.norm(x))
            if tnorm <= norm:
                x, res, norm = trial, tres, tnorm
            log.append({"iteration": it, "residual_norm": norm, "damping": alpha})
            if norm < self.tol:
                status = "converged"
                break
            if stalled:
                status = "stationary"
                break
        n = g.nx * g.ny
        self.r_ = GridField(g, x[:n].reshape(g.ny, g.nx), "r")
        self.s_ = GridField(g, x[n:].reshape(g.ny, g.nx), "s")
        self.residual_norm_ = norm
        self.status_ = status
        self.converged_ = status in ("converged", "stationary")
        log[-1]["status"] = status
        self.log_ = log
        return self

    def predict(self, problem: EllipticProblem | None = None) -> tuple[GridField, GridField]:
        check_is_fitted(self, "r_")
        return self.r_, self.s_

    def log_jsonl(self) -> str:
        check_is_fitted(self, "log_")
        return "".join(json.dumps(e, sort_keys=True) + "\n" for e in self.log_)


def solve_first_order_system(p: EllipticProblem, **kwargs) -> tuple[GridField, GridField, list[dict]]:
    solver = FirstOrderSystemSolver(**kwargs).fit(p)
    return solver.r_, solver.s_, solver.log_


@dataclass
class ConvergenceStudy:
    resolutions: list[int]
    errors: list[float]
    residual_norms: list[float]
    orders: list[float]
    status: list[str]
    exact: bool
    order_range: tuple[float, float] = (1.7, 2.3)
    tolerance_exact: float = 1e-10

    @property
    def passed(self) -> bool:
        if self.exact:
            return True
        lo, hi = self.order_range
        return bool(self.orders) and all(lo <= o <= hi for o in self.orders)

    def to_dict(self) -> dict:
        return {"resolutions": self.resolutions, "errors": self.errors, "residual_norms": self.residual_norms,
                "observed_orders": "exact" if self.exact else self.orders,
                "status": self.status, "order_range": list(self.order_range), "passed": self.passed}


def manufactured_study(q: CoeffQuadruple, source: RigidSurface, half_width: float = 0.25,
                       resolutions=(17, 33, 65), solver: FirstOrderSystemSolver | None = None) -> ConvergenceStudy:
    """Max nodal error against the reference ``f`` at each resolution."""
    solver = solver or FirstOrderSystemSolver()
    errors, norms, status = [], [], []
    for n in resolutions:
        p = build_problem(q, GridSpec.square(half_width, n), source)
        solver.fit(p)
        err = max(np.max(np.abs(solver.r_.values - p.reference_r)),
                  np.max(np.abs(solver.s_.values - p.reference_s)))
        errors.append(float(err))
        norms.append(solver.residual_norm_)
        status.append(solver.status_)
    exact = all(e < 1e-10 for e in errors)
    orders = [] if exact else [
        float(math.log(errors[i] / errors[i + 1]) / math.log((resolutions[i + 1] - 1) / (resolutions[i] - 1)))
        for i in range(len(errors) - 1)]
    return ConvergenceStudy(list(resolutions), errors, norms, orders, status, exact)


# ---------------------------------------------------------------------------
# real/imaginary split of the mu-equation


@dataclass(frozen=True)
class ReImSplit:
    lhs: tuple[float, float]
    rhs: tuple[float, float]
    residual: complex
    mismatch: float


def reim_split(F: WirtingerJet) -> ReImSplit:
    """Real form of the mu-equation from an order-6 jet of ``F``.

    The principal part ``mu_{z zbar zbar}`` equals ``(1/8) Laplacian (d_x + i d_y) mu``,
    so with ``mu = nu + i eta``

        nu_xxx + nu_xyy - eta_xxy - eta_yyy = Phi,
        nu_xxy + nu_yyy + eta_xxx + eta_xyy = Psi,

    where ``Phi + i Psi = -8 (lower-order terms)``.  ``mismatch`` compares the
    two lines against ``8 R2`` computed in Wirtinger form.
    """
    mu = mu_from_jet(F)
    nu, eta = mu.real_part(), mu.imag_part()

    def der(j, seq):
        for op in seq:
            j = op(j)
        return j.value.real

    X, Y = d_x, d_y
    line1 = der(nu, (X, X, X)) + der(nu, (X, Y, Y)) - der(eta, (X, X, Y)) - der(eta, (Y, Y, Y))
    line2 = der(nu, (X, X, Y)) + der(nu, (Y, Y, Y)) + der(eta, (X, X, X)) + der(eta, (X, Y, Y))
    principal, *lower = mu_terms(mu)
    rest = -8 * complex(sum(lower))
    r2 = principal + sum(lower)
    mismatch = max(abs(line1 - rest.real - 8 * r2.real), abs(line2 - rest.imag - 8 * r2.imag))
    return ReImSplit((line1, line2), (rest.real, rest.imag), complex(r2), float(mismatch))


def reim_consistency(s: RigidSurface, z0: complex) -> float:
    """Mismatch between the real split and ``8 R2``; expected at rounding level."""
    return reim_split(s.jet(z0, 6)).mismatch


# ---------------------------------------------------------------------------
# reconstructions


def reconstruct_F_from_f(f: WirtingerJet, f_center_value: float = 0.0) -> WirtingerJet:
    """Real ``F`` with ``F_z = f`` and ``F(center) = f_center_value``."""
    return antiderivative_z_realify(f, f_center_value)


def reconstruct_levi_from_mu(mu: WirtingerJet, levi_center_value: float) -> WirtingerJet:
    """``F_{z zbar}`` from ``mu`` as the exponential of a real zbar-antiderivative."""
    if not levi_center_value > 0:
        raise ValueError("levi_center_value must be positive")
    try:
        log_levi = antiderivative_zbar_realify(mu, math.log(levi_center_value))
    except JetError as exc:
        raise JetError("mu is not the zbar-derivative of a real log-Levi function") from exc
    return jet_exp(log_levi)
