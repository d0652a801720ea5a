import json

import numpy as np
import pytest

from cr_rigid.elliptic import (
    FirstOrderSystemSolver,
    GridField,
    GridSpec,
    build_problem,
    fields_to_csv,
    manufactured_study,
    reconstruct_F_from_f,
    reconstruct_levi_from_mu,
    reim_consistency,
    reim_split,
    solve_first_order_system,
    symbol_determinant_first_order,
    symbol_determinant_third_order,
)
from cr_rigid.exceptions import GridError, JetError
from cr_rigid.jets import WirtingerJet, d_z, d_zbar, jet_log
from cr_rigid.sphericity import CoeffQuadruple, mu_jet
from cr_rigid.surfaces import Disc, HeisenbergSurface, SinQuadricSurface

from conftest import explicit_fixtures, quartic

SQ = CoeffQuadruple.polynomial(A=(0, 1))


def sin_quadric_source():
    return SinQuadricSurface(Disc(0j, 0.36))


class TestSymbols:
    @pytest.mark.parametrize("l, expected", [((1, 0), 1), ((0, 0), 0), ((3, 4), 25)])
    def test_first(self, l, expected):
        assert symbol_determinant_first_order(*l) == (expected, expected)

    @pytest.mark.parametrize("l, expected", [((1, 0), 1), ((1, 1), 4), ((2, 1), 85)])
    def test_third(self, l, expected):
        assert symbol_determinant_third_order(*l) == (expected, expected)


class TestGrid:
    def test_min_resolution(self):
        with pytest.raises(GridError):
            GridSpec.square(0.25, 4)

    def test_zero_size(self):
        with pytest.raises(GridError):
            GridSpec((0.1, 0.1), (0.0, 1.0), 9, 9)

    def test_field_validation(self):
        g = GridSpec.square(0.25, 9)
        with pytest.raises(GridError):
            GridField(g, np.zeros((8, 9)))
        with pytest.raises(GridError):
            GridField(g, np.full((9, 9), np.nan))


class TestProblem:
    def test_heisenberg_boundary(self):
        g = GridSpec.square(0.25, 9)
        p = build_problem(CoeffQuadruple.zero(), g, HeisenbergSurface(Disc(0j, 0.36)))
        pts = g.points()
        assert np.allclose(p.boundary_r, pts.real) and np.allclose(p.boundary_s, -pts.imag)
        G, H = p.rhs(p.boundary_r, p.boundary_s)
        assert not G.any() and not H.any()

    def test_sin_quadric_rhs_is_reference_derivative(self):
        g = GridSpec.square(0.25, 9)
        p = build_problem(SQ, g, sin_quadric_source())
        z = g.points()
        f = p.reference_r + 1j * p.reference_s
        G, H = p.rhs(p.reference_r, p.reference_s)
        assert np.allclose(G + 1j * H, 2 * z * f ** 3)

    def test_requires_polynomial(self):
        q = CoeffQuadruple(0, 0, 0, 0)
        with pytest.raises(ValueError):
            build_problem(q, GridSpec.square(0.25, 9), HeisenbergSurface(Disc(0j, 0.36)))


class TestSolver:
    def test_heisenberg_exact(self):
        g = GridSpec.square(0.25, 17)
        p = build_problem(CoeffQuadruple.zero(), g, HeisenbergSurface(Disc(0j, 0.36)))
        r, s, log = solve_first_order_system(p)
        assert np.max(np.abs(r.values - g.points().real)) < 1e-10
        assert np.max(np.abs(s.values + g.points().imag)) < 1e-10
        assert log[-1]["status"] == "converged"

    def test_sin_quadric_second_order(self):
        study = manufactured_study(SQ, sin_quadric_source(), resolutions=(17, 33))
        assert study.errors[1] < study.errors[0] / 3.5
        assert 1.7 <= study.orders[0] <= 2.3

    def test_noisy_boundary_is_flagged(self):
        g = GridSpec.square(0.25, 17)
        p = build_problem(SQ, g, sin_quadric_source())
        rng = np.random.default_rng(0)
        p.boundary_r = p.boundary_r + 0.1 * rng.standard_normal(p.boundary_r.shape)
        solver = FirstOrderSystemSolver().fit(p)
        assert solver.status_ == "stationary" and solver.residual_norm_ > 1e-3
        lines = [json.loads(x) for x in solver.log_jsonl().splitlines()]
        assert lines[-1]["status"] == "stationary"
        assert set(lines[0]) >= {"iteration", "residual_norm", "damping"}
        assert all(b["residual_norm"] <= a["residual_norm"] for a, b in zip(lines, lines[1:]))

    def test_csv_export(self):
        g = GridSpec.square(0.25, 9)
        p = build_problem(CoeffQuadruple.zero(), g, HeisenbergSurface(Disc(0j, 0.36)))
        solver = FirstOrderSystemSolver().fit(p)
        rows = fields_to_csv(solver.r_, solver.s_).splitlines()
        assert rows[0] == "x,y,r,s" and len(rows) == 82

    def test_estimator_params(self):
        assert FirstOrderSystemSolver(max_iter=5).get_params()["max_iter"] == 5


class TestReIm:
    def test_heisenberg(self):
        assert reim_consistency(HeisenbergSurface(), 0.1j) == 0

    def test_quartic_split(self):
        split = reim_split(quartic().jet(0.5, 6))
        assert split.residual == pytest.approx(15.0)
        assert split.mismatch < 1e-10

    def test_sin_quadric_grid(self):
        xs = np.linspace(-0.2, 0.2, 5)
        for x in xs:
            for y in xs:
                assert reim_consistency(SinQuadricSurface(), complex(x, y)) < 1e-10


class TestReconstruction:
    @pytest.mark.parametrize("name", sorted(explicit_fixtures()))
    @pytest.mark.parametrize("z0", [0j, 0.1 + 0.05j])
    def test_f_round_trip(self, name, z0):
        s = explicit_fixtures()[name]
        F = s.jet(z0, 7)
        f = d_z(F)
        G = reconstruct_F_from_f(f, F.value.real)
        assert np.max(np.abs(d_z(G).coeffs - f.coeffs)) < 1e-11
        assert np.max(np.abs(G.coeffs - F.coeffs)) < 1e-11

    @pytest.mark.parametrize("name", sorted(explicit_fixtures()))
    @pytest.mark.parametrize("z0", [0j, 0.1 + 0.05j])
    def test_mu_round_trip(self, name, z0):
        s = explicit_fixtures()[name]
        F = s.jet(z0, 8)
        mu = mu_jet(s, z0, 5)
        L = reconstruct_levi_from_mu(mu, F[1, 1].real)
        assert np.max(np.abs(d_zbar(jet_log(L)).coeffs - mu.coeffs)) < 1e-11
        assert np.max(np.abs(L.coeffs - d_zbar(d_z(F)).truncate(L.order).coeffs)) < 1e-11

    def test_mu_zero_is_heisenberg(self):
        L = reconstruct_levi_from_mu(WirtingerJet.zero(order=4), 1.0)
        assert np.array_equal(L.coeffs, WirtingerJet.constant(1.0, order=5).coeffs)

    def test_quartic_levi(self):
        L = reconstruct_levi_from_mu(mu_jet(quartic(), 0j, 4), 1.0)
        assert L[1, 1] == pytest.approx(4.0) and abs(L[2, 2]) < 1e-13

    def test_not_a_log_derivative(self):
        with pytest.raises(JetError):
            reconstruct_levi_from_mu(WirtingerJet.variable(0, 3) * 1j, 1.0)
        with pytest.raises(ValueError):
            reconstruct_levi_from_mu(WirtingerJet.zero(order=3), -1.0)
