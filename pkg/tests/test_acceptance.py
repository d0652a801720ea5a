"""Acceptance checks, one per criterion.

Run ``pytest tests/test_acceptance.py -s`` or ``python tests/test_acceptance.py``;
each check prints a single ``PASS``/``FAIL`` line.
"""
import math
import os
import sys
import time

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from cr_rigid.elliptic import (  # noqa: E402
    manufactured_study,
    reconstruct_F_from_f,
    reconstruct_levi_from_mu,
    reim_consistency,
    symbol_determinant_first_order,
    symbol_determinant_third_order,
)
from cr_rigid.es_family import ESParams, derive, es_surface  # noqa: E402
from cr_rigid.jets import d_z, d_zbar, jet_log  # noqa: E402
from cr_rigid.sphericity import (  # noqa: E402
    CoeffQuadruple,
    extract_coeffs_pointwise,
    mu_jet,
    residual_mu,
    sphericity_report,
)
from cr_rigid.surfaces import Disc, HeisenbergSurface, SinQuadricSurface, apply_rigid_map  # noqa: E402
from cr_rigid.utils import cartesian_grid  # noqa: E402

from conftest import quartic, random_rigid_map  # noqa: E402

CHECKS = {}


def criterion(number, title, budget):
    def deco(fn):
        CHECKS[number] = (title, budget, fn)
        return fn
    return deco


@criterion(1, "Heisenberg residuals vanish", 1.0)
def check_heisenberg():
    rep = sphericity_report(HeisenbergSurface(), n=9, radius=0.3)
    worst = max(rep.summary["max_r1_relative"], rep.summary["max_r2_relative"])
    return rep.summary["n_points"] == 81 and worst < 1e-12, f"max relative residual {worst:.2e}"


@criterion(2, "sin u = |z|^2 is spherical with A = z", 1.0)
def check_sin_quadric():
    s = SinQuadricSurface()
    rep = sphericity_report(s)
    r2 = rep.summary["max_r2_relative"]
    dev = 0.0
    for z in cartesian_grid(s.domain, 9).ravel():
        A, B, C, D = extract_coeffs_pointwise(s, complex(z)).values()
        dev = max(dev, abs(A - z), abs(B), abs(C), abs(D))
    return r2 < 1e-8 and dev < 1e-8, f"max R2 rel {r2:.2e}, quadruple deviation {dev:.2e}"


def es_draws(n=50, seed=0, bound=0.3):
    rng = np.random.default_rng(seed)
    for _ in range(n):
        c = bound * math.sqrt(rng.uniform()) * np.exp(2j * np.pi * rng.uniform())
        yield ESParams(complex(c), rng.uniform(-bound, bound), rng.uniform(-bound, bound))


@criterion(3, "ES family draws are spherical for every real root", 30.0)
def check_es_family():
    worst, count, bad = 0.0, 0, []
    for p in es_draws():
        for i in range(len(derive(p).all_real_roots)):
            rep = sphericity_report(es_surface(p, i))
            count += 1
            worst = max(worst, rep.summary["max_r1_relative"], rep.summary["max_r2_relative"])
            if rep.verdict != "spherical":
                bad.append((p, i, rep.verdict))
    return not bad and worst < 1e-6, f"{count} surfaces, max relative residual {worst:.2e}, failures {bad[:3]}"


@criterion(4, "ES degenerations match Heisenberg and arcsin", 1.0)
def check_degenerations():
    h_es, h = es_surface(ESParams()), HeisenbergSurface()
    q_es, q = es_surface(ESParams(rho=-0.25)), SinQuadricSurface()
    pts = cartesian_grid(Disc(0j, 0.3), 5).ravel()
    e1 = max(np.max(np.abs(h_es.jet(z, 6).coeffs - h.jet(z, 6).coeffs)) for z in pts)
    e2 = max(np.max(np.abs(q_es.jet(z, k).coeffs - q.jet(z, k).coeffs)) for z in pts for k in range(7))
    ok = e1 < 1e-12 and e2 < 1e-10 and q_es.domain.radius == 0.3
    return ok, f"heisenberg {e1:.2e}, arcsin {e2:.2e} on radius {q_es.domain.radius}"


@criterion(5, "quartic is detected as non-spherical, R2(0.5) = 15", 1.0)
def check_quartic():
    s = quartic()
    r2 = residual_mu(s, 0.5).value
    verdict = sphericity_report(s).verdict
    return abs(r2 - 15.0) <= 1e-6 and verdict == "non-spherical", f"R2(0.5) = {r2.real:.12g}{r2.imag:+.1e}i, verdict {verdict}"


@criterion(6, "symbol determinants match closed forms and are positive", 1.0)
def check_symbols():
    rng = np.random.default_rng(0)
    worst, positive = 0.0, True
    pts = list(rng.uniform(-10, 10, (1000, 2))) + [(1, 0), (0, 1), (-1, 0), (0, -1), (1e-3, 0)]
    for l1, l2 in pts:
        for fn in (symbol_determinant_first_order, symbol_determinant_third_order):
            det, closed = fn(l1, l2)
            worst = max(worst, abs(det - closed) / closed)
            positive &= closed > 0
    origin = symbol_determinant_first_order(0, 0)[1] == 0 and symbol_determinant_third_order(0, 0)[1] == 0
    return worst < 1e-9 and positive and origin, f"max relative mismatch {worst:.2e}"


@criterion(7, "first-order elliptic solver converges at second order", 60.0)
def check_elliptic():
    sq = manufactured_study(CoeffQuadruple.polynomial(A=(0, 1)), SinQuadricSurface(Disc(0j, 0.36)),
                            half_width=0.25, resolutions=(17, 33, 65))
    he = manufactured_study(CoeffQuadruple.zero(), HeisenbergSurface(Disc(0j, 0.36)),
                            half_width=0.25, resolutions=(17, 33, 65))
    ok = sq.passed and not sq.exact and he.exact and max(he.errors) < 1e-10
    orders = ", ".join(f"{o:.3f}" for o in sq.orders)
    return ok, f"observed orders {orders}; heisenberg max error {max(he.errors):.1e}"


@criterion(8, "rigid maps preserve the sphericity verdict", 10.0)
def check_rigid_invariance():
    rng = np.random.default_rng(0)
    worst, changed = 0.0, 0
    for _ in range(20):
        m = random_rigid_map(rng)
        for s in (HeisenbergSurface(), SinQuadricSurface()):
            rep = sphericity_report(apply_rigid_map(s, m))
            worst = max(worst, rep.summary["max_r1_relative"], rep.summary["max_r2_relative"])
            changed += rep.verdict != "spherical"
    return changed == 0 and worst < 1e-6, f"40 mapped surfaces, max relative residual {worst:.2e}"


def all_fixtures():
    return [HeisenbergSurface(), SinQuadricSurface(), quartic(), es_surface(ESParams(0.1 + 0.2j, 0.1, -0.2))]


@criterion(9, "reconstruction round trips", 1.0)
def check_round_trips():
    e_f = e_mu = 0.0
    for s in all_fixtures():
        for z0 in (0j, 0.1 + 0.05j):
            F = s.jet(z0, 8)
            f = d_z(F)
            e_f = max(e_f, np.max(np.abs(d_z(reconstruct_F_from_f(f, F.value.real)).coeffs - f.coeffs)))
            mu = mu_jet(s, z0, 5)
            L = reconstruct_levi_from_mu(mu, F[1, 1].real)
            e_mu = max(e_mu, np.max(np.abs(d_zbar(jet_log(L)).coeffs - mu.coeffs)))
    return e_f < 1e-11 and e_mu < 1e-11, f"f round trip {e_f:.1e}, mu round trip {e_mu:.1e}"


@criterion(10, "real/imaginary split of the mu-equation", 1.0)
def check_reim():
    worst = 0.0
    for s in all_fixtures():
        for z in cartesian_grid(Disc(0j, 0.2), 3).ravel():
            worst = max(worst, reim_consistency(s, complex(z)))
    worst = max(worst, reim_consistency(quartic(), 0.5))
    return worst < 1e-10, f"max mismatch {worst:.1e}"


def run(number):
    title, budget, fn = CHECKS[number]
    t0 = time.perf_counter()
    ok, detail = fn()
    dt = time.perf_counter() - t0
    ok = bool(ok) and dt < budget
    print(f"{'PASS' if ok else 'FAIL'} criterion {number:2d}: {title} ({detail}; {dt:.2f}s of {budget:g}s)")
    return ok


@pytest.mark.parametrize("number", sorted(CHECKS))
def test_criterion(number):
    assert run(number)


if __name__ == "__main__":
    results = [run(n) for n in sorted(CHECKS)]
    sys.exit(0 if all(results) else 1)
