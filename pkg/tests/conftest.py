import math

import numpy as np
import pytest

from cr_rigid.jets import UnivariateJet
from cr_rigid.surfaces import Disc, HeisenbergSurface, PolynomialSurface, RigidMap, SinQuadricSurface

QUARTIC = {(1, 1): 1.0, (2, 2): 1.0}


def quartic(radius=0.6):
    return PolynomialSurface(QUARTIC, Disc(0j, radius))


def explicit_fixtures():
    return {
        "heisenberg": HeisenbergSurface(),
        "sin_quadric": SinQuadricSurface(),
        "quartic": quartic(),
        "mixed": PolynomialSurface({(1, 1): 1.0, (2, 1): 0.3 + 0.2j, (3, 0): 0.1j, (2, 2): -0.5}),
    }


@pytest.fixture(params=sorted(explicit_fixtures()))
def explicit_surface(request):
    return explicit_fixtures()[request.param]


def random_rigid_map(rng, coeff_bound=0.2, degree=3):
    def small():
        return coeff_bound * math.sqrt(rng.uniform()) * np.exp(2j * np.pi * rng.uniform())

    g = UnivariateJet([0.0, 1.0 + small()] + [small() for _ in range(degree - 1)])
    h = UnivariateJet([0.0] + [small() for _ in range(degree)])
    return RigidMap(g, float(rng.uniform(0.5, 2.0)), h)


def random_jet_coeffs(rng, order, scale=1.0):
    n = order + 1
    return scale * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))


def _fd_weights(m, p):
    """Central weights on offsets -p..p for the m-th derivative (second order)."""
    offs = np.arange(-p, p + 1, dtype=float)
    A = np.vander(offs, increasing=True).T
    rhs = np.zeros(offs.size)
    rhs[m] = math.factorial(m)
    return offs, np.linalg.solve(A, rhs)


def _mixed_partial(fn, z0, j, k, h):
    ox, wx = _fd_weights(j, (j + 1) // 2 if j else 0)
    oy, wy = _fd_weights(k, (k + 1) // 2 if k else 0)
    acc = 0.0
    for a, wa in zip(ox, wx):
        for b, wb in zip(oy, wy):
            acc += wa * wb * fn(z0 + a * h + 1j * b * h)
    return acc / h ** (j + k)


def fd_coefficient(fn, z0, a, b, h=0.05, levels=3):
    """``c_ab`` of a real function by Richardson-extrapolated central differences.

    The Wirtinger operator ``d_z^a d_zbar^b`` is expanded as
    ``2^-(a+b) (d_x - i d_y)^a (d_x + i d_y)^b``.
    """
    poly = np.array([[1.0 + 0j]])
    for sign, count in ((-1j, a), (1j, b)):
        for _ in range(count):
            new = np.zeros((poly.shape[0] + 1, poly.shape[1] + 1), dtype=complex)
            new[1:, :-1] += poly
            new[:-1, 1:] += sign * poly
            poly = new
    n = a + b

    def estimate(step):
        return sum(poly[j, n - j] * _mixed_partial(fn, z0, j, n - j, step) for j in range(n + 1)
                   if poly[j, n - j] != 0)

    # symmetric stencils: the error is even in h
    table = [estimate(h / 2 ** i) for i in range(levels)]
    for lev in range(1, levels):
        f = 4.0 ** lev
        table = [(f * table[i + 1] - table[i]) / (f - 1) for i in range(len(table) - 1)]
    return table[0] / (2 ** n * math.factorial(a) * math.factorial(b))
