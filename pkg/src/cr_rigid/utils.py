"""Input validation and grid helpers."""
from __future__ import annotations

import math

import numpy as np

from .exceptions import GridError


def as_complex_points(z) -> np.ndarray:
    """Validate sample points as a finite 1-d complex array."""
    arr = np.asarray(z)
    if arr.dtype == object:
        raise ValueError("points must be numeric")
    arr = arr.astype(complex).ravel()
    if arr.size == 0:
        raise GridError("no sample points")
    if not np.all(np.isfinite(arr)):
        raise ValueError("points must be finite")
    return arr


def check_resolution(n: int, minimum: int = 8, name: str = "resolution") -> int:
    if isinstance(n, bool) or int(n) != n:
        raise GridError(f"{name} must be an integer")
    n = int(n)
    if n < minimum:
        raise GridError(f"{name} {n} below minimum {minimum}")
    return n


def cartesian_grid(domain, n: int = 9) -> np.ndarray:
    """``n x n`` Cartesian grid on the square inscribed in a disc."""
    if n < 1:
        raise GridError("grid needs at least one point per axis")
    half = domain.radius / math.sqrt(2.0)
    xs = np.linspace(-half, half, n) if n > 1 else np.zeros(1)
    X, Y = np.meshgrid(xs, xs)
    return domain.center + X + 1j * Y
