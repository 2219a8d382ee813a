"""Dense symmetric positive-definite matrix services.

Cholesky with a relative pivot floor, quadratic forms and log-determinants
through the factor, and the 2-norm condition number from a cyclic Jacobi
eigen-solve.
"""
from dataclasses import dataclass

import numpy as np

from . import _backend

PIVOT_REL_FLOOR = 1e-14
#: Condition numbers above this are reported but flagged as untrustworthy.
BEYOND_DOUBLE = 1e12


class NotPositiveDefinite(np.linalg.LinAlgError):
    """Raised when a Cholesky pivot falls at or below the pivot floor."""

    def __init__(self, pivot_index):
        self.pivot_index = pivot_index
        super().__init__(f"matrix is not positive definite (pivot {pivot_index})")


@dataclass(frozen=True)
class CholFactor:
    lower: np.ndarray
    pivot_floor: float

    @property
    def n(self):
        return self.lower.shape[0]


@dataclass(frozen=True)
class ConditionNumber:
    value: float
    beyond_double_precision: bool

    def __float__(self):
        return float(self.value)


def _as_symmetric(m):
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {m.shape}")
    if not np.array_equal(m, m.T):
        raise ValueError("matrix is not symmetric")
    return m


def cholesky(m, rel_floor=PIVOT_REL_FLOOR):
    """Lower Cholesky factor of a symmetric matrix.

    A pivot ``<= rel_floor * max(diag(m))`` raises :class:`NotPositiveDefinite`.
    """
    m = _as_symmetric(m)
    lower, info = _backend.kernels().cholesky(m, rel_floor)
    if info >= 0:
        raise NotPositiveDefinite(info)
    return CholFactor(lower, rel_floor * float(np.max(np.diagonal(m))))


def solve_lower(f, v):
    """Solve ``L z = v`` by forward substitution."""
    lower = f.lower
    z = np.empty_like(v, dtype=float)
    for i in range(f.n):
        z[i] = (v[i] - lower[i, :i] @ z[:i]) / lower[i, i]
    return z


def solve(f, v):
    """Solve ``M z = v`` with ``M = L L^T``."""
    v = _check_vector(f, v)
    z = solve_lower(f, v)
    lower = f.lower
    out = np.empty_like(z)
    for i in range(f.n - 1, -1, -1):
        out[i] = (z[i] - lower[i + 1:, i] @ out[i + 1:]) / lower[i, i]
    return out


def quad_form(f, v):
    """Return ``v^T M^{-1} v`` for the factored matrix ``M``."""
    z = solve_lower(f, _check_vector(f, v))
    return float(z @ z)


def log_det(f):
    return float(2.0 * np.sum(np.log(np.diagonal(f.lower))))


def _check_vector(f, v):
    v = np.asarray(v, dtype=float)
    if v.shape != (f.n,):
        raise ValueError(f"vector of shape {v.shape} does not match factor of size {f.n}")
    return v


def eigenvalues(m):
    """Ascending eigenvalues by cyclic Jacobi rotations."""
    return _backend.kernels().jacobi_eigenvalues(_as_symmetric(m))


def condition_number(m):
    """2-norm condition number ``max|lambda| / min|lambda|``.

    Returns ``inf`` when the smallest eigenvalue magnitude underflows; values
    above ``BEYOND_DOUBLE`` are flagged since double precision cannot resolve
    them.
    """
    lam = np.abs(eigenvalues(m))
    lo, hi = float(lam.min()), float(lam.max())
    if lo < np.finfo(float).tiny:
        return ConditionNumber(float("inf"), True)
    value = hi / lo
    return ConditionNumber(value, value > BEYOND_DOUBLE)
