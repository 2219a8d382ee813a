"""Closed forms for the exponential kernel without nugget.

On the equidistant grid ``x_i = (i - 1) / (n - 1)`` the inverse correlation
matrix is tridiagonal and everything the likelihood needs has a closed form in
``lam = exp(-1 / ((n - 1) psi))``. These routines double as an oracle for the
dense path in :mod:`nuggetgp.likelihood`.
"""
import math
from dataclasses import dataclass

import numpy as np

from .kernels import check_points


@dataclass(frozen=True)
class EquidistantSpec:
    """``n`` equidistant points on [0, 1] and ``lam = exp(-1 / ((n - 1) psi))``."""

    n: int
    lam: float
    #: ``1 - lam**2``; exact to rounding when built from psi, where lam ~ 1
    one_minus_lam2: float = None

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"need at least 2 points, got n={self.n}")
        if not 0 <= self.lam < 1:
            raise ValueError(f"lambda must lie in [0, 1), got {self.lam}")
        if self.one_minus_lam2 is None:
            object.__setattr__(self, "one_minus_lam2", (1.0 - self.lam) * (1.0 + self.lam))

    @classmethod
    def from_psi(cls, n, psi):
        if not psi > 0:
            raise ValueError(f"psi must be positive, got {psi}")
        rate = 1.0 / ((n - 1) * psi)
        return cls(n, math.exp(-rate), -math.expm1(-2.0 * rate))

    @property
    def psi(self):
        return -1.0 / ((self.n - 1) * math.log(self.lam)) if self.lam > 0 else 0.0

    @property
    def points(self):
        return np.arange(self.n) / (self.n - 1)


@dataclass(frozen=True)
class BidiagFactor:
    """``V`` with ``R^{-1} = V^T V`` for the exponential kernel.

    Row 0 is the unit row; row i has ``-mu_i / s_i`` at column i-1 and
    ``1 / s_i`` at column i, where ``s_i = sqrt(1 - mu_i**2)``.
    """

    mu: np.ndarray  # mu_2 .. mu_n, length n - 1

    @property
    def n(self):
        return len(self.mu) + 1

    def dense(self):
        n = self.n
        v = np.zeros((n, n))
        v[0, 0] = 1.0
        s = np.sqrt((1.0 - self.mu) * (1.0 + self.mu))
        rows = np.arange(1, n)
        v[rows, rows - 1] = -self.mu / s
        v[rows, rows] = 1.0 / s
        return v

    def inverse_matrix(self):
        v = self.dense()
        return v.T @ v


def v_factor(psi, points):
    if not psi > 0:
        raise ValueError(f"psi must be positive, got {psi}")
    points = check_points(points)
    mu = np.exp(-np.diff(points) / psi)
    if np.any(mu >= 1.0):
        raise ValueError("correlation between neighbours rounds to 1; psi too large for these points")
    return BidiagFactor(mu)


def _check_y(y, spec):
    y = np.asarray(y, dtype=float)
    if y.shape != (spec.n,):
        raise ValueError(f"y has shape {y.shape}, expected ({spec.n},)")
    return y


def quad_form_equidistant(y, spec):
    """``y^T R^{-1} y`` on the equidistant grid."""
    y = _check_y(y, spec)
    lam = spec.lam
    one_m = spec.one_minus_lam2
    ends = y[0] ** 2 + y[-1] ** 2
    inner = float(np.sum(y[1:-1] ** 2))
    cross = float(np.sum(y[:-1] * y[1:]))
    return (ends + inner * (1.0 + lam * lam) - 2.0 * cross * lam) / one_m


def log_det_inv_sqrt_equidistant(spec):
    """``log |R|^{-1/2} = -(n - 1)/2 * log(1 - lam**2)``."""
    return -0.5 * (spec.n - 1) * math.log(spec.one_minus_lam2)


def det_inv_sqrt_equidistant(spec):
    return math.exp(log_det_inv_sqrt_equidistant(spec))


def quad_form_linear_model(spec):
    """``y^T R^{-1} y`` for ``y_i = x_i - 1/2`` on the equidistant grid."""
    n, lam = spec.n, spec.lam
    one_m = spec.one_minus_lam2
    a = (n * n - 5 * n + 6) / (12.0 * (n - 1))
    b = (n * n - 2 * n - 3) / (6.0 * (n - 1))
    return (0.5 + a * (1.0 + lam * lam) - b * lam) / one_m


def loglik_linear_model(spec):
    """Profile log-likelihood of the linear model from the closed forms.

    The GLS mean of ``x - 1/2`` is zero on the symmetric grid, so the
    residual quadratic form is the closed form itself.
    """
    return log_det_inv_sqrt_equidistant(spec) - 0.5 * spec.n * math.log(quad_form_linear_model(spec))


def psi_hat_expansion(n):
    """Large-n expansion of the ML correlation length for the linear model."""
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    return n / 2.0 - 7.0 / 6.0 - 7.0 / (18.0 * n) - 17.0 / (54.0 * n * n)
