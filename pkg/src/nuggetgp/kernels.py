"""Correlation functions and nugget-augmented correlation matrices."""
import enum
import math
from dataclasses import dataclass

import numpy as np

from . import _backend


class Family(str, enum.Enum):
    EXPONENTIAL = "exponential"
    GAUSSIAN = "gaussian"

    @property
    def code(self):
        return 0 if self is Family.EXPONENTIAL else 1


class DuplicatePoints(ValueError):
    pass


@dataclass(frozen=True)
class KernelSpec:
    """Correlation family, correlation length ``psi`` and nugget ``nu``.

    The gaussian family is ``exp(-(x - x')**2 / psi)``: psi divides the
    squared distance, it is not a squared length scale.
    """

    family: Family
    psi: float
    nu: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if not self.psi > 0:
            raise ValueError(f"psi must be positive, got {self.psi}")
        if not 0 <= self.nu < 1:
            raise ValueError(f"nu must lie in [0, 1), got {self.nu}")


def corr(k, x, x2):
    """Plain correlation ``r(x, x2)``; the nugget is matrix-level only."""
    d = x - x2
    if k.family is Family.EXPONENTIAL:
        return math.exp(-abs(d) / k.psi)
    return math.exp(-d * d / k.psi)


def corr_vector(k, x, points):
    """``t(x) = (r(x, x_1), ..., r(x, x_n))`` without nugget."""
    d = x - np.asarray(points, dtype=float)
    if k.family is Family.EXPONENTIAL:
        return np.exp(-np.abs(d) / k.psi)
    return np.exp(-d * d / k.psi)


def check_points(points):
    """Validate strictly increasing inputs; return them as a float array."""
    points = np.asarray(points, dtype=float)
    if points.ndim != 1:
        raise ValueError("points must be one-dimensional")
    if not np.all(np.isfinite(points)):
        raise ValueError("points must be finite")
    gaps = np.diff(points)
    scale = np.maximum(np.abs(points[1:]), np.abs(points[:-1]))
    dup = np.abs(gaps) <= 1e-15 * scale
    if np.any(dup):
        i = int(np.argmax(dup))
        raise DuplicatePoints(f"points {i} and {i + 1} coincide ({points[i]!r})")
    if np.any(gaps <= 0):
        i = int(np.argmax(gaps <= 0))
        raise ValueError(f"points must be strictly increasing (index {i + 1})")
    return points


def corr_matrix(k, points):
    """``(1 - nu) * r(x_i - x_j) + nu * delta_ij`` with exact unit diagonal."""
    points = check_points(points)
    return _backend.kernels().corr_matrix(points, k.family.code, k.nu, k.psi)


def nugget_to_jitter(nu):
    """Additive jitter ``j`` with ``R + j I`` proportional to the nugget matrix.

    ``(1 - nu) R + nu I = (1 - nu) (R + j I)`` with ``j = nu / (1 - nu)``.
    """
    return nu / (1.0 - nu)


def jitter_to_nugget(jitter):
    return jitter / (1.0 + jitter)
