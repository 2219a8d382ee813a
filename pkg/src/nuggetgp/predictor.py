"""Kriging meta-model under a nugget, and its inverse-distance-weighted fix.

With ``nu > 0`` the kriging mean ``m_nu`` no longer passes through the data.
``predict_interpolating`` adds an inverse-squared-distance weighted average of
the deviations ``eps_i = y_i - m_nu(x_i)``, which restores interpolation.
"""
from dataclasses import dataclass

import numpy as np

from .kernels import KernelSpec, corr_matrix, corr_vector
from .linalg import cholesky, solve

NODE_RTOL = 1e-12


@dataclass(frozen=True)
class Emulator:
    dataset: object
    kernel: KernelSpec
    beta: float
    solved_residual: np.ndarray
    deviations: np.ndarray


def build_emulator(d, k, beta):
    f = cholesky(corr_matrix(k, d.points))
    w = solve(f, d.y - beta)
    # t(x_i) uses the plain correlation, so m_nu(x_i) != y_i once nu > 0
    t = np.exp(-_scaled_distance(k, d.points[:, None] - d.points[None, :]))
    fitted = beta + t @ w
    return Emulator(d, k, float(beta), w, d.y - fitted)


def _scaled_distance(k, diff):
    if k.family.code == 0:
        return np.abs(diff) / k.psi
    return diff * diff / k.psi


def predict_metamodel(e, x):
    return float(e.beta + corr_vector(e.kernel, x, e.dataset.points) @ e.solved_residual)


def idw_correction(e, x):
    """Inverse-squared-distance average of the deviations at ``x``."""
    points = e.dataset.points
    dist = np.abs(x - points)
    hit = dist <= NODE_RTOL * np.maximum(np.abs(points), 1.0)
    if np.any(hit):
        return float(e.deviations[np.argmax(hit)])
    w = 1.0 / (dist * dist)
    return float(w @ e.deviations / np.sum(w))


def predict_interpolating(e, x):
    return predict_metamodel(e, x) + idw_correction(e, x)
