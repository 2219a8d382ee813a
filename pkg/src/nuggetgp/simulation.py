"""Monte-Carlo study of ML estimators on a noisy stationary process.

Each replicate observes ``y = beta + A(sigma) * e1 + A(tau) * e2`` at
``n`` equidistant points, where ``e1`` is a unit-variance gaussian-kernel
process and ``e2`` white noise, and is fitted once per nugget value.
``A(s)`` is ``s`` (std_dev convention) or ``s**2`` (variance convention).

Random streams are derived from ``(seed, replicate, role)`` so that a
replicate's draws never depend on execution order.
"""
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .kernels import Family, KernelSpec, corr_matrix
from .likelihood import Dataset, DegenerateData, FitOptions, Status, fit_mle
from .linalg import NotPositiveDefinite, cholesky

STREAM_SIGNAL = 0
STREAM_NOISE = 1
SIM_JITTER = 1e-10


class SamplingError(RuntimeError):
    pass


@dataclass(frozen=True)
class SimConfig:
    n: int = 8
    beta: float = 2.0
    psi: float = 1.5
    sigma: float = 1.0
    tau_values: tuple = (0.0, 0.01)
    amplitude_convention: str = "std_dev"
    nu_values: tuple = (0.0, 0.01, 0.02)
    replicates: int = 1000
    seed: int = 2010
    psi_min: float = 1e-3
    psi_max: float = 1e3
    grid_size: int = 400

    def __post_init__(self):
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if self.n < 2:
            raise ValueError("n must be >= 2")
        if self.sigma < 0 or any(t < 0 for t in self.tau_values):
            raise ValueError("sigma and tau must be non-negative")
        if any(not 0 <= nu < 1 for nu in self.nu_values):
            raise ValueError("nugget values must lie in [0, 1)")
        if self.amplitude_convention not in ("std_dev", "variance"):
            raise ValueError(f"unknown amplitude convention {self.amplitude_convention!r}")
        object.__setattr__(self, "tau_values", tuple(float(t) for t in self.tau_values))
        object.__setattr__(self, "nu_values", tuple(float(v) for v in self.nu_values))

    @property
    def points(self):
        return np.arange(self.n) / (self.n - 1)

    def amplitude(self, s):
        return s if self.amplitude_convention == "std_dev" else s * s


@dataclass
class Estimate:
    mean: float
    sd: float


@dataclass
class CellSummary:
    tau: float
    nu: float
    beta: Estimate
    sigma: Estimate
    psi: Estimate
    included: int
    excluded: dict = field(default_factory=dict)

    @property
    def excluded_count(self):
        return sum(self.excluded.values())


@dataclass
class StudySummary:
    config: SimConfig
    cells: list

    def cell(self, tau, nu):
        for c in self.cells:
            if c.tau == tau and c.nu == nu:
                return c
        raise KeyError((tau, nu))

    def to_dict(self):
        return {"config": asdict(self.config), "cells": [asdict(c) for c in self.cells]}


def replicate_rng(seed, replicate, role):
    """Generator for one ``(replicate, role)`` stream of a study."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(replicate, role)))


def sample_gp_path(points, k, rng):
    """Zero-mean unit-variance gaussian vector with the kernel's correlation."""
    r = corr_matrix(k, points)
    try:
        f = cholesky(r)
    except NotPositiveDefinite as exc:
        raise SamplingError(
            f"correlation matrix does not factorize ({exc}); add a simulation-only "
            f"jitter of {SIM_JITTER:g} to the diagonal and record it"
        ) from exc
    return f.lower @ rng.standard_normal(len(points))


def _replicate(cfg, i, signal_factor):
    z1 = replicate_rng(cfg.seed, i, STREAM_SIGNAL).standard_normal(cfg.n)
    z2 = replicate_rng(cfg.seed, i, STREAM_NOISE).standard_normal(cfg.n)
    e1 = signal_factor @ z1
    options = FitOptions(cfg.psi_min, cfg.psi_max, cfg.grid_size)
    out = []
    for tau in cfg.tau_values:
        y = cfg.beta + cfg.amplitude(cfg.sigma) * e1 + cfg.amplitude(tau) * z2
        d = Dataset(cfg.points, y)
        for nu in cfg.nu_values:
            try:
                fit = fit_mle(d, Family.GAUSSIAN, nu, options)
            except DegenerateData:
                out.append((tau, nu, "degenerate", None))
                continue
            if fit.status in (Status.UNBOUNDED_UPPER, Status.DEGENERATE_RESIDUAL):
                out.append((tau, nu, fit.status.value, None))
            else:
                out.append((tau, nu, None, (fit.beta_hat, fit.sigma_hat, fit.psi_hat)))
    return out


def _signal_factor(cfg):
    try:
        return cholesky(corr_matrix(KernelSpec(Family.GAUSSIAN, cfg.psi), cfg.points)).lower
    except NotPositiveDefinite as exc:
        raise SamplingError(f"signal covariance does not factorize: {exc}") from exc


def _chunk(args):
    cfg, start, stop = args
    factor = _signal_factor(cfg)
    return [_replicate(cfg, i, factor) for i in range(start, stop)]


def _estimate(values):
    if not values:
        return Estimate(math.nan, math.nan)
    mean = math.fsum(values) / len(values)
    if len(values) < 2:
        return Estimate(mean, 0.0)
    var = math.fsum((v - mean) ** 2 for v in values) / (len(values) - 1)
    return Estimate(mean, math.sqrt(var))


def run_study(cfg, workers=1):
    """Fit every replicate at every ``(tau, nu)`` and summarize the estimators.

    Replicates with an unbounded or degenerate fit are excluded and counted by
    reason. Standard deviations use the ``n - 1`` denominator.
    """
    if workers > 1:
        bounds = np.linspace(0, cfg.replicates, workers + 1).astype(int)
        jobs = [(cfg, a, b) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
        with ProcessPoolExecutor(workers) as pool:
            results = [r for chunk in pool.map(_chunk, jobs) for r in chunk]
    else:
        results = _chunk((cfg, 0, cfg.replicates))

    cells = []
    for tau in cfg.tau_values:
        for nu in cfg.nu_values:
            est, excluded = [], {}
            for rep in results:
                for t, v, reason, values in rep:
                    if t == tau and v == nu:
                        if reason is None:
                            est.append(values)
                        else:
                            excluded[reason] = excluded.get(reason, 0) + 1
            cols = list(zip(*est)) if est else [(), (), ()]
            cells.append(CellSummary(
                tau=tau,
                nu=nu,
                beta=_estimate(list(cols[0])),
                sigma=_estimate(list(cols[1])),
                psi=_estimate(list(cols[2])),
                included=len(est),
                excluded=excluded,
            ))
    return StudySummary(cfg, cells)
