"""Profile likelihood of a constant-mean Gaussian process and its maximization.

With ``beta`` and ``sigma**2`` replaced by their closed-form ML estimates the
log-likelihood becomes a function of the correlation length alone::

    L(psi) = -1/2 log|R| - n/2 log((y - beta_hat)^T R^{-1} (y - beta_hat))

Additive constants are dropped. ``fit_mle`` maximizes ``L`` in two stages: a
log-spaced grid scan that also detects boundary maxima and secondary modes,
then golden-section refinement of the best bracket. The refined point is
polished by a root search on the analytic derivative, because ``L`` itself is
too flat near its maximum to resolve psi beyond ~1e-5 in double precision.
"""
import enum
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq

from . import _backend
from .kernels import Family, KernelSpec, check_points, corr_matrix
from .linalg import cholesky, condition_number, quad_form, solve_lower

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class Flag(str, enum.Enum):
    OK = "ok"
    NOT_PD = "not_pd"
    DEGENERATE = "degenerate"
    #: factorizable, but the condition estimate exceeds the kernel ceiling (1e15)
    ILL_CONDITIONED = "ill_conditioned"


_FLAG_CODES = {0: Flag.OK, 1: Flag.NOT_PD, 2: Flag.DEGENERATE, 3: Flag.ILL_CONDITIONED}


class Status(str, enum.Enum):
    INTERIOR = "interior"
    UNBOUNDED_UPPER = "unbounded_upper"
    BOUNDARY_LOWER = "boundary_lower"
    DEGENERATE_RESIDUAL = "degenerate_residual"


class DegenerateData(ValueError):
    """Constant outputs: the residual quadratic form vanishes for every psi."""


class AllInfeasible(RuntimeError):
    """No grid point of the scan gave a usable likelihood value."""


@dataclass(frozen=True)
class Dataset:
    points: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        points = check_points(self.points)
        y = np.asarray(self.y, dtype=float)
        if y.shape != points.shape:
            raise ValueError(f"{len(points)} points but {y.size} outputs")
        if not np.all(np.isfinite(y)):
            raise ValueError("outputs must be finite")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "y", y)

    @property
    def n(self):
        return len(self.points)


@dataclass(frozen=True)
class FitOptions:
    psi_min: float = 1e-3
    psi_max: float = 1e4
    grid_size: int = 400
    xtol: float = 1e-6  # golden-section tolerance in log(psi)
    polish: bool = True


class Mode(NamedTuple):
    psi: float
    loglik: float


@dataclass(frozen=True)
class LikelihoodProfile:
    dataset: Dataset
    family: Family
    nu: float
    grid: np.ndarray
    values: np.ndarray
    flags: list
    beta: np.ndarray = field(repr=False)
    quad: np.ndarray = field(repr=False)
    kappa: np.ndarray = field(repr=False)

    @property
    def ok(self):
        return np.array([f is Flag.OK for f in self.flags], dtype=bool)


@dataclass(frozen=True)
class FitResult:
    beta_hat: float
    sigma2_hat: float
    psi_hat: float
    status: Status
    modes: list
    cond_at_psi_hat: float
    cond_beyond_double_precision: bool
    nugget: float
    family: Family
    loglik: float

    @property
    def sigma_hat(self):
        return math.sqrt(self.sigma2_hat)

    def to_dict(self):
        def num(v):
            return None if v is None or not math.isfinite(v) else float(v)

        return {
            "beta_hat": num(self.beta_hat),
            "sigma2_hat": num(self.sigma2_hat),
            "sigma_hat": num(self.sigma_hat) if math.isfinite(self.sigma2_hat) else None,
            "psi_hat": num(self.psi_hat),
            "status": self.status.value,
            "modes": [{"psi": num(m.psi), "loglik": num(m.loglik)} for m in self.modes],
            "cond_at_psi_hat": num(self.cond_at_psi_hat),
            "cond_beyond_double_precision": bool(self.cond_beyond_double_precision),
            "nugget": float(self.nugget),
            "family": self.family.value,
            "loglik": num(self.loglik),
        }


def _factor(d, k):
    return cholesky(corr_matrix(k, d.points))


def beta_hat(d, k):
    """Generalized least-squares mean under the kernel's correlation."""
    f = _factor(d, k)
    a = solve_lower(f, np.ones(d.n))
    b = solve_lower(f, d.y)
    return float(a @ b / (a @ a))


def sigma2_hat(d, k, beta):
    f = _factor(d, k)
    return quad_form(f, d.y - beta) / d.n


def _evaluate(d, family, nu, psis):
    family = Family(family)
    return _backend.kernels().profile_grid(d.points, d.y, family.code, float(nu), np.asarray(psis, dtype=float))


def profile_loglik(d, family, nu, psi):
    """``(L(psi), Flag)``; the value is nan unless the flag is OK or ILL_CONDITIONED."""
    if not psi > 0:
        raise ValueError(f"psi must be positive, got {psi}")
    flags, values, *_ = _evaluate(d, family, nu, [psi])
    return float(values[0]), _FLAG_CODES[int(flags[0])]


def profile_dlogpsi(d, family, nu, psi):
    """Analytic ``dL / dlog(psi)``; nan when the matrix does not factorize."""
    return _backend.kernels().profile_dlogpsi(d.points, d.y, Family(family).code, float(nu), float(psi))


def scan_profile(d, family, nu, psi_min=1e-3, psi_max=1e4, grid_size=400):
    """Evaluate ``L`` on a log-spaced grid, flagging infeasible points."""
    if not 0 < psi_min < psi_max:
        raise ValueError(f"need 0 < psi_min < psi_max, got {psi_min}, {psi_max}")
    if grid_size < 16:
        raise ValueError(f"grid_size must be at least 16, got {grid_size}")
    family = Family(family)
    grid = np.logspace(math.log10(psi_min), math.log10(psi_max), grid_size)
    flags, values, beta, quad, kappa = _evaluate(d, family, nu, grid)
    return LikelihoodProfile(
        dataset=d,
        family=family,
        nu=float(nu),
        grid=grid,
        values=values,
        flags=[_FLAG_CODES[int(c)] for c in flags],
        beta=beta,
        quad=quad,
        kappa=kappa,
    )


def golden_section_max(f, lo, hi, xtol):
    """Maximize a unimodal ``f`` on ``[lo, hi]``; returns ``(x, f(x), (a, b))``."""
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    e = a + GOLDEN * (b - a)
    fc, fe = f(c), f(e)
    while b - a > xtol:
        if fc >= fe:
            b, e, fe = e, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, e, fe
            e = a + GOLDEN * (b - a)
            fe = f(e)
    x = 0.5 * (a + b)
    return x, f(x), (a, b)


def _refine(d, family, nu, lo_psi, hi_psi, xtol, polish):
    """Locate the maximum of ``L`` between two grid points; returns a Mode."""

    def f(t):
        flags, values, *_ = _evaluate(d, family, nu, [math.exp(t)])
        return float(values[0]) if flags[0] == 0 else -math.inf

    lo, hi = math.log(lo_psi), math.log(hi_psi)
    t, ft, _ = golden_section_max(f, lo, hi, xtol)
    if polish:
        t, ft = _polish(d, family, nu, t, ft, lo, hi, f)
    return Mode(math.exp(t), ft)


def _polish(d, family, nu, t, ft, lo, hi, f):
    def g(s):
        return profile_dlogpsi(d, family, nu, math.exp(s))

    for delta in (1e-4, 1e-2, None):
        a, b = (lo, hi) if delta is None else (max(lo, t - delta), min(hi, t + delta))
        ga, gb = g(a), g(b)
        if ga > 0 > gb:
            root = brentq(g, a, b, xtol=1e-14, rtol=4 * np.finfo(float).eps)
            froot = f(root)
            # the derivative root must not be worse than the golden point
            if froot >= ft - 1e-9 * max(1.0, abs(ft)):
                return root, froot
            break
    return t, ft


def find_modes(p, xtol=1e-6, polish=True):
    """Interior local maxima of a scanned profile, refined and sorted by psi.

    A grid point qualifies when it and both neighbours are OK and its value
    is strictly greater than both neighbours.
    """
    ok = p.ok
    modes = []
    v = p.values
    for i in range(1, len(p.grid) - 1):
        if ok[i - 1] and ok[i] and ok[i + 1] and v[i] > v[i - 1] and v[i] > v[i + 1]:
            modes.append(_refine(p.dataset, p.family, p.nu, p.grid[i - 1], p.grid[i + 1], xtol, polish))
    return sorted(modes)


def _is_constant(y):
    return np.ptp(y) <= 1e-14 * max(np.max(np.abs(y)), np.finfo(float).tiny)


def fit_mle(d, family, nu=0.0, options=None):
    """Maximum-likelihood ``(beta, sigma**2, psi)`` for fixed nugget ``nu``."""
    options = options or FitOptions()
    family = Family(family)
    if d.n < 2:
        raise ValueError("need at least 2 observations to fit")
    if _is_constant(d.y):
        raise DegenerateData("outputs are constant; the profile likelihood is undefined")

    p = scan_profile(d, family, nu, options.psi_min, options.psi_max, options.grid_size)
    ok_idx = np.flatnonzero(p.ok)
    if ok_idx.size == 0:
        if any(f is Flag.DEGENERATE for f in p.flags):
            return FitResult(math.nan, 0.0, math.nan, Status.DEGENERATE_RESIDUAL, [], math.nan,
                             False, float(nu), family, math.nan)
        raise AllInfeasible(f"no psi in [{options.psi_min}, {options.psi_max}] gave a usable likelihood")

    modes = find_modes(p, options.xtol, options.polish)
    # argmax returns the first maximum, i.e. ties go to the smaller psi
    best = int(ok_idx[np.argmax(p.values[ok_idx])])

    status = Status.INTERIOR
    if best == ok_idx[-1]:
        tail = ok_idx[p.grid[ok_idx] >= p.grid[best] / 10.0]
        if np.all(np.diff(p.values[tail]) >= 0) or not modes:
            status = Status.UNBOUNDED_UPPER
    elif best == ok_idx[0]:
        status = Status.BOUNDARY_LOWER

    if status is Status.INTERIOR:
        if best == ok_idx[-1]:
            # non-monotone tail: fall back to the best interior mode
            psi_hat, loglik = max(modes, key=lambda m: m.loglik)
        else:
            pos = int(np.searchsorted(ok_idx, best))
            lo, hi = p.grid[ok_idx[pos - 1]], p.grid[ok_idx[pos + 1]]
            psi_hat, loglik = _refine(d, family, nu, lo, hi, options.xtol, options.polish)
    else:
        psi_hat, loglik = float(p.grid[best]), float(p.values[best])

    flags, values, beta, quad, _ = _evaluate(d, family, nu, [psi_hat])
    if flags[0] not in (0, 3):  # refinement stepped off the feasible set
        psi_hat, loglik = float(p.grid[best]), float(p.values[best])
        beta, quad = p.beta[best:best + 1], p.quad[best:best + 1]
    cond = condition_number(corr_matrix(KernelSpec(family, psi_hat, nu), d.points))
    return FitResult(
        beta_hat=float(beta[0]),
        sigma2_hat=float(quad[0]) / d.n,
        psi_hat=float(psi_hat),
        status=status,
        modes=modes,
        cond_at_psi_hat=cond.value,
        cond_beyond_double_precision=cond.beyond_double_precision,
        nugget=float(nu),
        family=family,
        loglik=float(loglik),
    )
