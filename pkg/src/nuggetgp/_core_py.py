"""Numpy implementation of the compiled kernels in ``_core.pyx``.

Used when the extension is not built. The profile kernel is vectorized over
the psi grid (a batched column Cholesky), so it stays usable for full scans.
"""
import numpy as np

FLAG_OK = 0
FLAG_NOT_PD = 1
FLAG_DEGENERATE = 2
FLAG_ILL = 3

PIVOT_REL_FLOOR = 1e-14
KAPPA_CEILING = 1e15
DEGENERATE_QUAD = 1e-300


def _corr_batch(x, family, nu, psis):
    d = x[:, None] - x[None, :]
    psis = np.asarray(psis, dtype=float)[:, None, None]
    if family == 0:
        r = np.exp(-np.abs(d)[None] / psis)
    else:
        r = np.exp(-(d * d)[None] / psis)
    r = (1.0 - nu) * r
    idx = np.arange(len(x))
    r[:, idx, idx] = 1.0
    return r


def corr_matrix(x, family, nu, psi):
    x = np.ascontiguousarray(x, dtype=float)
    return _corr_batch(x, family, nu, [psi])[0]


def _chol_batch(a, rel_floor):
    """Batched lower Cholesky; failed matrices get info >= 0 and junk factors."""
    g, n, _ = a.shape
    low = np.zeros_like(a)
    info = np.full(g, -1, dtype=np.int64)
    floor = rel_floor * np.max(np.diagonal(a, axis1=1, axis2=2), axis=1)
    for j in range(n):
        row = low[:, j, :j]
        s = a[:, j, j] - np.einsum("gk,gk->g", row, row)
        bad = ~(s > floor) & (info < 0)
        info[bad] = j
        s = np.where(info >= 0, 1.0, s)
        low[:, j, j] = np.sqrt(s)
        if j + 1 < n:
            col = a[:, j + 1:, j] - np.einsum("gik,gk->gi", low[:, j + 1:, :j], row)
            low[:, j + 1:, j] = col / low[:, j, j][:, None]
    return low, info


def cholesky(a, rel_floor=PIVOT_REL_FLOOR):
    a = np.ascontiguousarray(a, dtype=float)
    low, info = _chol_batch(a[None], rel_floor)
    if info[0] >= 0:
        low[0, info[0]:, :] = 0.0
    return low[0], int(info[0])


def _forward_batch(low, b):
    g, n, _ = low.shape
    out = np.empty((g, n))
    for i in range(n):
        out[:, i] = (b[:, i] - np.einsum("gk,gk->g", low[:, i, :i], out[:, :i])) / low[:, i, i]
    return out


def profile_grid(x, y, family, nu, psis):
    x = np.ascontiguousarray(x, dtype=float)
    y = np.ascontiguousarray(y, dtype=float)
    psis = np.ascontiguousarray(psis, dtype=float)
    g, n = len(psis), len(x)
    r = _corr_batch(x, family, nu, psis)
    low, info = _chol_batch(r, PIVOT_REL_FLOOR)
    a = _forward_batch(low, np.ones((g, n)))
    b = _forward_batch(low, np.broadcast_to(y, (g, n)))
    beta = np.einsum("gi,gi->g", a, b) / np.einsum("gi,gi->g", a, a)
    res = b - beta[:, None] * a
    quad = np.einsum("gi,gi->g", res, res)
    logdet = np.sum(np.log(np.diagonal(low, axis1=1, axis2=2)), axis=1)
    inv = np.linalg.inv(low)
    kappa = np.sqrt(np.einsum("gij,gij->g", r, r)) * np.einsum("gij,gij->g", inv, inv)

    flags = np.full(g, FLAG_OK, dtype=np.int8)
    with np.errstate(divide="ignore", invalid="ignore"):
        loglik = -logdet - 0.5 * n * np.log(quad)
    flags[~(kappa <= KAPPA_CEILING)] = FLAG_ILL
    degenerate = ~(quad > DEGENERATE_QUAD)
    flags[degenerate] = FLAG_DEGENERATE
    loglik[degenerate] = np.nan
    failed = info >= 0
    flags[failed] = FLAG_NOT_PD
    for arr in (loglik, beta, quad, kappa):
        arr[failed] = np.nan
    return flags, loglik, beta, quad, kappa


def profile_dlogpsi(x, y, family, nu, psi):
    """Derivative of the profile log-likelihood with respect to log(psi)."""
    x = np.ascontiguousarray(x, dtype=float)
    y = np.ascontiguousarray(y, dtype=float)
    n = len(x)
    r = corr_matrix(x, family, nu, psi)
    low, info = cholesky(r)
    if info >= 0:
        return float("nan")
    a = np.linalg.solve(low, np.ones(n))
    b = np.linalg.solve(low, y)
    beta = (a @ b) / (a @ a)
    res = b - beta * a
    quad = res @ res
    w = np.linalg.solve(low.T, res)
    d = x[:, None] - x[None, :]
    dist = np.abs(d) if family == 0 else d * d
    dr = r * dist / psi
    np.fill_diagonal(dr, 0.0)
    inv = np.linalg.inv(low)
    rinv = inv.T @ inv
    return float(-0.5 * np.sum(rinv * dr) + 0.5 * n * (w @ dr @ w) / quad)


def jacobi_eigenvalues(a, tol=1e-15, max_sweeps=100):
    """Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending."""
    m = np.array(a, dtype=float, copy=True)
    n = m.shape[0]
    with np.errstate(over="ignore"):
        _jacobi_sweeps(m, n, tol, max_sweeps)
    return np.sort(np.diagonal(m).copy())


def _jacobi_sweeps(m, n, tol, max_sweeps):
    for _ in range(max_sweeps):
        total = np.sum(m * m)
        off = 2.0 * np.sum(np.triu(m, 1) ** 2)
        if off <= tol * tol * total:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = m[p, q]
                if apq == 0.0:
                    continue
                theta = (m[q, q] - m[p, p]) / (2.0 * apq)
                t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                cp = m[:, p].copy()
                cq = m[:, q].copy()
                m[:, p] = c * cp - s * cq
                m[:, q] = s * cp + c * cq
                rp = m[p, :].copy()
                rq = m[q, :].copy()
                m[p, :] = c * rp - s * rq
                m[q, :] = s * rp + c * rq
                m[p, q] = 0.0
                m[q, p] = 0.0
