# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: correlation matrices, Cholesky, profile likelihood, Jacobi.

Mirrors ``nuggetgp._core_py`` function for function. Codes:

* family: 0 exponential, 1 gaussian
* flag: 0 ok, 1 not_pd, 2 degenerate, 3 ill_conditioned
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, fabs, log, sqrt, NAN

cnp.import_array()

cdef enum:
    FLAG_OK = 0
    FLAG_NOT_PD = 1
    FLAG_DEGENERATE = 2
    FLAG_ILL = 3

PIVOT_REL_FLOOR = 1e-14
KAPPA_CEILING = 1e15
DEGENERATE_QUAD = 1e-300

cdef double _PIVOT_REL_FLOOR = 1e-14
cdef double _KAPPA_CEILING = 1e15
cdef double _DEGENERATE_QUAD = 1e-300


cdef inline double _corr(int family, double d, double psi) noexcept nogil:
    if family == 0:
        return exp(-fabs(d) / psi)
    return exp(-d * d / psi)


cdef void _fill_corr(const double[::1] x, int family, double nu, double psi,
                     double[:, ::1] r) noexcept nogil:
    cdef Py_ssize_t n = x.shape[0], i, j
    cdef double v
    for i in range(n):
        r[i, i] = 1.0
        for j in range(i):
            v = (1.0 - nu) * _corr(family, x[i] - x[j], psi)
            r[i, j] = v
            r[j, i] = v


cdef Py_ssize_t _chol(const double[:, ::1] a, double[:, ::1] low,
                      double rel_floor) noexcept nogil:
    """Lower Cholesky factor in ``low``; returns -1 or the failing pivot."""
    cdef Py_ssize_t n = a.shape[0], i, j, k
    cdef double s, dmax = 0.0, floor
    for i in range(n):
        if a[i, i] > dmax:
            dmax = a[i, i]
    floor = rel_floor * dmax
    for j in range(n):
        s = a[j, j]
        for k in range(j):
            s -= low[j, k] * low[j, k]
        if not (s > floor):
            return j
        low[j, j] = sqrt(s)
        for i in range(j + 1, n):
            s = a[i, j]
            for k in range(j):
                s -= low[i, k] * low[j, k]
            low[i, j] = s / low[j, j]
        for i in range(j):
            low[i, j] = 0.0
    return -1


cdef void _forward(const double[:, ::1] low, const double[::1] b,
                   double[::1] out) noexcept nogil:
    cdef Py_ssize_t n = low.shape[0], i, k
    cdef double s
    for i in range(n):
        s = b[i]
        for k in range(i):
            s -= low[i, k] * out[k]
        out[i] = s / low[i, i]


cdef double _inv_frob2(const double[:, ::1] low, double[:, ::1] inv) noexcept nogil:
    """Squared Frobenius norm of the inverse of a lower-triangular factor."""
    cdef Py_ssize_t n = low.shape[0], i, j, k
    cdef double s, acc = 0.0
    for j in range(n):
        for i in range(j):
            inv[i, j] = 0.0
        inv[j, j] = 1.0 / low[j, j]
        acc += inv[j, j] * inv[j, j]
        for i in range(j + 1, n):
            s = 0.0
            for k in range(j, i):
                s -= low[i, k] * inv[k, j]
            inv[i, j] = s / low[i, i]
            acc += inv[i, j] * inv[i, j]
    return acc


cdef int _profile(const double[::1] x, const double[::1] y, int family,
                  double nu, double psi, double[:, ::1] r, double[:, ::1] low,
                  double[:, ::1] inv, double[::1] ones, double[::1] a,
                  double[::1] b, double* out) noexcept nogil:
    # out: loglik, beta, quad, kappa
    cdef Py_ssize_t n = x.shape[0], i, j
    cdef double aa = 0.0, ab = 0.0, beta, q = 0.0, logdet = 0.0, rf = 0.0, res
    _fill_corr(x, family, nu, psi, r)
    if _chol(r, low, _PIVOT_REL_FLOOR) >= 0:
        out[0] = NAN
        out[1] = NAN
        out[2] = NAN
        out[3] = NAN
        return FLAG_NOT_PD
    _forward(low, ones, a)
    _forward(low, y, b)
    for i in range(n):
        aa += a[i] * a[i]
        ab += a[i] * b[i]
        logdet += log(low[i, i])
    beta = ab / aa
    for i in range(n):
        res = b[i] - beta * a[i]
        q += res * res
    for i in range(n):
        for j in range(n):
            rf += r[i, j] * r[i, j]
    out[1] = beta
    out[2] = q
    out[3] = sqrt(rf) * _inv_frob2(low, inv)
    if not (q > _DEGENERATE_QUAD):
        out[0] = NAN
        return FLAG_DEGENERATE
    out[0] = -logdet - 0.5 * n * log(q)
    if not (out[3] <= _KAPPA_CEILING):
        return FLAG_ILL
    return FLAG_OK


def corr_matrix(x, int family, double nu, double psi):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    out = np.empty((xv.shape[0], xv.shape[0]))
    cdef double[:, ::1] ov = out
    _fill_corr(xv, family, nu, psi, ov)
    return out


def cholesky(a, double rel_floor=1e-14):
    cdef const double[:, ::1] av = np.ascontiguousarray(a, dtype=np.float64)
    low = np.zeros((av.shape[0], av.shape[0]))
    cdef double[:, ::1] lv = low
    cdef Py_ssize_t info
    with nogil:
        info = _chol(av, lv, rel_floor)
    return low, int(info)


def profile_grid(x, y, int family, double nu, psis):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef const double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef const double[::1] pv = np.ascontiguousarray(psis, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0], g = pv.shape[0], k
    cdef double[:, ::1] r = np.empty((n, n))
    cdef double[:, ::1] low = np.zeros((n, n))
    cdef double[:, ::1] inv = np.zeros((n, n))
    cdef double[::1] ones = np.ones(n)
    cdef double[::1] a = np.empty(n)
    cdef double[::1] b = np.empty(n)
    cdef double buf[4]
    flags = np.empty(g, dtype=np.int8)
    res = np.empty((4, g))
    cdef signed char[::1] fv = flags
    cdef double[:, ::1] rv = res
    with nogil:
        for k in range(g):
            fv[k] = _profile(xv, yv, family, nu, pv[k], r, low, inv, ones, a, b, buf)
            rv[0, k] = buf[0]
            rv[1, k] = buf[1]
            rv[2, k] = buf[2]
            rv[3, k] = buf[3]
    return flags, res[0], res[1], res[2], res[3]


cdef double _dlogpsi(const double[::1] x, const double[::1] y, int family,
                     double nu, double psi, double[:, ::1] r, double[:, ::1] low,
                     double[:, ::1] inv, double[::1] ones, double[::1] a,
                     double[::1] b, double[::1] w) noexcept nogil:
    cdef Py_ssize_t n = x.shape[0], i, j, k
    cdef double aa = 0.0, ab = 0.0, beta, q = 0.0, d, dr, tr = 0.0, quad = 0.0
    cdef double rinv_ij, s
    _fill_corr(x, family, nu, psi, r)
    if _chol(r, low, _PIVOT_REL_FLOOR) >= 0:
        return NAN
    _forward(low, ones, a)
    _forward(low, y, b)
    for i in range(n):
        aa += a[i] * a[i]
        ab += a[i] * b[i]
    beta = ab / aa
    for i in range(n):
        b[i] = b[i] - beta * a[i]
        q += b[i] * b[i]
    # w = R^-1 (y - beta) = L^-T (L^-1 (y - beta))
    for i in range(n - 1, -1, -1):
        s = b[i]
        for k in range(i + 1, n):
            s -= low[k, i] * w[k]
        w[i] = s / low[i, i]
    _inv_frob2(low, inv)
    for i in range(n):
        for j in range(i):
            d = x[i] - x[j]
            if family == 0:
                dr = r[i, j] * fabs(d) / psi
            else:
                dr = r[i, j] * d * d / psi
            rinv_ij = 0.0
            for k in range(i, n):
                rinv_ij += inv[k, i] * inv[k, j]
            tr += 2.0 * rinv_ij * dr
            quad += 2.0 * w[i] * w[j] * dr
    return -0.5 * tr + 0.5 * n * quad / q


def profile_dlogpsi(x, y, int family, double nu, double psi):
    """Derivative of the profile log-likelihood with respect to log(psi)."""
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef const double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0]
    cdef double[:, ::1] r = np.empty((n, n))
    cdef double[:, ::1] low = np.zeros((n, n))
    cdef double[:, ::1] inv = np.zeros((n, n))
    cdef double[::1] ones = np.ones(n)
    cdef double[::1] a = np.empty(n)
    cdef double[::1] b = np.empty(n)
    cdef double[::1] w = np.empty(n)
    cdef double out
    with nogil:
        out = _dlogpsi(xv, yv, family, nu, psi, r, low, inv, ones, a, b, w)
    return out


def jacobi_eigenvalues(a, double tol=1e-15, int max_sweeps=100):
    """Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending."""
    work = np.array(a, dtype=np.float64, order="C", copy=True)
    cdef double[:, ::1] m = work
    cdef Py_ssize_t n = m.shape[0], p, q, k
    cdef int sweep
    cdef double off, total, apq, theta, t, c, s, mkp, mkq
    with nogil:
        for sweep in range(max_sweeps):
            off = 0.0
            total = 0.0
            for p in range(n):
                for q in range(n):
                    total += m[p, q] * m[p, q]
                    if p != q:
                        off += m[p, q] * m[p, q]
            if off <= tol * tol * total:
                break
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = m[p, q]
                    if apq == 0.0:
                        continue
                    theta = (m[q, q] - m[p, p]) / (2.0 * apq)
                    t = 1.0 / (fabs(theta) + sqrt(theta * theta + 1.0))
                    if theta < 0.0:
                        t = -t
                    c = 1.0 / sqrt(t * t + 1.0)
                    s = t * c
                    for k in range(n):
                        mkp = m[k, p]
                        mkq = m[k, q]
                        m[k, p] = c * mkp - s * mkq
                        m[k, q] = s * mkp + c * mkq
                    for k in range(n):
                        mkp = m[p, k]
                        mkq = m[q, k]
                        m[p, k] = c * mkp - s * mkq
                        m[q, k] = s * mkp + c * mkq
                    m[p, q] = 0.0
                    m[q, p] = 0.0
    return np.sort(np.diagonal(work).copy())
