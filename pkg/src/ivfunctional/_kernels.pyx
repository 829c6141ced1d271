# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled numerical kernels.

Every function here has a pure-Python twin in ``_kernels_py`` with the same
signature and the same algorithm; ``ivfunctional.kernels`` picks one at import.
Trigonometric values are generated by the angle-addition recurrence, so one
``cos``/``sin`` pair per point serves every frequency.
"""

import numpy as np

from libc.math cimport cos, sin, sqrt, fabs, M_PI
from libc.stdlib cimport malloc, free
from libc.stdint cimport uint64_t

cdef double SQRT2 = 1.4142135623730951


cdef inline void _fill_basis(double s, Py_ssize_t m, double* out) noexcept nogil:
    cdef double c1 = cos(2.0 * M_PI * s)
    cdef double s1 = sin(2.0 * M_PI * s)
    cdef double ck = c1
    cdef double sk = s1
    cdef double tmp
    cdef Py_ssize_t k = 1
    out[0] = 1.0
    while 2 * k - 1 < m:
        out[2 * k - 1] = SQRT2 * ck
        if 2 * k < m:
            out[2 * k] = SQRT2 * sk
        tmp = ck * c1 - sk * s1
        sk = sk * c1 + ck * s1
        ck = tmp
        k += 1


def basis_matrix(const double[::1] s, Py_ssize_t m):
    cdef Py_ssize_t n = s.shape[0]
    out = np.empty((n, m), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            _fill_basis(s[i], m, &o[i, 0])
    return out


def joint_density(const double[::1] z, const double[::1] w, const double[::1] lambdas):
    cdef Py_ssize_t n = z.shape[0]
    cdef Py_ssize_t big_j = lambdas.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t i, k
    cdef double cz1, sz1, cw1, sw1, czk, szk, cwk, swk, tmp, total
    with nogil:
        for i in range(n):
            total = 1.0
            if big_j > 1:
                cz1 = cos(2.0 * M_PI * z[i])
                sz1 = sin(2.0 * M_PI * z[i])
                cw1 = cos(2.0 * M_PI * w[i])
                sw1 = sin(2.0 * M_PI * w[i])
                czk = cz1
                szk = sz1
                cwk = cw1
                swk = sw1
                k = 1
                while 2 * k - 1 < big_j:
                    total = total + 2.0 * lambdas[2 * k - 1] * czk * cwk
                    if 2 * k < big_j:
                        total = total + 2.0 * lambdas[2 * k] * szk * swk
                    tmp = czk * cz1 - szk * sz1
                    szk = szk * cz1 + czk * sz1
                    czk = tmp
                    tmp = cwk * cw1 - swk * sw1
                    swk = swk * cw1 + cwk * sw1
                    cwk = tmp
                    k += 1
            o[i] = total
    return out


def galerkin_matrix(const double[::1] z, const double[::1] w, Py_ssize_t m):
    """Entry (l, j) is the sample mean of f_l(w_i) e_j(z_i)."""
    cdef Py_ssize_t n = z.shape[0]
    out = np.zeros((m, m), dtype=np.float64)
    cdef double[:, ::1] acc = out
    cdef double* ez = <double*> malloc(m * sizeof(double))
    cdef double* fw = <double*> malloc(m * sizeof(double))
    cdef Py_ssize_t i, l, j
    cdef double fl
    if ez == NULL or fw == NULL:
        free(ez)
        free(fw)
        raise MemoryError()
    try:
        with nogil:
            for i in range(n):
                _fill_basis(z[i], m, ez)
                _fill_basis(w[i], m, fw)
                for l in range(m):
                    fl = fw[l]
                    for j in range(m):
                        acc[l, j] += fl * ez[j]
            for l in range(m):
                for j in range(m):
                    acc[l, j] = acc[l, j] / n
    finally:
        free(ez)
        free(fw)
    return out


def invert(const double[:, ::1] a, double tol):
    """Gauss-Jordan with partial pivoting; ``None`` when a pivot falls below tol."""
    cdef Py_ssize_t m = a.shape[0]
    work_arr = np.array(a, dtype=np.float64, copy=True)
    inv_arr = np.eye(m, dtype=np.float64)
    cdef double[:, ::1] wk = work_arr
    cdef double[:, ::1] iv = inv_arr
    cdef Py_ssize_t col, r, k, piv
    cdef double best, p, f, tmp
    cdef bint singular = False
    with nogil:
        for col in range(m):
            piv = col
            best = fabs(wk[col, col])
            for r in range(col + 1, m):
                if fabs(wk[r, col]) > best:
                    best = fabs(wk[r, col])
                    piv = r
            if not (best >= tol):
                singular = True
                break
            if piv != col:
                for k in range(m):
                    tmp = wk[col, k]
                    wk[col, k] = wk[piv, k]
                    wk[piv, k] = tmp
                    tmp = iv[col, k]
                    iv[col, k] = iv[piv, k]
                    iv[piv, k] = tmp
            p = wk[col, col]
            for k in range(m):
                wk[col, k] = wk[col, k] / p
                iv[col, k] = iv[col, k] / p
            for r in range(m):
                if r == col:
                    continue
                f = wk[r, col]
                if f != 0.0:
                    for k in range(m):
                        wk[r, k] = wk[r, k] - f * wk[col, k]
                        iv[r, k] = iv[r, k] - f * iv[col, k]
    if singular:
        return None
    return inv_arr


cdef inline uint64_t _splitmix_next(uint64_t* state) noexcept nogil:
    state[0] += <uint64_t>0x9E3779B97F4A7C15
    cdef uint64_t z = state[0]
    z = (z ^ (z >> 30)) * <uint64_t>0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * <uint64_t>0x94D049BB133111EB
    return z ^ (z >> 31)


cdef inline double _splitmix_unit(uint64_t* state) noexcept nogil:
    return <double>(_splitmix_next(state) >> 11) * (1.0 / 9007199254740992.0) * 2.0 - 1.0


cdef double _power_run(double* b, Py_ssize_t m, double tol, Py_ssize_t max_iter,
                       uint64_t* state, double* x, double* y) noexcept nogil:
    cdef Py_ssize_t i, j, it
    cdef double nrm, mu, mu_prev, acc
    cdef int restarts = 0
    # start vector
    while True:
        nrm = 0.0
        for i in range(m):
            x[i] = _splitmix_unit(state)
            nrm += x[i] * x[i]
        nrm = sqrt(nrm)
        if nrm > 0.0:
            break
    for i in range(m):
        x[i] = x[i] / nrm
    mu_prev = -1.0
    mu = 0.0
    it = 0
    while it < max_iter:
        for i in range(m):
            acc = 0.0
            for j in range(m):
                acc += b[i * m + j] * x[j]
            y[i] = acc
        nrm = 0.0
        mu = 0.0
        for i in range(m):
            nrm += y[i] * y[i]
            mu += x[i] * y[i]
        nrm = sqrt(nrm)
        if nrm == 0.0:
            # landed in the null space: restart from a fresh vector
            restarts += 1
            if restarts > 50:
                return 0.0
            nrm = 0.0
            for i in range(m):
                x[i] = _splitmix_unit(state)
                nrm += x[i] * x[i]
            nrm = sqrt(nrm)
            for i in range(m):
                x[i] = x[i] / nrm
            mu_prev = -1.0
            it += 1
            continue
        for i in range(m):
            x[i] = y[i] / nrm
        if fabs(mu - mu_prev) <= tol * fabs(mu):
            break
        mu_prev = mu
        it += 1
    return mu


def spectral_norm(const double[:, ::1] a, double tol, Py_ssize_t max_iter, unsigned long long seed):
    """Largest singular value by power iteration on A^T A, two independent starts."""
    cdef Py_ssize_t rows = a.shape[0]
    cdef Py_ssize_t m = a.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double acc, mu1, mu2, amax = 0.0
    cdef uint64_t state = seed
    if rows == 0 or m == 0:
        return 0.0
    for i in range(rows):
        for j in range(m):
            if fabs(a[i, j]) > amax:
                amax = fabs(a[i, j])
    if amax == 0.0:
        return 0.0
    cdef double* b = <double*> malloc(m * m * sizeof(double))
    cdef double* x = <double*> malloc(m * sizeof(double))
    cdef double* y = <double*> malloc(m * sizeof(double))
    if b == NULL or x == NULL or y == NULL:
        free(b)
        free(x)
        free(y)
        raise MemoryError()
    try:
        with nogil:
            for i in range(m):
                for j in range(m):
                    acc = 0.0
                    for k in range(rows):
                        acc += a[k, i] * a[k, j]
                    b[i * m + j] = acc
            mu1 = _power_run(b, m, tol, max_iter, &state, x, y)
            mu2 = _power_run(b, m, tol, max_iter, &state, x, y)
    finally:
        free(b)
        free(x)
        free(y)
    if mu2 > mu1:
        mu1 = mu2
    return sqrt(mu1)
