# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled quantile-regression simplex kernel.

Same vertex-exchange algorithm and tie-breaking as ``_simplex_py``; the
basis solve, tableau build, derivative scan, and breakpoint walk run as
plain C loops, which is what makes many small fits (bootstrap, Monte
Carlo corpora) cheap.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs
from libc.stdlib cimport free, malloc, qsort

cnp.import_array()

BACKEND = "compiled"


cdef struct BreakPoint:
    double t
    double w
    long i


cdef int _bp_cmp(const void* a, const void* b) noexcept nogil:
    cdef const BreakPoint* x = <const BreakPoint*> a
    cdef const BreakPoint* y = <const BreakPoint*> b
    if x.t < y.t:
        return -1
    if x.t > y.t:
        return 1
    if x.i < y.i:
        return -1
    if x.i > y.i:
        return 1
    return 0


cdef int _lu_factor(double* a, long* piv, int p) noexcept nogil:
    """In-place LU with partial pivoting; returns 0, or -1 when singular."""
    cdef int i, j, k, imax
    cdef double amax, tmp
    for k in range(p):
        amax = fabs(a[k * p + k])
        imax = k
        for i in range(k + 1, p):
            if fabs(a[i * p + k]) > amax:
                amax = fabs(a[i * p + k])
                imax = i
        if amax == 0.0:
            return -1
        piv[k] = imax
        if imax != k:
            for j in range(p):
                tmp = a[k * p + j]
                a[k * p + j] = a[imax * p + j]
                a[imax * p + j] = tmp
        for i in range(k + 1, p):
            a[i * p + k] /= a[k * p + k]
            for j in range(k + 1, p):
                a[i * p + j] -= a[i * p + k] * a[k * p + j]
    return 0


cdef void _lu_solve(const double* lu, const long* piv, int p, double* b) noexcept nogil:
    cdef int i, j, k
    cdef double tmp, acc
    for k in range(p):
        if piv[k] != k:
            tmp = b[k]
            b[k] = b[piv[k]]
            b[piv[k]] = tmp
    for i in range(p):
        acc = b[i]
        for j in range(i):
            acc -= lu[i * p + j] * b[j]
        b[i] = acc
    for i in range(p - 1, -1, -1):
        acc = b[i]
        for j in range(i + 1, p):
            acc -= lu[i * p + j] * b[j]
        b[i] = acc / lu[i * p + i]


def solve(double[:, ::1] X, double[::1] y, double tau, long[::1] basis0,
          long max_iter, double zero_tol, double opt_tol):
    """Mirror of ``_simplex_py.solve`` with identical return contract."""
    cdef long n = X.shape[0]
    cdef int p = <int> X.shape[1]
    cdef long iterations = 0
    cdef int status = -1
    cdef double omt = 1.0 - tau

    beta_arr = np.zeros(p, dtype=np.float64)
    basis_arr = np.array(basis0, dtype=np.int64)
    cdef double[::1] beta = beta_arr
    cdef long[::1] basis = basis_arr

    work = np.empty(p * p, dtype=np.float64)
    binv_np = np.empty((p, p), dtype=np.float64)
    s_np = np.empty((n, p), dtype=np.float64)
    r_np = np.empty(n, dtype=np.float64)
    piv_np = np.empty(p, dtype=np.int64)
    col_np = np.empty(p, dtype=np.float64)
    g_np = np.empty(p, dtype=np.float64)
    zp_np = np.empty(p, dtype=np.float64)
    zm_np = np.empty(p, dtype=np.float64)
    dir_np = np.empty(p, dtype=np.float64)
    nb_np = np.ones(n, dtype=np.int8)

    cdef double[::1] lu = work
    cdef double[:, ::1] binv = binv_np
    cdef double[:, ::1] S = s_np
    cdef double[::1] r = r_np
    cdef long[::1] piv = piv_np
    cdef double[::1] coln = col_np
    cdef double[::1] G = g_np
    cdef double[::1] Zp = zp_np
    cdef double[::1] Zm = zm_np
    cdef double[::1] unit = dir_np
    cdef char[::1] nonbasic = nb_np

    cdef BreakPoint* bps = <BreakPoint*> malloc(n * sizeof(BreakPoint))
    if bps == NULL:
        raise MemoryError()

    cdef long i, enter, nbp, b_
    cdef int j, a, best_idx
    cdef double acc, ri, sij, best_val, dval, sgn, s_i, slope, thr

    try:
        with nogil:
            while True:
                # factor X[basis] and form beta, its inverse, r, S
                for a in range(p):
                    for j in range(p):
                        lu[a * p + j] = X[basis[a], j]
                if _lu_factor(&lu[0], &piv[0], p) != 0:
                    status = 2
                    break
                for j in range(p):
                    beta[j] = y[basis[j]]
                _lu_solve(&lu[0], &piv[0], p, &beta[0])
                for j in range(p):
                    for a in range(p):
                        unit[a] = 0.0
                    unit[j] = 1.0
                    _lu_solve(&lu[0], &piv[0], p, &unit[0])
                    for a in range(p):
                        binv[a, j] = unit[a]
                for i in range(n):
                    nonbasic[i] = 1
                    acc = y[i]
                    for j in range(p):
                        acc -= X[i, j] * beta[j]
                    r[i] = acc
                for a in range(p):
                    nonbasic[basis[a]] = 0
                    r[basis[a]] = 0.0
                for i in range(n):
                    for j in range(p):
                        acc = 0.0
                        for a in range(p):
                            acc += X[i, a] * binv[a, j]
                        S[i, j] = acc

                # exact one-sided directional derivatives of all 2p edges
                for j in range(p):
                    G[j] = 0.0
                    Zp[j] = 0.0
                    Zm[j] = 0.0
                    coln[j] = 0.0
                for i in range(n):
                    if not nonbasic[i]:
                        continue
                    ri = r[i]
                    if ri > zero_tol:
                        for j in range(p):
                            sij = S[i, j]
                            G[j] -= tau * sij
                            coln[j] += fabs(sij)
                    elif ri < -zero_tol:
                        for j in range(p):
                            sij = S[i, j]
                            G[j] += omt * sij
                            coln[j] += fabs(sij)
                    else:
                        for j in range(p):
                            sij = S[i, j]
                            coln[j] += fabs(sij)
                            if sij > 0.0:
                                Zp[j] += omt * sij
                                Zm[j] += tau * sij
                            elif sij < 0.0:
                                Zp[j] -= tau * sij
                                Zm[j] -= omt * sij

                # steepest edge; ties keep the smallest (j, +then-) slot
                best_idx = -1
                best_val = 0.0
                for j in range(p):
                    dval = G[j] + omt + Zp[j]
                    if best_idx < 0 or dval < best_val:
                        best_val = dval
                        best_idx = 2 * j
                    dval = -G[j] + tau + Zm[j]
                    if dval < best_val:
                        best_val = dval
                        best_idx = 2 * j + 1
                j = best_idx // 2
                thr = -opt_tol * (1.0 + coln[j])
                if best_val >= thr:
                    status = 0
                    break
                if iterations >= max_iter:
                    status = 1
                    break

                sgn = 1.0 if best_idx % 2 == 0 else -1.0
                nbp = 0
                for i in range(n):
                    if not nonbasic[i]:
                        continue
                    ri = r[i]
                    if ri <= zero_tol and ri >= -zero_tol:
                        continue
                    s_i = sgn * S[i, j]
                    if s_i == 0.0:
                        continue
                    if ri / s_i > 0.0:
                        bps[nbp].t = ri / s_i
                        bps[nbp].w = fabs(s_i)
                        bps[nbp].i = i
                        nbp += 1
                if nbp == 0:
                    status = 2
                    break
                qsort(bps, nbp, sizeof(BreakPoint), _bp_cmp)
                slope = best_val
                enter = -1
                for b_ in range(nbp):
                    slope += bps[b_].w
                    if slope >= 0.0:
                        enter = bps[b_].i
                        break
                if enter < 0:
                    status = 2
                    break
                basis[j] = enter
                iterations += 1
    finally:
        free(bps)

    return beta_arr, basis_arr, iterations, status
