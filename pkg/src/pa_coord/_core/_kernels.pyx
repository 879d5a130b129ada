# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: simplex pivoting and MIS branching.

Semantics match ``_fallback.py`` exactly; the test suite runs both.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs
from libc.stdint cimport uint64_t

cdef int STATUS_OPTIMAL = 0
cdef int STATUS_UNBOUNDED = 1
cdef int STATUS_ITERATION_LIMIT = 2
cdef int _STALL_LIMIT = 30
cdef double _DROP = 1e-13
cdef double PIV_ABS = 1e-9
cdef double PIV_REL = 1e-9
cdef double HARRIS = 1e-9


cdef inline double _pos(double x):
    return x if x > 0.0 else 0.0


def simplex_iterate(double[:, ::1] T, Py_ssize_t[::1] basis, Py_ssize_t n_enter,
                    double tol, Py_ssize_t max_iter, state=None):
    cdef cnp.int64_t[::1] st = state if state is not None else np.zeros(2, dtype=np.int64)
    return _iterate(T, basis, n_enter, tol, max_iter, st)


cdef tuple _iterate(double[:, ::1] T, Py_ssize_t[::1] basis, Py_ssize_t n_enter,
                    double tol, Py_ssize_t max_iter, cnp.int64_t[::1] st):
    cdef Py_ssize_t m = T.shape[0] - 1
    cdef Py_ssize_t ncol = T.shape[1]
    cdef Py_ssize_t rhs = ncol - 1
    cdef Py_ssize_t it, i, j, k, r, q, nnz
    cdef double dmin, v, best, ratio, piv, f, bound, cmax, ptol
    cdef int stall = <int>st[0]
    cdef bint bland = st[1] != 0
    cdef Py_ssize_t[::1] nzidx = np.empty(ncol, dtype=np.intp)

    for it in range(max_iter):
        # pricing
        j = -1
        if bland:
            for k in range(n_enter):
                if T[m, k] < -tol:
                    j = k
                    break
        else:
            dmin = -tol
            for k in range(n_enter):
                if T[m, k] < dmin:
                    dmin = T[m, k]
                    j = k
        if j < 0:
            st[0] = stall; st[1] = bland
            return STATUS_OPTIMAL, it

        # ratio test over rows with a pivot above PIV_ABS and PIV_REL * column max
        cmax = 0.0
        for i in range(m):
            if T[i, j] > cmax:
                cmax = T[i, j]
        if cmax <= PIV_ABS:
            st[0] = stall; st[1] = bland
            return STATUS_UNBOUNDED, it
        ptol = PIV_REL * cmax
        if ptol < PIV_ABS:
            ptol = PIV_ABS
        r = -1
        if bland:
            # smallest basis index among ties with a well-sized pivot
            best = 0.0
            for i in range(m):
                if T[i, j] >= ptol:
                    ratio = _pos(T[i, rhs]) / T[i, j]
                    if r < 0 or ratio < best:
                        best = ratio
                        r = i
            bound = best + 1e-12 * (1.0 + best)
            piv = 0.0
            for i in range(m):
                if T[i, j] >= ptol and _pos(T[i, rhs]) / T[i, j] <= bound and T[i, j] > piv:
                    piv = T[i, j]
            r = -1
            for i in range(m):
                if (T[i, j] >= ptol and T[i, j] >= 1e-3 * piv
                        and _pos(T[i, rhs]) / T[i, j] <= bound
                        and (r < 0 or basis[i] < basis[r])):
                    r = i
        else:
            # Harris: widest step within the feasibility slack, then the largest pivot
            bound = 0.0
            for i in range(m):
                if T[i, j] >= ptol:
                    ratio = (_pos(T[i, rhs]) + HARRIS) / T[i, j]
                    if r < 0 or ratio < bound:
                        bound = ratio
                        r = i
            piv = 0.0
            r = -1
            for i in range(m):
                if T[i, j] >= ptol and _pos(T[i, rhs]) / T[i, j] <= bound and T[i, j] > piv:
                    piv = T[i, j]
                    r = i

        if T[r, rhs] <= 1e-12:
            stall += 1
            if stall > _STALL_LIMIT:
                bland = True
        else:
            stall = 0
            bland = False

        # pivot on (r, j)
        piv = T[r, j]
        nnz = 0
        for k in range(ncol):
            if T[r, k] != 0.0:
                T[r, k] = T[r, k] / piv
                nzidx[nnz] = k
                nnz += 1
        for i in range(m + 1):
            if i == r:
                continue
            f = T[i, j]
            if f == 0.0:
                continue
            for q in range(nnz):
                k = nzidx[q]
                v = T[i, k] - f * T[r, k]
                if fabs(v) < _DROP:
                    v = 0.0
                T[i, k] = v
            T[i, j] = 0.0
        T[r, j] = 1.0
        basis[r] = j
    st[0] = stall; st[1] = bland
    return STATUS_ITERATION_LIMIT, max_iter


cdef int _popcount(uint64_t x):
    cdef int c = 0
    while x:
        x &= x - 1
        c += 1
    return c


cdef int _lowbit(uint64_t x):
    cdef int b = 0
    while not (x & 1):
        x >>= 1
        b += 1
    return b


cdef void _grow(uint64_t cand, int size, uint64_t* masks, int* best):
    cdef int v
    cdef uint64_t nb, one = 1
    if cand == 0:
        if size > best[0]:
            best[0] = size
        return
    if size + _popcount(cand) <= best[0]:
        return
    v = _lowbit(cand)
    nb = masks[v] & cand
    if nb == 0:
        _grow(cand & ~(one << v), size + 1, masks, best)
        return
    _grow(cand & ~(one << v) & ~nb, size + 1, masks, best)
    _grow(cand & ~(one << v), size, masks, best)


def max_independent_set(masks):
    cdef Py_ssize_t k = len(masks)
    cdef uint64_t[::1] arr = np.asarray([int(x) for x in masks], dtype=np.uint64)
    cdef int best = 0
    cdef uint64_t full
    if k == 0:
        return 0
    full = (<uint64_t>1 << k) - 1 if k < 64 else <uint64_t>0xFFFFFFFFFFFFFFFF
    _grow(full, 0, &arr[0], &best)
    return best
