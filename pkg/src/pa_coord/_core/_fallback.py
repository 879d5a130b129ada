"""Numpy implementations of the hot kernels.

Same semantics as the Cython versions in ``_kernels.pyx``; used when the
extension is not built or ``PA_COORD_PURE_PYTHON`` is set.
"""

import numpy as np

STATUS_OPTIMAL = 0
STATUS_UNBOUNDED = 1
STATUS_ITERATION_LIMIT = 2

# consecutive degenerate pivots before switching to Bland's rule
_STALL_LIMIT = 30
_DROP = 1e-13
# pivot candidates must exceed both; the relative part is scaled by the column max
PIV_ABS = 1e-9
PIV_REL = 1e-9
HARRIS = 1e-9


def simplex_iterate(T, basis, n_enter, tol, max_iter, state=None):
    """Run primal simplex pivots on a dense tableau in place.

    ``T`` has one row per constraint plus a trailing reduced-cost row; the last
    column is the right-hand side. Columns ``>= n_enter`` never enter.
    ``state`` is an optional int64 array ``[stall, bland]`` carried between
    calls so anti-cycling survives a restart.

    Returns ``(status, iterations)``.
    """
    m = T.shape[0] - 1
    rhs = T.shape[1] - 1
    stall = int(state[0]) if state is not None else 0
    bland = bool(state[1]) if state is not None else False
    for it in range(max_iter):
        d = T[m, :n_enter]
        if bland:
            cand = np.flatnonzero(d < -tol)
            if cand.size == 0:
                return _done(state, stall, bland, STATUS_OPTIMAL, it)
            j = int(cand[0])
        else:
            j = int(np.argmin(d))
            if d[j] >= -tol:
                return _done(state, stall, bland, STATUS_OPTIMAL, it)

        col = T[:m, j]
        pos = col > PIV_ABS
        if not pos.any():
            return _done(state, stall, bland, STATUS_UNBOUNDED, it)
        rows = np.flatnonzero(col >= max(PIV_ABS, PIV_REL * col[pos].max()))
        c = col[rows]
        b = np.maximum(T[rows, rhs], 0.0)
        if bland:
            # smallest basis index among ties with a well-sized pivot
            ratios = b / c
            best = ratios.min()
            ties = ratios <= best + 1e-12 * (1.0 + best)
            ties &= c >= 1e-3 * c[ties].max()
            cand = rows[ties]
            r = int(cand[np.argmin(basis[cand])])
        else:
            # Harris: widest step within the feasibility slack, then the largest pivot
            bound = ((b + HARRIS) / c).min()
            ok = b / c <= bound
            r = int(rows[ok][np.argmax(c[ok])])

        if T[r, rhs] <= 1e-12:
            stall += 1
            if stall > _STALL_LIMIT:
                bland = True
        else:
            stall = 0
            bland = False

        _pivot(T, r, j)
        basis[r] = j
    return _done(state, stall, bland, STATUS_ITERATION_LIMIT, max_iter)


def _done(state, stall, bland, status, it):
    if state is not None:
        state[0] = stall
        state[1] = int(bland)
    return status, it


def _pivot(T, r, j):
    T[r] /= T[r, j]
    nz = np.flatnonzero(T[r])
    prow = T[r, nz]
    col = T[:, j].copy()
    col[r] = 0.0
    hit = np.flatnonzero(col)
    if hit.size:
        T[np.ix_(hit, nz)] -= np.outer(col[hit], prow)
        block = T[np.ix_(hit, nz)]
        block[np.abs(block) < _DROP] = 0.0
        T[np.ix_(hit, nz)] = block
    T[:, j] = 0.0
    T[r, j] = 1.0


def max_independent_set(masks):
    """Size of a maximum independent set.

    ``masks[v]`` is the neighbour bitmask of node ``v`` (no self loops).
    """
    k = len(masks)
    masks = [int(m) for m in masks]
    best = [0]

    def grow(cand, size):
        if cand == 0:
            if size > best[0]:
                best[0] = size
            return
        if size + bin(cand).count("1") <= best[0]:
            return
        # take isolated candidates for free
        v = (cand & -cand).bit_length() - 1
        nb = masks[v] & cand
        if nb == 0:
            grow(cand & ~(1 << v), size + 1)
            return
        grow(cand & ~(1 << v) & ~nb, size + 1)
        grow(cand & ~(1 << v), size)

    grow((1 << k) - 1, 0)
    return best[0]
