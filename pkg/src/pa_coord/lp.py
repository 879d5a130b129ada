"""Dense linear programming with a three-way status contract.

Problems are stated as maximisation with ``<=`` rows, ``==`` rows and optional
per-variable bounds (``-inf``/``inf`` mean absent). :func:`solve_lp` converts to
standard form, runs a two-phase primal simplex on a dense tableau (the pivot
loop lives in :mod:`pa_coord._core`), then re-solves the final basis against the
original data to clean up accumulated round-off.
"""

from __future__ import annotations

import enum
import os
from dataclasses import dataclass, field

import numpy as np

from . import _core

DEFAULT_TOL = 1e-7
REFACTOR = 50
PERTURB = 1e-7
PERTURB_STALL = 60


def default_tol():
    """LP feasibility tolerance, overridable through ``PA_COORD_LP_TOL``."""
    raw = os.environ.get("PA_COORD_LP_TOL")
    return float(raw) if raw else DEFAULT_TOL


class LPError(RuntimeError):
    """Raised when the simplex fails to reach a verified status."""


class LPStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


def _matrix(rows, n, name):
    if rows is None:
        return np.zeros((0, n))
    A = np.array(rows, dtype=float)
    if A.size == 0:
        return np.zeros((0, n))
    if A.ndim != 2 or A.shape[1] != n:
        raise ValueError(f"{name} must have {n} columns, got shape {A.shape}")
    return A


def _vector(vals, n, name, fill):
    if vals is None:
        return np.full(n, fill)
    v = np.array([fill if x is None else x for x in vals], dtype=float)
    if v.shape != (n,):
        raise ValueError(f"{name} must have length {n}, got {v.shape}")
    return v


def _frozen(a):
    a = np.ascontiguousarray(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class LPProblem:
    """``maximize objective @ v`` subject to rows and bounds.

    ``A_ub @ v <= b_ub``, ``A_eq @ v == b_eq``, ``lower <= v <= upper``.
    Missing bounds are ``-inf``/``inf``.
    """

    num_vars: int
    objective: np.ndarray
    A_ub: np.ndarray
    b_ub: np.ndarray
    A_eq: np.ndarray
    b_eq: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    @classmethod
    def build(cls, objective, A_ub=None, b_ub=None, A_eq=None, b_eq=None,
              lower=None, upper=None):
        c = np.array(objective, dtype=float).ravel()
        n = c.size
        Aub = _matrix(A_ub, n, "A_ub")
        Aeq = _matrix(A_eq, n, "A_eq")
        bub = np.array([] if b_ub is None else b_ub, dtype=float).ravel()
        beq = np.array([] if b_eq is None else b_eq, dtype=float).ravel()
        if bub.size != Aub.shape[0]:
            raise ValueError(f"b_ub has length {bub.size}, expected {Aub.shape[0]}")
        if beq.size != Aeq.shape[0]:
            raise ValueError(f"b_eq has length {beq.size}, expected {Aeq.shape[0]}")
        lo = _vector(lower, n, "lower", -np.inf)
        hi = _vector(upper, n, "upper", np.inf)
        for arr in (c, Aub, bub, Aeq, beq):
            if not np.all(np.isfinite(arr)):
                raise ValueError("LP data must be finite")
        return cls(n, _frozen(c), _frozen(Aub), _frozen(bub), _frozen(Aeq),
                   _frozen(beq), _frozen(lo), _frozen(hi))

    def with_objective(self, objective):
        c = np.array(objective, dtype=float).ravel()
        if c.shape != (self.num_vars,):
            raise ValueError("objective length mismatch")
        return LPProblem(self.num_vars, _frozen(c), self.A_ub, self.b_ub,
                         self.A_eq, self.b_eq, self.lower, self.upper)


@dataclass(frozen=True)
class LPSolution:
    status: LPStatus
    primal: np.ndarray | None = None
    objective_value: float | None = None
    iterations: int = 0
    info: dict = field(default_factory=dict, compare=False)

    @property
    def optimal(self):
        return self.status is LPStatus.OPTIMAL


def check_feasible(p, v, tol=None):
    """Return ``(ok, worst_residual)`` for point ``v`` against problem ``p``.

    The residual is signed: positive values are violations.
    """
    tol = default_tol() if tol is None else tol
    v = np.asarray(v, dtype=float)
    if v.shape != (p.num_vars,):
        raise ValueError(f"point has shape {v.shape}, expected ({p.num_vars},)")
    parts = []
    if p.A_ub.shape[0]:
        parts.append(p.A_ub @ v - p.b_ub)
    if p.A_eq.shape[0]:
        parts.append(np.abs(p.A_eq @ v - p.b_eq))
    fin = np.isfinite(p.lower)
    if fin.any():
        parts.append(p.lower[fin] - v[fin])
    fin = np.isfinite(p.upper)
    if fin.any():
        parts.append(v[fin] - p.upper[fin])
    if not parts:
        return True, 0.0
    worst = float(max(part.max() for part in parts if part.size))
    return worst <= tol, worst


class _StandardForm:
    """``v = shift + M @ y`` with ``y >= 0``; rows of ``A y (<=|==) b``."""

    def __init__(self, p, tol):
        n = p.num_vars
        lo = p.lower.copy()
        hi = p.upper.copy()
        Aub, bub = p.A_ub, p.b_ub
        self.infeasible = False

        # singleton inequality rows become bounds
        nnz = np.count_nonzero(Aub, axis=1)
        if np.any(bub[nnz == 0] < -tol):
            self.infeasible = True
        single = np.flatnonzero(nnz == 1)
        if single.size:
            j = np.argmax(Aub[single] != 0, axis=1)
            a = Aub[single, j]
            bound = bub[single] / a
            np.minimum.at(hi, j[a > 0], bound[a > 0])
            np.maximum.at(lo, j[a < 0], bound[a < 0])
        keep = nnz > 1
        Aub, bub = Aub[keep], bub[keep]
        Aeq, beq = p.A_eq, p.b_eq
        nnz = np.count_nonzero(Aeq, axis=1)
        if np.any(np.abs(beq[nnz == 0]) > tol):
            self.infeasible = True
        Aeq, beq = Aeq[nnz > 0], beq[nnz > 0]

        crossed = lo > hi
        if np.any(lo[crossed] - hi[crossed] > tol):
            self.infeasible = True
        hi[crossed] = lo[crossed]

        cols = []  # (var, sign)
        shift = np.zeros(n)
        ub_rows = []  # (column index, bound) for doubly bounded variables
        for j in range(n):
            if np.isfinite(lo[j]):
                shift[j] = lo[j]
                cols.append((j, 1.0))
                if np.isfinite(hi[j]):
                    ub_rows.append((len(cols) - 1, hi[j] - lo[j]))
            elif np.isfinite(hi[j]):
                shift[j] = hi[j]
                cols.append((j, -1.0))
            else:
                cols.append((j, 1.0))
                cols.append((j, -1.0))
        N = len(cols)
        var = np.array([j for j, _ in cols], dtype=np.intp)
        sign = np.array([sg for _, sg in cols])
        self.var, self.sign, self.shift, self.N, self.n = var, sign, shift, N, n

        A_le = Aub[:, var] * sign
        b_le = bub - Aub @ shift
        if ub_rows:
            extra = np.zeros((len(ub_rows), N))
            for r, (k, bound) in enumerate(ub_rows):
                extra[r, k] = 1.0
            A_le = np.vstack([A_le, extra])
            b_le = np.concatenate([b_le, [b for _, b in ub_rows]])
        self.A_le, self.b_le = A_le, b_le
        self.A_eq = Aeq[:, var] * sign
        self.b_eq = beq - Aeq @ shift
        self.c = p.objective[var] * sign
        self.c0 = float(p.objective @ shift)

    def recover(self, y):
        v = self.shift.copy()
        np.add.at(v, self.var, self.sign * y)
        return v


def solve_lp(p, tol=None, backend=None):
    """Solve ``p``; deterministic for identical input.

    Parameters
    ----------
    p : LPProblem
    tol : float, optional
        Feasibility tolerance; defaults to :func:`default_tol`.
    backend : {"compiled", "python"}, optional
        Pivot kernel; defaults to the compiled one when built.

    Returns
    -------
    LPSolution
        ``primal`` and ``objective_value`` are set only when optimal.

    Raises
    ------
    LPError
        If the simplex hits its iteration limit or the final basis fails
        verification against the original constraints.
    """
    tol = default_tol() if tol is None else tol
    kern = _core.kernels(backend)
    sf = _StandardForm(p, tol)
    if sf.infeasible:
        return LPSolution(LPStatus.INFEASIBLE)

    N = sf.N
    m_le, m_eq = sf.A_le.shape[0], sf.A_eq.shape[0]
    m = m_le + m_eq
    if m == 0:
        # only sign constraints on y
        if np.any(sf.c > tol):
            return LPSolution(LPStatus.UNBOUNDED)
        v = sf.recover(np.zeros(N))
        return LPSolution(LPStatus.OPTIMAL, v, float(p.objective @ v))

    A = np.vstack([sf.A_le, sf.A_eq]) if m_eq else sf.A_le
    b = np.concatenate([sf.b_le, sf.b_eq])
    n_std = N + m_le  # structural + slack columns
    A_std = np.zeros((m, n_std))
    A_std[:, :N] = A
    A_std[np.arange(m_le), N + np.arange(m_le)] = 1.0
    b_std = b.copy()
    neg = b_std < 0
    A_std[neg] *= -1.0
    b_std[neg] *= -1.0

    basis = np.empty(m, dtype=np.intp)
    art_rows = []
    for i in range(m):
        if i < m_le and not neg[i]:
            basis[i] = N + i
        else:
            art_rows.append(i)
    n_art = len(art_rows)
    ncol = n_std + n_art + 1
    T = np.zeros((m + 1, ncol))
    T[:m, :n_std] = A_std
    T[:m, -1] = b_std
    for k, i in enumerate(art_rows):
        T[i, n_std + k] = 1.0
        basis[i] = n_std + k

    max_iter = 50 * (m + ncol) + 1000
    iters = 0
    if n_art:
        cost = np.zeros(ncol)
        cost[n_std:-1] = 1.0
        status, it = _run_phase(kern, T, basis, n_std, 1e-10, max_iter, T[:m].copy(), cost)
        iters += it
        if status == _core.STATUS_ITERATION_LIMIT:
            raise LPError("phase I iteration limit reached")
        if -T[m, -1] > tol * max(1.0, float(np.abs(b_std).max())):
            return LPSolution(LPStatus.INFEASIBLE, iterations=iters)
        keep = np.ones(m, dtype=bool)
        for i in range(m):
            if basis[i] >= n_std:
                row = np.abs(T[i, :n_std])
                k = int(np.argmax(row))
                if row[k] > 1e-7:
                    _core._fallback._pivot(T, i, k)
                    basis[i] = k
                else:
                    keep[i] = False  # redundant equality
        rows = np.flatnonzero(keep)
        T = np.vstack([T[rows][:, list(range(n_std)) + [ncol - 1]],
                       np.zeros((1, n_std + 1))])
        basis = np.ascontiguousarray(basis[rows])
        A_std, b_std = A_std[rows], b_std[rows]
        m = rows.size

    c_std = np.concatenate([sf.c, np.zeros(m_le)])
    T = np.ascontiguousarray(T)
    orig = np.hstack([A_std, b_std[:, None]])
    status, it = _run_phase(kern, T, basis, n_std, 1e-9, max_iter, orig,
                            np.concatenate([-c_std, [0.0]]))
    iters += it
    if status == _core.STATUS_ITERATION_LIMIT:
        raise LPError("phase II iteration limit reached")
    if status == _core.STATUS_UNBOUNDED:
        return LPSolution(LPStatus.UNBOUNDED, iterations=iters)

    y_tab = np.zeros(n_std)
    y_tab[basis] = T[:m, -1]
    candidates = []
    refined = _refine(A_std, b_std, basis, n_std)
    if refined is not None:
        candidates.append(refined)
    candidates.append(np.maximum(y_tab, 0.0))
    worst_seen = None
    for y in candidates:
        v = sf.recover(y[:N])
        ok, worst = check_feasible(p, v, tol)
        if ok:
            return LPSolution(LPStatus.OPTIMAL, v, float(p.objective @ v),
                              iterations=iters, info={"residual": worst})
        worst_seen = worst if worst_seen is None else min(worst_seen, worst)
    raise LPError(f"final basis violates constraints by {worst_seen:.3g}")


def _reinvert(T, basis, orig, cost):
    """Rebuild the tableau from the original rows to shed accumulated error."""
    m = orig.shape[0]
    B = orig[:, basis]
    try:
        X = np.linalg.solve(B, orig)
    except np.linalg.LinAlgError:
        return False
    if not np.all(np.isfinite(X)):
        return False
    X[np.abs(X) < _core._fallback._DROP] = 0.0
    X[np.arange(m), basis] = 1.0
    T[:m] = X
    T[m] = cost - cost[basis] @ X
    T[m, basis] = 0.0
    return True


def _drifted(T, basis, orig):
    m = orig.shape[0]
    res = orig[:, basis] @ T[:m, -1] - orig[:, -1]
    return np.abs(res).max() > 1e-9 * (1.0 + np.abs(orig[:, -1]).max())


def _confirmed(basis, rows, cost, n_enter, tol):
    """Reduced costs from the duals of the original rows; None if ``B`` is singular."""
    try:
        y = np.linalg.solve(rows[:, basis].T, cost[basis])
    except np.linalg.LinAlgError:
        return None
    d = cost[:n_enter] - y @ rows[:, :n_enter]
    return bool(np.isfinite(d).all() and d.min() >= -tol)


def _perturb(T, basis, orig, cost, rng):
    """Lift every basic value by a tiny random amount; returns the shifted rows."""
    m = orig.shape[0]
    delta = PERTURB * (1.0 + np.abs(orig[:, -1]).max()) * rng.uniform(0.5, 1.0, m)
    shifted = orig.copy()
    shifted[:, -1] += orig[:, basis] @ delta
    T[:m, -1] += delta
    T[m, -1] = cost[-1] - cost[basis] @ T[:m, -1]
    return shifted


def _dual_cleanup(T, basis, n_enter, max_pivots):
    """Dual simplex pivots until the basic values are nonnegative."""
    m = T.shape[0] - 1
    floor = -1e-9 * (1.0 + np.abs(T[:m, -1]).max())
    for _ in range(max_pivots):
        r = int(np.argmin(T[:m, -1]))
        if T[r, -1] >= floor:
            return True
        row = T[r, :n_enter]
        cand = np.flatnonzero(row < -1e-9)
        if cand.size == 0:
            return False
        ratio = np.maximum(T[m, cand], 0.0) / -row[cand]
        k = int(cand[np.argmin(ratio)])
        _core._fallback._pivot(T, r, k)
        basis[r] = k
    return False


def _run_phase(kern, T, basis, n_enter, tol, max_iter, orig, cost):
    """Simplex with drift-triggered reinversion and perturbation on stalls.

    The tableau is rebuilt from ``orig`` whenever the basic values drift from
    the original rows and at an optimum the duals cannot confirm. A long degenerate run
    lifts the right-hand side slightly; the true one is restored at the end
    and any small infeasibility is removed with dual pivots.
    """
    m = orig.shape[0]
    T[m] = cost - cost[basis] @ T[:m]
    T[m, basis] = 0.0
    state = np.zeros(2, dtype=np.int64)
    rng = np.random.default_rng(0)
    rows = orig
    perturbed = False
    done = 0
    while True:
        chunk = min(REFACTOR, max_iter - done)
        status, it = kern.simplex_iterate(T, basis, n_enter, tol, chunk, state)
        done += it
        if status == _core.STATUS_UNBOUNDED or done >= max_iter:
            return status, done
        if status == _core.STATUS_OPTIMAL:
            if perturbed:
                perturbed = False
                rows = orig
                state[:] = 0
                if _reinvert(T, basis, rows, cost):
                    _dual_cleanup(T, basis, n_enter, m)
            elif not _drifted(T, basis, rows) and _confirmed(basis, rows, cost, n_enter, tol):
                return status, done
            if not _reinvert(T, basis, rows, cost):
                raise LPError("final basis is singular")
            # drifted reduced costs can stop the loop early; confirm on fresh data
            if T[m, :n_enter].min() >= -tol:
                return status, done
            continue
        if _drifted(T, basis, rows):
            _reinvert(T, basis, rows, cost)
        if state[1] and state[0] > PERTURB_STALL and not perturbed:
            rows = _perturb(T, basis, orig, cost, rng)
            perturbed = True
            state[:] = 0


def _refine(A_std, b_std, basis, n_std):
    B = A_std[:, basis]
    try:
        xb = np.linalg.solve(B, b_std)
    except np.linalg.LinAlgError:
        return None
    if not np.all(np.isfinite(xb)) or xb.min() < -1e-9:
        return None
    y = np.zeros(n_std)
    y[basis] = np.maximum(xb, 0.0)
    return y
