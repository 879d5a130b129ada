"""Brute-force reference values.

Everything here is deliberately simple: discretize, enumerate, or solve a
textbook LP. The test suite compares the solvers against these.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import _core
from .applications import SizeGuardError
from .info_acquisition import simplex_lattice
from .lp import LPProblem, LPStatus, solve_lp
from .model import DomainError

MAX_GRID_POINTS = 10**6
MAX_MIS_NODES = 24


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid: on the simplex (``simplex=True``) or on a box.

    ``step`` must divide 1 (simplex) or each box side.
    """

    step: float
    box: tuple | None = None
    simplex: bool = False

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError("grid step must be positive")
        if self.box is None and not self.simplex:
            raise ValueError("grid needs a box or the simplex flag")

    def divisions(self, length):
        m = length / self.step
        k = int(round(m))
        if k < 1 or abs(m - k) > 1e-9 * max(1.0, m):
            raise ValueError(f"step {self.step} does not divide length {length}")
        return k

    def count(self, dim):
        if self.simplex:
            m = self.divisions(1.0)
            return _binom(m + dim - 1, dim - 1)
        total = 1
        for lo, hi in self.box:
            total *= self.divisions(hi - lo) + 1
        return total

    def points(self, dim):
        n = self.count(dim)
        if n > MAX_GRID_POINTS:
            raise SizeGuardError(f"grid has {n} points, cap is {MAX_GRID_POINTS}")
        if self.simplex:
            return simplex_lattice(dim, self.divisions(1.0))
        if len(self.box) != dim:
            raise ValueError("box dimension mismatch")
        axes = [np.linspace(lo, hi, self.divisions(hi - lo) + 1) for lo, hi in self.box]
        return np.array(list(itertools.product(*axes))).reshape(-1, dim)


def _binom(n, k):
    return math.comb(n, k)


def bounding_box(P):
    """Per-coordinate ``(lo, hi)`` of a polyhedron; ``None`` if it is unbounded."""
    out = []
    for i in range(P.dim):
        ends = []
        for sgn in (1.0, -1.0):
            c = np.zeros(P.dim)
            c[i] = sgn
            sol = solve_lp(LPProblem.build(c, P.A_ub, P.b_ub, P.A_eq, P.b_eq,
                                           lower=np.full(P.dim, -np.inf)))
            if sol.status is LPStatus.UNBOUNDED:
                return None
            if sol.status is not LPStatus.OPTIMAL:
                raise DomainError("polyhedron is empty")
            ends.append(sgn * sol.objective_value)
        out.append((ends[1], ends[0]))
    return tuple(out)


def snap_box(box, step):
    """Widen ``box`` to multiples of ``step``."""
    snapped = []
    for lo, hi in box:
        a = math.floor(lo / step + 1e-9) * step
        b = math.ceil(hi / step - 1e-9) * step
        snapped.append((a, max(b, a + step)))
    return tuple(snapped)


def grid_lipschitz(inst):
    """Largest l1 norm of a principal-utility gradient."""
    return max(pwl.lipschitz() for row in inst.principal_utility for pwl in row)


def myerson_grid_lp(inst, grid, return_solution=False):
    """Optimal coordination mechanism restricted to grid strategies.

    Variables ``pi(x, a; t)`` for grid points ``x`` inside ``X``, plus one
    deviation variable per (type, misreport, action). Rows: normalization,
    obedience, misreport IC and the supplemental constraints on
    ``sum pi * x``.
    """
    T, A, d = inst.n_types, inst.n_actions, inst.dim
    G = grid.points(d)
    X = inst.strategy_space
    worst = np.zeros(G.shape[0])
    if X.A_ub.shape[0]:
        worst = np.maximum(worst, (G @ X.A_ub.T - X.b_ub).max(axis=1))
    if X.A_eq.shape[0]:
        worst = np.maximum(worst, np.abs(G @ X.A_eq.T - X.b_eq).max(axis=1))
    G = G[worst <= 1e-9]
    if G.shape[0] == 0:
        raise DomainError("no grid point lies in the strategy space")
    K = G.shape[0]
    Uv = np.array([[inst.principal_utility[t][a].evaluate_many(G) for a in range(A)]
                   for t in range(T)])
    alpha, beta = inst.agent_arrays()
    # Vv[t, a, k] = V(G[k], a; t)
    Vv = np.einsum("tad,kd->tak", alpha, G) + beta[:, :, None]
    npi = T * A * K
    nw = T * (T - 1) * A
    n = npi + nw

    def pi(t, a):
        s = (t * A + a) * K
        return slice(s, s + K)

    def w(t, s, a):
        r = s if s < t else s - 1
        return npi + (t * (T - 1) + r) * A + a

    ub, ub_rhs, eq, eq_rhs = [], [], [], []
    for t in range(T):
        r = np.zeros(n)
        for a in range(A):
            r[pi(t, a)] = 1.0
        eq.append(r)
        eq_rhs.append(1.0)
        for a in range(A):
            for b in range(A):
                if a != b:
                    r = np.zeros(n)
                    r[pi(t, a)] = Vv[t, b] - Vv[t, a]
                    ub.append(r)
                    ub_rhs.append(0.0)
    for t in range(T):
        for s in range(T):
            if s == t:
                continue
            for a in range(A):
                for b in range(A):
                    r = np.zeros(n)
                    r[pi(s, a)] = Vv[t, b]
                    r[w(t, s, a)] = -1.0
                    ub.append(r)
                    ub_rhs.append(0.0)
            r = np.zeros(n)
            for a in range(A):
                r[w(t, s, a)] = 1.0
                r[pi(t, a)] -= Vv[t, a]
            ub.append(r)
            ub_rhs.append(0.0)
    for t in range(T):
        C = inst.supplemental_for(t)
        if C is None:
            continue
        for rows, rhs, dest, dest_rhs in ((C.A_ub, C.b_ub, ub, ub_rhs),
                                          (C.A_eq, C.b_eq, eq, eq_rhs)):
            for row, b in zip(rows, rhs):
                r = np.zeros(n)
                for a in range(A):
                    r[pi(t, a)] = G @ row
                dest.append(r)
                dest_rhs.append(b)
    c = np.zeros(n)
    for t in range(T):
        for a in range(A):
            c[pi(t, a)] = inst.prior[t] * Uv[t, a]
    lower = np.concatenate([np.zeros(npi), np.full(nw, -np.inf)])
    lp = LPProblem.build(c, np.array(ub), ub_rhs, np.array(eq), eq_rhs, lower=lower)
    sol = solve_lp(lp)
    if sol.status is not LPStatus.OPTIMAL:
        raise DomainError(f"grid program is {sol.status.value}")
    if return_solution:
        probs = sol.primal[:npi].reshape(T, A, K)
        return sol.objective_value, G, probs
    return sol.objective_value


def grid_concavify(phi, prior, grid):
    """Best Bayes-plausible split of ``prior`` over grid posteriors.

    ``phi`` maps an ``(m, n)`` array of posteriors to ``m`` values.
    """
    f = np.asarray(prior, dtype=float)
    n = f.size
    if np.any(f < -1e-12) or abs(f.sum() - 1.0) > 1e-9:
        raise DomainError("prior is not in the simplex")
    if not grid.simplex:
        raise ValueError("concavification needs a simplex grid")
    P = grid.points(n)
    vals = np.asarray(phi(P), dtype=float)
    A_eq = np.vstack([P.T, np.ones(P.shape[0])])
    lp = LPProblem.build(vals, None, None, A_eq, np.concatenate([f, [1.0]]),
                         lower=np.zeros(P.shape[0]))
    sol = solve_lp(lp)
    if sol.status is not LPStatus.OPTIMAL:
        raise DomainError("prior is not in the hull of the grid")
    return sol.objective_value


def grid_max(phi, dim, grid):
    """``(max, argmax)`` of ``phi`` over the simplex grid."""
    P = grid.points(dim)
    vals = np.asarray(phi(P), dtype=float)
    k = int(np.argmax(vals))
    return float(vals[k]), P[k]


def simplex_cell_diameter(dim, step):
    """l1 diameter bound of a cell of the simplex lattice with spacing ``step``."""
    return 2.0 * (dim - 1) * step


def simplex_lipschitz(coeff_rows):
    """Lipschitz constant w.r.t. the l1 norm along the simplex.

    Moves keep the coordinate sum fixed, so each gradient only matters through
    its spread: ``(max - min) / 2``.
    """
    C = np.atleast_2d(coeff_rows)
    return float(((C.max(axis=1) - C.min(axis=1)) / 2.0).max())


def brute_force_mis(graph):
    """Maximum independent set size by pruned subset enumeration."""
    if graph.n > MAX_MIS_NODES:
        raise SizeGuardError(f"{graph.n} nodes exceed the MIS cap of {MAX_MIS_NODES}")
    return int(_core.kernels().max_independent_set(graph.masks()))


def exhaustive_mis(graph):
    """Reference MIS by checking subsets from largest to smallest."""
    if graph.n > 16:
        raise SizeGuardError("exhaustive MIS limited to 16 nodes")
    for size in range(graph.n, 0, -1):
        for S in itertools.combinations(range(graph.n), size):
            if graph.is_independent(S):
                return size
    return 0


def minimax_lp(M):
    """Value of the zero-sum game where the row player maximizes ``p @ M @ q``."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    r, c = M.shape
    # variables p (r), v; maximize v subject to v <= p @ M[:, j]
    obj = np.zeros(r + 1)
    obj[r] = 1.0
    A_ub = np.hstack([-M.T, np.ones((c, 1))])
    A_eq = np.zeros((1, r + 1))
    A_eq[0, :r] = 1.0
    lower = np.concatenate([np.zeros(r), [-np.inf]])
    sol = solve_lp(LPProblem.build(obj, A_ub, np.zeros(c), A_eq, [1.0], lower=lower))
    return sol.objective_value
