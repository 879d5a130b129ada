"""Optimal costly information acquisition over a partition of the belief simplex.

The value function of the decision maker is concave on each cell of a finite
partition. With a convex posterior-separable cost the optimal experiment
carries at most one signal per cell, and the perspective substitution
``g_i = p_i * sigma_i`` makes the problem a linear program.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .lp import LPProblem, LPStatus, solve_lp
from .model import AffineForm, ConcavePWL, ConvexPWL, DomainError, Polyhedron

CELL_TOL = 1e-9
P_TOL = 1e-12


@dataclass(frozen=True)
class PartitionCell:
    region: Polyhedron
    utility: ConcavePWL
    label: object = None


@dataclass(frozen=True)
class Partition:
    """Closed convex cells covering the simplex of dimension ``dim``."""

    cells: tuple
    dim: int

    def __post_init__(self):
        cells = tuple(self.cells)
        for c in cells:
            if c.region.dim != self.dim or c.utility.dim != self.dim:
                raise DomainError("cell dimension does not match the partition")
        object.__setattr__(self, "cells", cells)

    def value(self, sigma, tol=CELL_TOL):
        """Best cell utility among the cells containing ``sigma``."""
        best = -np.inf
        for c in self.cells:
            if c.region.contains(sigma, tol):
                best = max(best, c.utility(sigma))
        if not np.isfinite(best):
            raise DomainError("point is not covered by the partition")
        return best

    def covers(self, points, tol=CELL_TOL):
        return all(any(c.region.contains(y, tol) for c in self.cells) for y in points)


@dataclass(frozen=True)
class Signal:
    prob: float
    posterior: np.ndarray
    cell: int


@dataclass(frozen=True)
class Experiment:
    """Signals with their probabilities and posteriors.

    ``value`` is ``sum_i p_i (u(sigma_i) - h(sigma_i))``; ``cost`` is
    ``sum_i p_i h(sigma_i) - h(f)``, nonnegative for convex ``h``.
    """

    signals: tuple
    value: float
    prior: np.ndarray
    gross: float = 0.0
    cost: float = 0.0
    cost_gap: float = 0.0

    @property
    def probs(self):
        return np.array([s.prob for s in self.signals])

    @property
    def posteriors(self):
        return np.array([s.posterior for s in self.signals])

    def plausibility_error(self):
        mean = self.probs @ self.posteriors
        return float(np.abs(mean - self.prior).max())


# ---------------------------------------------------------------------------
# costs


class CostSpec:
    """Convex signal cost ``h`` on the simplex, represented as a max of affines."""

    kind = ""
    gap = 0.0

    def pieces(self, dim):
        raise NotImplementedError

    def __call__(self, sigma):
        return self.pieces(np.size(sigma))(sigma)


@dataclass(frozen=True)
class ZeroCost(CostSpec):
    kind = "zero"

    def pieces(self, dim):
        return ConvexPWL((AffineForm(np.zeros(dim)),))


@dataclass(frozen=True)
class PiecewiseConvexCost(CostSpec):
    pwl: ConvexPWL
    kind = "piecewise_convex"

    def pieces(self, dim):
        if self.pwl.dim != dim:
            raise DomainError(f"cost has dimension {self.pwl.dim}, expected {dim}")
        return self.pwl


def neg_entropy(sigma):
    sigma = np.asarray(sigma, dtype=float)
    pos = sigma > 0
    return float(np.sum(sigma[pos] * np.log(sigma[pos])))


@dataclass(frozen=True)
class EntropyApprox(CostSpec):
    """Max of tangent planes of ``sum s log s`` at interior grid points.

    On the simplex the tangent at ``q`` is ``sigma . log q``. ``gap`` is the
    largest shortfall below the true negative entropy found on a grid four
    times finer, boundary included.
    """

    points_per_axis: int
    dim: int
    gap: float = field(init=False, default=0.0)
    _pwl: ConvexPWL = field(init=False, repr=False, default=None)

    def __post_init__(self):
        m, d = int(self.points_per_axis), int(self.dim)
        if m < d:
            raise DomainError("points_per_axis must be at least the dimension")
        pts = simplex_lattice(d, m)
        pts = pts[np.all(pts > 0, axis=1)]
        pwl = ConvexPWL(tuple(AffineForm(np.log(q)) for q in pts))
        fine = simplex_lattice(d, 4 * m)
        exact = np.array([neg_entropy(y) for y in fine])
        gap = float(np.max(exact - pwl.evaluate_many(fine)))
        object.__setattr__(self, "_pwl", pwl)
        object.__setattr__(self, "gap", max(gap, 0.0))

    kind = "entropy_approx"

    def pieces(self, dim):
        if dim != self.dim:
            raise DomainError(f"cost has dimension {self.dim}, expected {dim}")
        return self._pwl


def simplex_lattice(dim, m):
    """All points ``k / m`` of the simplex in ``R^dim`` (``k`` integer)."""
    out = []
    for bars in itertools.combinations(range(m + dim - 1), dim - 1):
        prev = -1
        parts = []
        for b in bars:
            parts.append(b - prev - 1)
            prev = b
        parts.append(m + dim - 2 - prev)
        out.append(parts)
    return np.array(out, dtype=float).reshape(-1, dim) / m


# ---------------------------------------------------------------------------
# partition oracles


def _best_response_cell(values, a, dim):
    """Cell on which row ``a`` of ``values`` (actions x states) is maximal."""
    diff = values - values[a]
    diff = np.delete(diff, a, axis=0)
    simplex = Polyhedron.simplex(dim)
    return Polyhedron(dim, np.vstack([simplex.A_ub, diff]),
                      np.zeros(dim + diff.shape[0]), simplex.A_eq, simplex.b_eq)


def partition_decision_problem(u, actions=None):
    """One cell per action: beliefs under which the action is optimal.

    ``u`` is an actions-by-states payoff matrix.
    """
    u = np.atleast_2d(np.asarray(u, dtype=float))
    A, n = u.shape
    labels = actions if actions is not None else range(A)
    cells = [PartitionCell(_best_response_cell(u, a, n), ConcavePWL.affine(u[a]), lab)
             for a, lab in zip(range(A), labels)]
    return Partition(cells, n)


def partition_costly_persuasion(u, v, actions=None):
    """Receiver best-response cells with the sender's payoff on each.

    ``u`` (sender) and ``v`` (receiver) are actions-by-states matrices. Cells
    are closed, so on ties both actions' cells contain the belief and the
    solver picks the sender-preferred one.
    """
    u = np.atleast_2d(np.asarray(u, dtype=float))
    v = np.atleast_2d(np.asarray(v, dtype=float))
    if u.shape != v.shape:
        raise DomainError("sender and receiver payoffs must have the same shape")
    A, n = v.shape
    labels = actions if actions is not None else range(A)
    cells = [PartitionCell(_best_response_cell(v, a, n), ConcavePWL.affine(u[a]), lab)
             for a, lab in zip(range(A), labels)]
    return Partition(cells, n)


# ---------------------------------------------------------------------------
# solver


def perspective_on_simplex(h, g):
    """``t * h(g / t)`` with ``t = sum(g)``; zero when ``t = 0``."""
    g = np.asarray(g, dtype=float)
    if np.any(g < 0):
        raise DomainError("perspective needs a nonnegative vector")
    t = float(g.sum())
    if t == 0.0:
        return 0.0
    return t * h(g / t)


def solve_info_acquisition(part, cost, prior):
    """Optimal experiment for prior ``f`` against ``cost``.

    Variables per cell are ``g_i >= 0`` with ``p_i = sum(g_i)``. The cell
    utility enters through its perspective (epigraph rows), the cost through
    its perspective (hypograph rows) and ``sum_i g_i = f``. The constant
    ``h(f)`` is left out of ``value``.
    """
    f = np.asarray(prior, dtype=float)
    if not part.cells:
        raise DomainError("empty partition")
    n = part.dim
    if f.shape != (n,) or np.any(f < -1e-12) or abs(f.sum() - 1.0) > 1e-9:
        raise DomainError("prior must be a distribution over the partition's states")
    h = cost.pieces(n)
    N = len(part.cells)
    block = n + 2  # g, u, s
    nv = N * block
    ones = np.ones(n)
    ub, ub_rhs = [], []
    c = np.zeros(nv)
    for i, cell in enumerate(part.cells):
        o = i * block
        g = slice(o, o + n)
        c[o + n] = 1.0
        c[o + n + 1] = -1.0
        R = cell.region
        for row, b in zip(R.A_ub, R.b_ub):
            r = np.zeros(nv)
            r[g] = row - b * ones
            ub.append(r)
            ub_rhs.append(0.0)
        for row, b in zip(R.A_eq, R.b_eq):
            for sgn in (1.0, -1.0):
                r = np.zeros(nv)
                r[g] = sgn * (row - b * ones)
                ub.append(r)
                ub_rhs.append(0.0)
        for p in cell.utility.pieces:
            r = np.zeros(nv)
            r[o + n] = 1.0
            r[g] = -(p.coeffs + p.offset * ones)
            ub.append(r)
            ub_rhs.append(0.0)
        for p in h.pieces:
            r = np.zeros(nv)
            r[o + n + 1] = -1.0
            r[g] = p.coeffs + p.offset * ones
            ub.append(r)
            ub_rhs.append(0.0)
    A_eq = np.zeros((n, nv))
    for i in range(N):
        A_eq[:, i * block:i * block + n] = np.eye(n)
    lp = LPProblem.build(c, np.array(ub), ub_rhs, A_eq, f)
    sol = solve_lp(lp)
    if sol.status is LPStatus.INFEASIBLE:
        raise DomainError("partition does not cover the prior")
    if sol.status is LPStatus.UNBOUNDED:
        raise DomainError("acquisition problem is unbounded")
    signals = []
    gross = 0.0
    paid = 0.0
    for i, cell in enumerate(part.cells):
        g = np.maximum(sol.primal[i * block:i * block + n], 0.0)
        p = float(g.sum())
        if p <= P_TOL:
            continue
        sigma = g / p
        signals.append(Signal(p, sigma, i))
        gross += p * cell.utility(sigma)
        paid += p * h(sigma)
    return Experiment(tuple(signals), gross - paid, f, gross=gross, cost=paid - h(f),
                      cost_gap=cost.gap)


def induced_value(inst):
    """``sigma -> optimal mechanism value`` with the type prior replaced by ``sigma``.

    A pointwise evaluator for grid studies; no partition oracle is implied.
    """
    from dataclasses import replace

    from .mechanism import solve_optimal_mechanism

    def value(sigma):
        return solve_optimal_mechanism(replace(inst, prior=np.asarray(sigma, dtype=float))).objective

    return value


# ---------------------------------------------------------------------------
# hardness construction


@dataclass(frozen=True)
class ConcavificationHardness:
    """``u(s) = sum_i max(s_i - sum_j e_ij s_j, 0)`` and ``h(s) = max(max_i s_i - 1/k, 0)``."""

    adjacency: np.ndarray
    cost: PiecewiseConvexCost
    expansion: ConvexPWL | None

    @property
    def k(self):
        return self.adjacency.shape[0]

    def u(self, sigma):
        return float(self.u_many(np.atleast_2d(sigma))[0])

    def u_many(self, S):
        S = np.asarray(S, dtype=float)
        return np.maximum(S - S @ self.adjacency.T, 0.0).sum(axis=1)

    def h_many(self, S):
        return np.maximum(np.asarray(S).max(axis=1) - 1.0 / self.k, 0.0)

    def objective_many(self, S):
        return self.u_many(S) - self.h_many(S)


EXPANSION_LIMIT = 12


def gen_concavification_hardness(graph):
    """Value and cost functions whose simplex maximum relates to MIS size."""
    k = graph.n
    E = np.zeros((k, k))
    for a, b in graph.edges:
        E[a, b] = E[b, a] = 1.0
    pieces = [AffineForm(np.eye(k)[i], -1.0 / k) for i in range(k)]
    pieces.append(AffineForm(np.zeros(k)))
    cost = PiecewiseConvexCost(ConvexPWL(tuple(pieces)))
    expansion = None
    if k <= EXPANSION_LIMIT:
        rows = np.eye(k) - E
        forms = []
        for mask in range(1 << k):
            sel = [(mask >> i) & 1 for i in range(k)]
            forms.append(AffineForm(np.asarray(sel, dtype=float) @ rows))
        expansion = ConvexPWL(tuple(forms))
    return ConcavificationHardness(E, cost, expansion)
