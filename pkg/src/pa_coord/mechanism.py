"""Optimal coordination mechanisms through the perspective reformulation.

Substituting ``z = pi * x`` turns the bilinear succinct-mechanism program into
a linear program over pairs ``(pi(a; t), z^{a,t})`` restricted to the
homogenized strategy set. When ``X`` is unbounded the optimum of that closure
may put ``pi = 0`` with ``z != 0`` (an irregular pair); such points are repaired
by mixing in margin-maximising solutions with a small weight ``epsilon``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .lp import LPError, LPProblem, LPStatus, solve_lp
from .model import (
    DomainError,
    Polyhedron,
    SuccinctMechanism,
    check_ic,
    ensure_valid,
)

logger = logging.getLogger(__name__)

TOL_P = 1e-9
TOL_Z = 1e-6


class NoMechanismError(RuntimeError):
    """The closure program is infeasible."""


class UnboundedUtilityError(RuntimeError):
    """The principal's optimal utility is unbounded."""


def homogenize(X):
    """Lift ``X`` to ``{(lam, z) : A z <= lam b, 0 <= lam <= 1}``.

    Coordinates are ordered ``(lam, z_1, ..., z_d)``. For nonempty polyhedral
    ``X`` this is the closure of ``{(lam, lam x) : x in X, lam in [0, 1]}``; its
    ``lam = 0`` slice is the recession cone of ``X``.
    """
    if X.is_empty():
        raise DomainError("cannot homogenize an empty polyhedron")
    d = X.dim
    A_ub = np.hstack([-X.b_ub[:, None], X.A_ub])
    lam = np.zeros((2, d + 1))
    lam[0, 0] = -1.0
    lam[1, 0] = 1.0
    A_ub = np.vstack([A_ub, lam])
    b_ub = np.concatenate([np.zeros(X.A_ub.shape[0]), [0.0, 1.0]])
    A_eq = np.hstack([-X.b_eq[:, None], X.A_eq])
    return Polyhedron(d + 1, A_ub, b_ub, A_eq, np.zeros(X.A_eq.shape[0]))


@dataclass(frozen=True)
class CPLayout:
    """Column indices of the closure program."""

    T: int
    A: int
    d: int

    @property
    def n_pairs(self):
        return self.T * self.A

    def pi(self, t, a):
        return t * self.A + a

    def z(self, t, a):
        start = self.n_pairs + (t * self.A + a) * self.d
        return slice(start, start + self.d)

    def u(self, t, a):
        return self.n_pairs * (self.d + 1) + t * self.A + a

    def w(self, t, s, a):
        # deviation auxiliaries exist only for t != s
        base = self.n_pairs * (self.d + 2)
        s_rank = s if s < t else s - 1
        return base + (t * (self.T - 1) + s_rank) * self.A + a

    @property
    def num_vars(self):
        return self.n_pairs * (self.d + 2) + self.T * (self.T - 1) * self.A


@dataclass(frozen=True)
class TransformedSolution:
    """A point ``(pi, z)`` of the closure program with its objective."""

    probs: np.ndarray
    z: np.ndarray
    objective: float

    def mix(self, weights, others):
        probs = sum(w * o.probs for w, o in zip(weights, others))
        z = sum(w * o.z for w, o in zip(weights, others))
        return probs, z


@dataclass
class MechanismResult:
    mechanism: SuccinctMechanism
    objective: float
    regular: bool
    epsilon_used: float
    repaired_pairs: list = field(default_factory=list)
    closure_objective: float = 0.0
    iterations: int = 0
    transformed: TransformedSolution | None = None
    additive_bound: float = 0.0
    multiplicative_bound: float | None = None
    pinned_pairs: list = field(default_factory=list)


def transformed_objective(inst, probs, z):
    """``sum_t f(t) sum_a pi * U(z / pi)`` using the perspective of each piece."""
    total = 0.0
    for t in range(inst.n_types):
        for a in range(inst.n_actions):
            pieces = inst.principal_utility[t][a].pieces
            val = min(float(p.coeffs @ z[t, a]) + p.offset * probs[t, a] for p in pieces)
            total += inst.prior[t] * val
    return total


def _rows(layout, inst):
    T, A, d = layout.T, layout.A, layout.d
    n = layout.num_vars
    ub, ub_rhs, eq, eq_rhs = [], [], [], []
    alpha, beta = inst.agent_arrays()
    H = homogenize(inst.strategy_space)

    def row():
        return np.zeros(n)

    for t in range(T):
        for a in range(A):
            for Hrow, rhs in zip(H.A_ub, H.b_ub):
                r = row()
                r[layout.pi(t, a)] = Hrow[0]
                r[layout.z(t, a)] = Hrow[1:]
                ub.append(r)
                ub_rhs.append(rhs)
            for Hrow, rhs in zip(H.A_eq, H.b_eq):
                r = row()
                r[layout.pi(t, a)] = Hrow[0]
                r[layout.z(t, a)] = Hrow[1:]
                eq.append(r)
                eq_rhs.append(rhs)
    # epigraph of the perspective of each concave piece
    for t in range(T):
        for a in range(A):
            for piece in inst.principal_utility[t][a].pieces:
                r = row()
                r[layout.u(t, a)] = 1.0
                r[layout.z(t, a)] = -piece.coeffs
                r[layout.pi(t, a)] = -piece.offset
                ub.append(r)
                ub_rhs.append(0.0)
    # obedience: following a recommendation beats any other action
    for t in range(T):
        for a in range(A):
            for b in range(A):
                if b == a:
                    continue
                r = row()
                r[layout.z(t, a)] = alpha[t, b] - alpha[t, a]
                r[layout.pi(t, a)] = beta[t, b] - beta[t, a]
                ub.append(r)
                ub_rhs.append(0.0)
    # misreport t -> s: w[t,s,a] bounds the best deviation payoff on s's menu item a
    for t in range(T):
        for s in range(T):
            if s == t:
                continue
            for a in range(A):
                for b in range(A):
                    r = row()
                    r[layout.z(s, a)] = alpha[t, b]
                    r[layout.pi(s, a)] = beta[t, b]
                    r[layout.w(t, s, a)] = -1.0
                    ub.append(r)
                    ub_rhs.append(0.0)
            r = row()
            for a in range(A):
                r[layout.w(t, s, a)] = 1.0
                r[layout.z(t, a)] -= alpha[t, a]
                r[layout.pi(t, a)] -= beta[t, a]
            ub.append(r)
            ub_rhs.append(0.0)
    for t in range(T):
        r = row()
        for a in range(A):
            r[layout.pi(t, a)] = 1.0
        eq.append(r)
        eq_rhs.append(1.0)
        C = inst.supplemental_for(t)
        if C is None:
            continue
        for rows, rhs, target, target_rhs in ((C.A_ub, C.b_ub, ub, ub_rhs),
                                              (C.A_eq, C.b_eq, eq, eq_rhs)):
            for Crow, c in zip(rows, rhs):
                r = row()
                for a in range(A):
                    r[layout.z(t, a)] = Crow
                target.append(r)
                target_rhs.append(c)
    return ub, ub_rhs, eq, eq_rhs


def build_cp_closure(inst):
    """The closure program as an :class:`LPProblem`, plus its column layout.

    Variables are ``pi``, ``z``, one epigraph variable per pair and one
    deviation variable per (type, misreport, action). Only the
    ``0 <= pi <= 1`` bounds carried by the homogenized rows restrict them.
    """
    ensure_valid(inst)
    layout = CPLayout(inst.n_types, inst.n_actions, inst.dim)
    ub, ub_rhs, eq, eq_rhs = _rows(layout, inst)
    c = np.zeros(layout.num_vars)
    for t in range(layout.T):
        for a in range(layout.A):
            c[layout.u(t, a)] = inst.prior[t]
    lp = LPProblem.build(c, np.array(ub), ub_rhs, np.array(eq) if eq else None, eq_rhs)
    return lp, layout


def build_margin_cp(inst, pair, closure=None):
    """Same constraints as the closure program, maximising ``pi(a; t)``.

    ``pair`` is ``(a, t)`` as action and type indices.
    """
    lp, layout = closure if closure is not None else build_cp_closure(inst)
    a, t = pair
    c = np.zeros(layout.num_vars)
    c[layout.pi(t, a)] = 1.0
    return lp.with_objective(c), layout


def extract(inst, layout, v):
    T, A, d = layout.T, layout.A, layout.d
    probs = np.array([[v[layout.pi(t, a)] for a in range(A)] for t in range(T)])
    z = np.array([[v[layout.z(t, a)] for a in range(A)] for t in range(T)]).reshape(T, A, d)
    return TransformedSolution(probs, z, transformed_objective(inst, probs, z))


def lift(inst, mech):
    """Map a succinct mechanism to the closure program (``z = pi * x``)."""
    z = mech.probs[:, :, None] * mech.strategies
    return TransformedSolution(mech.probs.copy(), z, transformed_objective(inst, mech.probs, z))


def closure_point(inst, layout, sol):
    """Full closure-program vector for ``(pi, z)``.

    Epigraph columns take the perspective utility, deviation columns the
    largest deviation payoff, so the point is feasible iff ``(pi, z)`` is.
    """
    alpha, beta = inst.agent_arrays()
    v = np.zeros(layout.num_vars)
    for t in range(layout.T):
        for a in range(layout.A):
            p, z = sol.probs[t, a], sol.z[t, a]
            v[layout.pi(t, a)] = p
            v[layout.z(t, a)] = z
            v[layout.u(t, a)] = min(float(pc.coeffs @ z) + pc.offset * p
                                    for pc in inst.principal_utility[t][a].pieces)
    for t in range(layout.T):
        for s in range(layout.T):
            if s == t:
                continue
            for a in range(layout.A):
                v[layout.w(t, s, a)] = float((alpha[t] @ sol.z[s, a] + beta[t] * sol.probs[s, a]).max())
    return v


def find_irregular_pairs(sol, tol_p=TOL_P, tol_z=TOL_Z):
    """Pairs ``(a, t)`` with ``pi <= tol_p`` but ``||z||_inf >= tol_z``.

    Ordered by type index, then action index.
    """
    T, A = sol.probs.shape
    out = []
    for t in range(T):
        for a in range(A):
            if sol.probs[t, a] <= tol_p and np.abs(sol.z[t, a]).max(initial=0.0) >= tol_z:
                out.append((a, t))
    return out


def recover_succinct(sol, tol_p=TOL_P, tol_z=TOL_Z):
    """Divide out the probabilities: ``x = z / pi`` (zero when ``pi`` is zero)."""
    bad = find_irregular_pairs(sol, tol_p, tol_z)
    if bad:
        raise DomainError(f"irregular pairs present: {bad}")
    probs = np.array(sol.probs, dtype=float)
    X = np.zeros_like(sol.z)
    live = probs > tol_p
    X[live] = sol.z[live] / probs[live][:, None]
    probs[~live] = 0.0
    return SuccinctMechanism(probs, X)


def _solve(lp, what):
    sol = solve_lp(lp)
    if sol.status is LPStatus.INFEASIBLE:
        raise NoMechanismError(f"{what} is infeasible")
    if sol.status is LPStatus.UNBOUNDED:
        raise UnboundedUtilityError(f"{what} is unbounded")
    return sol


def _diagnose_infeasible(inst):
    X = inst.strategy_space
    culprits = []
    for t in range(inst.n_types):
        C = inst.supplemental_for(t)
        if C is not None and X.intersect(C).is_empty():
            culprits.append(inst.types[t])
    if culprits:
        return f"supplemental constraints of types {culprits} do not meet the strategy space"
    return "constraints are jointly inconsistent"


def _pin(lp, layout, pairs, pi_too=True):
    """Copy of ``lp`` with ``z`` (and ``pi``) of ``pairs`` fixed to zero."""
    lo, hi = lp.lower.copy(), lp.upper.copy()
    for a, t in pairs:
        cols = np.arange(layout.num_vars)[layout.z(t, a)].tolist()
        if pi_too:
            cols.append(layout.pi(t, a))
        lo[cols] = 0.0
        hi[cols] = 0.0
    return LPProblem.build(lp.objective, lp.A_ub, lp.b_ub, lp.A_eq, lp.b_eq, lo, hi)


def _regular_optimum(inst, lp, layout, opt, bad, tol_p, tol_z):
    """An optimal point without irregular pairs, if zeroing their ``z`` keeps optimality."""
    floor = opt - 1e-9 * (1.0 + abs(opt))
    A_ub = np.vstack([lp.A_ub, -lp.objective])
    b_ub = np.concatenate([lp.b_ub, [-floor]])
    base = LPProblem.build(lp.objective, A_ub, b_ub, lp.A_eq, lp.b_eq, lp.lower, lp.upper)
    fixed = set(bad)
    for _ in range(layout.n_pairs):
        sol = solve_lp(_pin(base, layout, fixed, pi_too=False))
        if not sol.optimal:
            return None
        cand = extract(inst, layout, sol.primal)
        more = find_irregular_pairs(cand, tol_p, tol_z)
        if not more:
            return cand
        fixed.update(more)
    return None


def solve_optimal_mechanism(inst, epsilon=0.01, tol_p=TOL_P, tol_z=TOL_Z):
    """Optimal (or ``epsilon``-optimal) succinct coordination mechanism.

    Solves the closure program. If its optimum has an irregular pair, an
    optimal point without one is looked for first; failing that the margin
    program for the pair is solved, the pair joins the repair set ``S`` and
    ``(1 - eps) M* + eps/|S| sum_S M^{a,t}`` is re-mixed until no irregular
    pair remains. A pair whose margin is zero cannot carry probability in any
    feasible mechanism; it is pinned to ``pi = z = 0`` and the closure is
    solved again.

    Raises
    ------
    NoMechanismError
        No mechanism satisfies the constraints.
    UnboundedUtilityError
        The closure program is unbounded.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    base_lp, layout = build_cp_closure(inst)
    pinned = []
    closure_value = None
    while True:
        lp = _pin(base_lp, layout, pinned) if pinned else base_lp
        sol = solve_lp(lp)
        if sol.status is LPStatus.INFEASIBLE:
            raise NoMechanismError("no coordination mechanism exists: " + _diagnose_infeasible(inst))
        if sol.status is LPStatus.UNBOUNDED:
            raise UnboundedUtilityError("principal utility is unbounded on this instance")
        if closure_value is None:
            closure_value = sol.objective_value
        star = extract(inst, layout, sol.primal)
        bad = find_irregular_pairs(star, tol_p, tol_z)
        if bad:
            alt = _regular_optimum(inst, lp, layout, sol.objective_value, bad, tol_p, tol_z)
            if alt is not None:
                star = alt
        current = star
        repaired, margins = [], []
        restart = False
        while True:
            bad = find_irregular_pairs(current, tol_p, tol_z)
            if not bad:
                break
            pair = bad[0]
            if pair in repaired:
                raise LPError(f"pair {pair} irregular after repair; numerical breakdown")
            mlp, _ = build_margin_cp(inst, pair, (lp, layout))
            msol = _solve(mlp, f"margin program for {pair}")
            if msol.objective_value <= tol_p:
                logger.debug("pair %s has zero margin; pinning it", pair)
                pinned.append(pair)
                restart = True
                break
            m = extract(inst, layout, msol.primal)
            logger.debug("repair %s: margin %.3g", pair, msol.objective_value)
            repaired.append(pair)
            margins.append(m)
            k = len(margins)
            weights = [1.0 - epsilon] + [epsilon / k] * k
            probs, z = star.mix(weights, [star] + margins)
            current = TransformedSolution(probs, z, transformed_objective(inst, probs, z))
        if not restart:
            break

    # sub-threshold z on dropped pairs is LP noise; score what is returned
    live = current.probs > tol_p
    probs = np.where(live, current.probs, 0.0)
    z = np.where(live[..., None], current.z, 0.0)
    current = TransformedSolution(probs, z, transformed_objective(inst, probs, z))
    mech = recover_succinct(current, tol_p, tol_z)
    regular = not repaired
    if regular:
        additive = star.objective
        mult = star.objective
    else:
        worst = min(m.objective for m in margins)
        additive = star.objective - epsilon * (star.objective - worst)
        mult = (1.0 - epsilon) * star.objective if star.objective >= 0 else None
    return MechanismResult(
        mechanism=mech,
        objective=current.objective,
        regular=regular,
        epsilon_used=0.0 if regular else epsilon,
        repaired_pairs=repaired,
        closure_objective=closure_value,
        iterations=len(repaired),
        transformed=current,
        additive_bound=additive,
        multiplicative_bound=mult,
        pinned_pairs=pinned,
    )


def verify_result(inst, result, tol=1e-6):
    """IC report of the mechanism held by ``result``."""
    return check_ic(inst, result.mechanism, tol)
