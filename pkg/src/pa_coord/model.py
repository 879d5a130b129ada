"""Problem instances, succinct mechanisms and their evaluation.

A generalized principal-agent instance has finitely many agent types and
actions, a polyhedral principal strategy space ``X`` in ``R^d``, concave
piecewise-linear principal utilities and affine agent utilities. Everything
indexed by (type, action) is stored type-major: ``[t][a]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .lp import LPProblem, LPStatus, solve_lp

MEMBERSHIP_TOL = 1e-7
PROB_TOL = 1e-9


class DomainError(ValueError):
    """An argument lies outside the domain an operation is defined on."""


def _ro(a):
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class AffineForm:
    """``coeffs @ x + offset``."""

    coeffs: np.ndarray
    offset: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _ro(np.ravel(self.coeffs)))
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def dim(self):
        return self.coeffs.size

    def __call__(self, x):
        return float(self.coeffs @ np.asarray(x, dtype=float) + self.offset)


@dataclass(frozen=True)
class ConcavePWL:
    """Pointwise minimum of affine pieces."""

    pieces: tuple

    def __post_init__(self):
        pieces = tuple(self.pieces)
        if not pieces:
            raise ValueError("ConcavePWL needs at least one piece")
        object.__setattr__(self, "pieces", pieces)

    @classmethod
    def affine(cls, coeffs, offset=0.0):
        return cls((AffineForm(coeffs, offset),))

    @property
    def dim(self):
        return self.pieces[0].dim

    def __call__(self, x):
        return min(p(x) for p in self.pieces)

    def evaluate_many(self, X):
        C = np.array([p.coeffs for p in self.pieces])
        d = np.array([p.offset for p in self.pieces])
        return (np.asarray(X, dtype=float) @ C.T + d).min(axis=1)

    def lipschitz(self):
        """Max l1 norm of the piece gradients (sup-norm Lipschitz constant)."""
        return max(float(np.abs(p.coeffs).sum()) for p in self.pieces)


@dataclass(frozen=True)
class ConvexPWL:
    """Pointwise maximum of affine pieces."""

    pieces: tuple

    def __post_init__(self):
        pieces = tuple(self.pieces)
        if not pieces:
            raise ValueError("ConvexPWL needs at least one piece")
        object.__setattr__(self, "pieces", pieces)

    @property
    def dim(self):
        return self.pieces[0].dim

    def __call__(self, x):
        return max(p(x) for p in self.pieces)

    def evaluate_many(self, X):
        C = np.array([p.coeffs for p in self.pieces])
        d = np.array([p.offset for p in self.pieces])
        return (np.asarray(X, dtype=float) @ C.T + d).max(axis=1)

    def lipschitz(self):
        return max(float(np.abs(p.coeffs).sum()) for p in self.pieces)


@dataclass(frozen=True)
class Polyhedron:
    """``{y : A_ub y <= b_ub, A_eq y == b_eq}`` in ``R^dim``."""

    dim: int
    A_ub: np.ndarray = None
    b_ub: np.ndarray = None
    A_eq: np.ndarray = None
    b_eq: np.ndarray = None

    def __post_init__(self):
        d = int(self.dim)
        object.__setattr__(self, "dim", d)
        for A, b in (("A_ub", "b_ub"), ("A_eq", "b_eq")):
            rows = getattr(self, A)
            rows = np.zeros((0, d)) if rows is None or np.size(rows) == 0 else np.array(rows, dtype=float)
            rhs = getattr(self, b)
            rhs = np.zeros(0) if rhs is None else np.ravel(np.array(rhs, dtype=float))
            if rows.ndim != 2 or rows.shape[1] != d:
                raise ValueError(f"{A} rows must have length {d}")
            if rhs.size != rows.shape[0]:
                raise ValueError(f"{b} has {rhs.size} entries for {rows.shape[0]} rows")
            object.__setattr__(self, A, _ro(rows))
            object.__setattr__(self, b, _ro(rhs))

    # common shapes ---------------------------------------------------------
    @classmethod
    def nonneg_orthant(cls, d):
        return cls(d, -np.eye(d), np.zeros(d))

    @classmethod
    def simplex(cls, d):
        return cls(d, -np.eye(d), np.zeros(d), np.ones((1, d)), [1.0])

    @classmethod
    def box(cls, lo, hi):
        lo, hi = np.ravel(lo).astype(float), np.ravel(hi).astype(float)
        d = lo.size
        return cls(d, np.vstack([np.eye(d), -np.eye(d)]), np.concatenate([hi, -lo]))

    @classmethod
    def point(cls, y):
        y = np.ravel(y).astype(float)
        return cls(y.size, None, None, np.eye(y.size), y)

    @property
    def rows(self):
        """Number of constraint rows."""
        return self.A_ub.shape[0] + self.A_eq.shape[0]

    def residual(self, y):
        """Worst constraint violation at ``y`` (``<= 0`` means inside)."""
        y = np.asarray(y, dtype=float)
        worst = -np.inf
        if self.A_ub.shape[0]:
            worst = max(worst, float((self.A_ub @ y - self.b_ub).max()))
        if self.A_eq.shape[0]:
            worst = max(worst, float(np.abs(self.A_eq @ y - self.b_eq).max()))
        return worst if np.isfinite(worst) else 0.0

    def contains(self, y, tol=MEMBERSHIP_TOL):
        return self.residual(y) <= tol

    def intersect(self, other):
        if other.dim != self.dim:
            raise ValueError("dimension mismatch")
        return Polyhedron(self.dim, np.vstack([self.A_ub, other.A_ub]),
                          np.concatenate([self.b_ub, other.b_ub]),
                          np.vstack([self.A_eq, other.A_eq]),
                          np.concatenate([self.b_eq, other.b_eq]))

    def feasibility_lp(self):
        return LPProblem.build(np.zeros(self.dim), self.A_ub, self.b_ub,
                               self.A_eq, self.b_eq)

    def is_empty(self):
        return solve_lp(self.feasibility_lp()).status is LPStatus.INFEASIBLE

    def is_bounded(self):
        """True when every coordinate is bounded above and below on the set."""
        base = self.feasibility_lp()
        for j in range(self.dim):
            for s in (1.0, -1.0):
                c = np.zeros(self.dim)
                c[j] = s
                if solve_lp(base.with_objective(c)).status is LPStatus.UNBOUNDED:
                    return False
        return True


@dataclass(frozen=True)
class PAInstance:
    """A generalized principal-agent problem.

    ``principal_utility[t][a]`` is a :class:`ConcavePWL`, ``agent_utility[t][a]``
    an :class:`AffineForm`; ``supplemental`` is ``None`` or one polyhedron per
    type (``None`` entries mean unconstrained).
    """

    types: tuple
    actions: tuple
    prior: np.ndarray
    dim: int
    strategy_space: Polyhedron
    principal_utility: tuple
    agent_utility: tuple
    supplemental: tuple | None = None
    name: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "types", tuple(self.types))
        object.__setattr__(self, "actions", tuple(self.actions))
        object.__setattr__(self, "prior", _ro(np.ravel(self.prior)))
        object.__setattr__(self, "principal_utility",
                           tuple(tuple(row) for row in self.principal_utility))
        object.__setattr__(self, "agent_utility",
                           tuple(tuple(row) for row in self.agent_utility))
        if self.supplemental is not None:
            object.__setattr__(self, "supplemental", tuple(self.supplemental))

    @property
    def n_types(self):
        return len(self.types)

    @property
    def n_actions(self):
        return len(self.actions)

    def U(self, x, a, t):
        return self.principal_utility[t][a](x)

    def V(self, x, a, t):
        return self.agent_utility[t][a](x)

    def agent_arrays(self):
        """``(alpha, beta)`` with shapes ``(T, A, d)`` and ``(T, A)``."""
        alpha = np.array([[f.coeffs for f in row] for row in self.agent_utility])
        beta = np.array([[f.offset for f in row] for row in self.agent_utility])
        return alpha.reshape(self.n_types, self.n_actions, self.dim), beta

    def supplemental_for(self, t):
        if self.supplemental is None:
            return None
        return self.supplemental[t]

    @property
    def has_supplemental(self):
        return self.supplemental is not None and any(c is not None for c in self.supplemental)


@dataclass(frozen=True)
class SuccinctMechanism:
    """``probs[t, a]`` and one prescribed strategy ``strategies[t, a]`` per pair."""

    probs: np.ndarray
    strategies: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "probs", _ro(self.probs))
        object.__setattr__(self, "strategies", _ro(self.strategies))

    def used(self, t, a):
        return self.probs[t, a] > 0.0


@dataclass(frozen=True)
class ICReport:
    feasible: bool
    worst_violation: float
    violating_triplets: list


@dataclass
class ValidationReport:
    problems: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.problems

    def __str__(self):
        return "ok" if self.ok else "; ".join(self.problems)


def validate_instance(inst):
    """Collect every structural problem of ``inst`` without raising."""
    rep = ValidationReport()
    T, A, d = inst.n_types, inst.n_actions, inst.dim
    if T == 0 or A == 0:
        rep.problems.append("instance needs at least one type and one action")
        return rep
    if inst.prior.size != T:
        rep.problems.append(f"prior has {inst.prior.size} entries for {T} types")
    else:
        if np.any(inst.prior < 0):
            rep.problems.append("prior has negative entries")
        total = float(inst.prior.sum())
        if abs(total - 1.0) > 1e-12:
            rep.problems.append(f"prior sums to {total:.12g}")
    if inst.strategy_space.dim != d:
        rep.problems.append(f"strategy space has dimension {inst.strategy_space.dim}, expected {d}")
    for name, table in (("principal_utility", inst.principal_utility),
                        ("agent_utility", inst.agent_utility)):
        if len(table) != T or any(len(row) != A for row in table):
            rep.problems.append(f"{name} must have one entry per (type, action) pair")
            continue
        for t, row in enumerate(table):
            for a, form in enumerate(row):
                if form.dim != d:
                    rep.problems.append(f"{name}[{t}][{a}] has dimension {form.dim}, expected {d}")
    if inst.supplemental is not None:
        if len(inst.supplemental) != T:
            rep.problems.append("supplemental must list one entry per type")
        else:
            for t, C in enumerate(inst.supplemental):
                if C is None:
                    continue
                if C.dim != d:
                    rep.problems.append(f"supplemental[{t}] has dimension {C.dim}, expected {d}")
                elif C.is_empty():
                    rep.problems.append(f"supplemental set for type {inst.types[t]!r} is empty")
    if inst.strategy_space.dim == d and inst.strategy_space.is_empty():
        rep.problems.append("empty strategy space")
    return rep


def ensure_valid(inst):
    rep = validate_instance(inst)
    if not rep.ok:
        raise DomainError(f"invalid instance: {rep}")


def best_response(inst, x, t, tol=MEMBERSHIP_TOL):
    """Agent's best action at ``x`` for type index ``t`` and its value.

    Ties go to the lowest action index.
    """
    x = np.asarray(x, dtype=float)
    if not inst.strategy_space.contains(x, tol):
        raise DomainError(f"strategy {x} lies outside the strategy space")
    vals = [inst.V(x, a, t) for a in range(inst.n_actions)]
    a = int(np.argmax(vals))
    return a, vals[a]


def check_ic(inst, mech, tol=1e-6):
    """Check honest-obedient incentive compatibility of a succinct mechanism.

    For every ordered pair of types ``(t, s)`` the margin is the payoff type
    ``t`` gets by reporting ``s`` and best-responding to each prescribed
    strategy, minus its truthful obedient payoff. ``t == s`` checks obedience.
    """
    alpha, beta = inst.agent_arrays()
    P, X = mech.probs, mech.strategies
    T = inst.n_types
    # vals[t, s, a, b] = V(x^{a,s}, b; t)
    vals = np.einsum("tbd,sad->tsab", alpha, X) + beta[:, None, None, :]
    idx = np.arange(inst.n_actions)
    truthful = np.array([P[t] @ vals[t, t, idx, idx] for t in range(T)])
    worst = 0.0
    bad = []
    for t in range(T):
        for s in range(T):
            dev = float(P[s] @ vals[t, s].max(axis=1))
            margin = dev - truthful[t]
            worst = max(worst, margin)
            if margin > tol:
                bad.append((inst.types[t], inst.types[s], margin))
    return ICReport(worst <= tol, worst, bad)


def eval_principal(inst, mech):
    """Expected principal utility of ``mech`` under the prior."""
    total = 0.0
    for t in range(inst.n_types):
        for a in range(inst.n_actions):
            p = mech.probs[t, a]
            if p > 0.0:
                total += inst.prior[t] * p * inst.U(mech.strategies[t, a], a, t)
    return float(total)


def check_structure(inst, mech, tol=MEMBERSHIP_TOL):
    """Problems with the shape, normalisation and support of ``mech``."""
    out = []
    T, A, d = inst.n_types, inst.n_actions, inst.dim
    if mech.probs.shape != (T, A) or mech.strategies.shape != (T, A, d):
        return [f"mechanism shape {mech.probs.shape}/{mech.strategies.shape} does not match instance"]
    if np.any(mech.probs < -PROB_TOL) or np.any(mech.probs > 1 + PROB_TOL):
        out.append("probabilities outside [0, 1]")
    sums = mech.probs.sum(axis=1)
    if np.any(np.abs(sums - 1.0) > PROB_TOL):
        out.append(f"per-type probabilities sum to {sums}")
    for t in range(T):
        for a in range(A):
            if mech.probs[t, a] > 0 and not inst.strategy_space.contains(mech.strategies[t, a], tol):
                out.append(f"strategy for ({inst.actions[a]!r}, {inst.types[t]!r}) outside X")
    return out
