"""Special cases of the principal-agent model and restricted mechanism classes.

Contract design, Bayesian persuasion, selling information and Bayesian
Stackelberg games all reduce to a :class:`~pa_coord.model.PAInstance`. The
restricted classes (type-independent and action-independent mechanisms) are
solved exactly by branch-and-bound over best-response assignments, which is
exponential in the number of types and meant for small instances.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .lp import LPProblem, LPStatus, solve_lp
from .mechanism import NoMechanismError, UnboundedUtilityError, homogenize
from .model import (
    AffineForm,
    ConcavePWL,
    DomainError,
    PAInstance,
    Polyhedron,
    ensure_valid,
)

MAX_ASSIGNMENTS = 10**6
MAX_PROFILES = 4096
DIST_TOL = 1e-12


class SizeGuardError(RuntimeError):
    """An exhaustive search would exceed the configured size guard."""


def _check_dist(p, what):
    p = np.asarray(p, dtype=float)
    if np.any(p < -DIST_TOL) or abs(p.sum() - 1.0) > DIST_TOL:
        raise DomainError(f"{what} is not a probability vector")


def _as_matrix(m, shape, what):
    m = np.array(m, dtype=float)
    if m.shape != shape:
        raise DomainError(f"{what} has shape {m.shape}, expected {shape}")
    if not np.all(np.isfinite(m)):
        raise DomainError(f"{what} has non-finite entries")
    return m


# ---------------------------------------------------------------------------
# special-case instances


@dataclass(frozen=True)
class ContractInstance:
    """Principal pays ``x[i]`` on outcome ``i``; the agent picks a costly action.

    ``outcome_dist[t][a]`` is the outcome distribution and ``cost[t][a]`` the
    cost of action ``a`` for type ``t``.
    """

    reward: np.ndarray
    outcome_dist: np.ndarray
    cost: np.ndarray
    prior: np.ndarray
    types: tuple = ()
    actions: tuple = ()

    def __post_init__(self):
        r = np.array(self.reward, dtype=float)
        P = np.array(self.outcome_dist, dtype=float)
        if P.ndim != 3 or P.shape[2] != r.size:
            raise DomainError("outcome_dist must have shape (types, actions, outcomes)")
        T, A, _ = P.shape
        c = _as_matrix(self.cost, (T, A), "cost")
        if not np.all(np.isfinite(r)):
            raise DomainError("rewards must be finite")
        for t in range(T):
            for a in range(A):
                _check_dist(P[t, a], f"outcome_dist[{t}][{a}]")
        _check_dist(self.prior, "prior")
        object.__setattr__(self, "reward", r)
        object.__setattr__(self, "outcome_dist", P)
        object.__setattr__(self, "cost", c)
        object.__setattr__(self, "prior", np.array(self.prior, dtype=float))
        object.__setattr__(self, "types", tuple(self.types) or tuple(range(T)))
        object.__setattr__(self, "actions", tuple(self.actions) or tuple(range(A)))

    @property
    def num_outcomes(self):
        return self.reward.size


@dataclass(frozen=True)
class PersuasionInstance:
    """Sender commits to a signaling scheme over states; receivers have types.

    ``sender[t]`` and ``receiver[t]`` are state-by-action payoff matrices and
    ``beliefs[t]`` the prior belief of type ``t``.
    """

    beliefs: np.ndarray
    type_dist: np.ndarray
    sender: np.ndarray
    receiver: np.ndarray
    types: tuple = ()
    actions: tuple = ()

    def __post_init__(self):
        mu = np.array(self.beliefs, dtype=float)
        if mu.ndim != 2:
            raise DomainError("beliefs must be a (types, states) matrix")
        T, d = mu.shape
        u = np.array(self.sender, dtype=float)
        if u.ndim != 3 or u.shape[:2] != (T, d):
            raise DomainError("sender utilities must have shape (types, states, actions)")
        A = u.shape[2]
        v = _as_matrix(self.receiver, (T, d, A), "receiver utilities")
        _as_matrix(u, (T, d, A), "sender utilities")
        for t in range(T):
            _check_dist(mu[t], f"beliefs[{t}]")
        _check_dist(self.type_dist, "type_dist")
        object.__setattr__(self, "beliefs", mu)
        object.__setattr__(self, "sender", u)
        object.__setattr__(self, "receiver", v)
        object.__setattr__(self, "type_dist", np.array(self.type_dist, dtype=float))
        object.__setattr__(self, "types", tuple(self.types) or tuple(range(T)))
        object.__setattr__(self, "actions", tuple(self.actions) or tuple(range(A)))

    @classmethod
    def common_prior(cls, prior, type_dist, sender, receiver, **kw):
        T = len(type_dist)
        return cls(np.tile(np.asarray(prior, dtype=float), (T, 1)), type_dist,
                   sender, receiver, **kw)

    @property
    def num_states(self):
        return self.beliefs.shape[1]


@dataclass(frozen=True)
class StackelbergInstance:
    """Leader mixes over ``d`` actions; a typed follower best-responds.

    ``leader[t]`` and ``follower[t]`` have shape ``(d, |A|)``.
    """

    leader: np.ndarray
    follower: np.ndarray
    prior: np.ndarray
    types: tuple = ()
    actions: tuple = ()
    leader_actions: tuple = ()

    def __post_init__(self):
        u = np.array(self.leader, dtype=float)
        if u.ndim != 3:
            raise DomainError("leader payoffs must have shape (types, d, actions)")
        T, d, A = u.shape
        _as_matrix(u, (T, d, A), "leader payoffs")
        v = _as_matrix(self.follower, (T, d, A), "follower payoffs")
        _check_dist(self.prior, "prior")
        object.__setattr__(self, "leader", u)
        object.__setattr__(self, "follower", v)
        object.__setattr__(self, "prior", np.array(self.prior, dtype=float))
        object.__setattr__(self, "types", tuple(self.types) or tuple(range(T)))
        object.__setattr__(self, "actions", tuple(self.actions) or tuple(range(A)))
        object.__setattr__(self, "leader_actions",
                           tuple(self.leader_actions) or tuple(range(d)))

    @property
    def num_leader_actions(self):
        return self.leader.shape[1]


@dataclass(frozen=True)
class SellingInfoInstance:
    """A seller prices information about a state the buyer acts on.

    Menu entries are ``(posterior, price)``; the seller's utility is the price.
    With ``outside_option`` a zero-probability type that values no action and
    pays nothing is appended; buyers can always imitate it, which acts as a
    participation constraint.
    """

    prior: np.ndarray
    type_dist: np.ndarray
    buyer: np.ndarray
    types: tuple = ()
    actions: tuple = ()
    outside_option: bool = False

    def __post_init__(self):
        mu = np.array(self.prior, dtype=float)
        _check_dist(mu, "prior")
        v = np.array(self.buyer, dtype=float)
        if v.ndim != 3 or v.shape[1] != mu.size:
            raise DomainError("buyer utilities must have shape (types, states, actions)")
        _as_matrix(v, v.shape, "buyer utilities")
        _check_dist(self.type_dist, "type_dist")
        if len(self.type_dist) != v.shape[0]:
            raise DomainError("type_dist length must match buyer utilities")
        object.__setattr__(self, "prior", mu)
        object.__setattr__(self, "buyer", v)
        object.__setattr__(self, "type_dist", np.array(self.type_dist, dtype=float))
        object.__setattr__(self, "types", tuple(self.types) or tuple(range(v.shape[0])))
        object.__setattr__(self, "actions", tuple(self.actions) or tuple(range(v.shape[2])))

    @property
    def num_states(self):
        return self.prior.size


# ---------------------------------------------------------------------------
# reductions


def contract_to_pa(c):
    """``U = P (r - x)``, ``V = P x - cost`` over payments ``x >= 0``."""
    T, A, d = c.outcome_dist.shape
    U = [[ConcavePWL.affine(-c.outcome_dist[t, a], c.outcome_dist[t, a] @ c.reward)
          for a in range(A)] for t in range(T)]
    V = [[AffineForm(c.outcome_dist[t, a], -c.cost[t, a]) for a in range(A)]
         for t in range(T)]
    return PAInstance(list(c.types), list(c.actions), c.prior, d,
                      Polyhedron.nonneg_orthant(d), U, V, name="contract")


def persuasion_to_pa(p):
    """Posteriors ``x`` on the simplex; Bayes plausibility as ``C_t = {mu_t}``."""
    T, d, A = p.sender.shape
    U = [[ConcavePWL.affine(p.sender[t][:, a]) for a in range(A)] for t in range(T)]
    V = [[AffineForm(p.receiver[t][:, a]) for a in range(A)] for t in range(T)]
    C = [Polyhedron.point(p.beliefs[t]) for t in range(T)]
    return PAInstance(list(p.types), list(p.actions), p.type_dist, d,
                      Polyhedron.simplex(d), U, V, supplemental=C, name="persuasion")


def stackelberg_to_pa(s):
    """Leader mixed strategies on the simplex, no supplemental constraints."""
    T, d, A = s.leader.shape
    U = [[ConcavePWL.affine(s.leader[t][:, a]) for a in range(A)] for t in range(T)]
    V = [[AffineForm(s.follower[t][:, a]) for a in range(A)] for t in range(T)]
    return PAInstance(list(s.types), list(s.actions), s.prior, d,
                      Polyhedron.simplex(d), U, V, name="stackelberg")


def selling_info_to_pa(s):
    """Strategies ``(x, t)`` with ``x`` a posterior and ``t >= 0`` a price."""
    d = s.num_states
    T, _, A = s.buyer.shape
    buyer = s.buyer
    types = list(s.types)
    f = list(s.type_dist)
    if s.outside_option:
        buyer = np.concatenate([buyer, np.zeros((1, d, A))])
        types.append("outside")
        f.append(0.0)
    n = len(types)
    dim = d + 1
    A_eq = np.zeros((1, dim))
    A_eq[0, :d] = 1.0
    A_ub = np.zeros((1, dim))
    A_ub[0, d] = -1.0
    X = Polyhedron(dim, np.vstack([-np.eye(dim)[:d], A_ub]), np.zeros(d + 1), A_eq, [1.0])
    price = np.zeros(dim)
    price[d] = 1.0
    U = [[ConcavePWL.affine(price) for _ in range(A)] for _ in range(n)]
    V = [[AffineForm(np.concatenate([buyer[t][:, a], [-1.0]])) for a in range(A)]
         for t in range(n)]
    C = []
    for t in range(n):
        rows = np.hstack([np.eye(d), np.zeros((d, 1))])
        rhs = s.prior
        if t == T:
            rows = np.vstack([rows, price])
            rhs = np.concatenate([rhs, [0.0]])
        C.append(Polyhedron(dim, None, None, rows, rhs))
    return PAInstance(types, list(s.actions), f, dim, X, U, V, supplemental=C,
                      name="selling_info")


# ---------------------------------------------------------------------------
# restricted mechanism classes


@dataclass
class ClassResult:
    """Optimum of a restricted mechanism class.

    ``strategies`` holds one strategy per type (action-independent), a single
    strategy (type-independent) or a list of ``(prob, x, profile)`` atoms
    (type-independent with supplemental constraints).
    """

    value: float
    strategies: object
    assignment: tuple = ()
    explored: int = 0
    extra: dict = field(default_factory=dict)

    def __iter__(self):
        yield self.value
        yield self.strategies


class _LPBuilder:
    """Row accumulator for small LPs."""

    def __init__(self, n):
        self.n = n
        self.ub, self.ub_rhs, self.eq, self.eq_rhs = [], [], [], []

    def le(self, idx, coeffs, rhs):
        r = np.zeros(self.n)
        np.add.at(r, idx, coeffs)
        self.ub.append(r)
        self.ub_rhs.append(rhs)

    def poly(self, sl, P, lam=None):
        """``y[sl] in P``; homogenized with ``y[lam]`` when ``lam`` is given."""
        for rows, rhs, dest, dest_rhs in ((P.A_ub, P.b_ub, self.ub, self.ub_rhs),
                                          (P.A_eq, P.b_eq, self.eq, self.eq_rhs)):
            for row, b in zip(rows, rhs):
                r = np.zeros(self.n)
                r[sl] = row
                if lam is None:
                    dest_rhs.append(b)
                else:
                    r[lam] = -b
                    dest_rhs.append(0.0)
                dest.append(r)

    def problem(self, c):
        return LPProblem.build(
            c,
            np.array(self.ub) if self.ub else None, self.ub_rhs if self.ub else None,
            np.array(self.eq) if self.eq else None, self.eq_rhs if self.eq else None)


def _guard(inst):
    count = inst.n_actions ** inst.n_types
    if count > MAX_ASSIGNMENTS:
        raise SizeGuardError(
            f"{count} best-response assignments exceed the guard of {MAX_ASSIGNMENTS}")


def _type_upper_bounds(inst, per_type_space):
    """``max_a max_x U(x, a; t)`` over each type's admissible strategies."""
    d = inst.dim
    out = np.zeros(inst.n_types)
    for t in range(inst.n_types):
        best = -np.inf
        for a in range(inst.n_actions):
            b = _LPBuilder(d + 1)
            b.poly(slice(0, d), per_type_space[t])
            for p in inst.principal_utility[t][a].pieces:
                b.le(np.r_[d, np.arange(d)], np.r_[1.0, -p.coeffs], p.offset)
            c = np.zeros(d + 1)
            c[d] = 1.0
            sol = solve_lp(b.problem(c))
            if sol.status is LPStatus.UNBOUNDED:
                best = np.inf
                break
            if sol.optimal:
                best = max(best, sol.objective_value)
        out[t] = best
    return out


def _branch_and_bound(inst, relax, ub):
    """Depth-first search over assignments ``t -> a``.

    ``relax(partial)`` solves the relaxation for a partial assignment and
    returns ``(value of assigned part, point)`` or ``None`` when infeasible.
    Unassigned types contribute their constant bound ``ub[t]``.
    """
    T, A = inst.n_types, inst.n_actions
    best = [-np.inf, None, None]
    explored = [0]
    f = inst.prior

    def rest(k):
        return float(f[k:] @ ub[k:]) if np.all(np.isfinite(ub[k:]) | (f[k:] == 0)) else np.inf

    def visit(partial):
        explored[0] += 1
        res = relax(partial)
        if res is None:
            return
        val, point = res
        k = len(partial)
        bound = val + (rest(k) if k < T else 0.0)
        if bound <= best[0] + 1e-12:
            return
        if k == T:
            best[:] = [val, point, tuple(partial)]
            return
        for a in range(A):
            visit(partial + [a])

    visit([])
    return best, explored[0]


def _solve_or_raise(lp):
    sol = solve_lp(lp)
    if sol.status is LPStatus.UNBOUNDED:
        raise UnboundedUtilityError("restricted-class objective is unbounded")
    return sol if sol.optimal else None


def _poly_rows(P, n, sl):
    """Rows of ``y[sl] in P`` embedded in ``R^n``."""
    ub = np.zeros((P.A_ub.shape[0], n))
    ub[:, sl] = P.A_ub
    eq = np.zeros((P.A_eq.shape[0], n))
    eq[:, sl] = P.A_eq
    return ub, P.b_ub, eq, P.b_eq


class _AssignmentLP:
    """Relaxations of a restricted class for partial assignments ``t -> a``.

    Rows shared by every node are built once; each assigned pair adds a
    cached block. Epigraph columns of unassigned types are fixed at zero.
    """

    def __init__(self, inst, n, base, blocks, ucol):
        self.inst, self.n = inst, n
        self.base = base  # (A_ub, b_ub, A_eq, b_eq)
        self.blocks = blocks  # (t, a) -> (rows, rhs)
        self.ucol = ucol  # t -> epigraph column
        self.solved = 0

    def solve(self, partial):
        ub = [self.base[0]] + [self.blocks[t, a][0] for t, a in enumerate(partial)]
        rhs = [self.base[1]] + [self.blocks[t, a][1] for t, a in enumerate(partial)]
        c = np.zeros(self.n)
        lo = np.full(self.n, -np.inf)
        hi = np.full(self.n, np.inf)
        for t in range(self.inst.n_types):
            if t < len(partial):
                c[self.ucol[t]] = self.inst.prior[t]
            else:
                lo[self.ucol[t]] = hi[self.ucol[t]] = 0.0
        lp = LPProblem.build(c, np.vstack(ub), np.concatenate(rhs),
                             self.base[2] if self.base[2].shape[0] else None,
                             self.base[3] if self.base[2].shape[0] else None, lo, hi)
        self.solved += 1
        return _solve_or_raise(lp)


def _epigraph_rows(pwl, n, ucol, xcols, lam=None):
    rows, rhs = [], []
    for p in pwl.pieces:
        r = np.zeros(n)
        r[ucol] = 1.0
        r[xcols] = -p.coeffs
        if lam is None:
            rhs.append(p.offset)
        else:
            r[lam] = -p.offset
            rhs.append(0.0)
        rows.append(r)
    return rows, rhs


def solve_action_independent(inst):
    """Best mechanism using one strategy ``x^t`` per reported type.

    Each type is recommended a single action; with supplemental constraints
    ``x^t`` must lie in ``C_t``.
    """
    ensure_valid(inst)
    _guard(inst)
    T, A, d = inst.n_types, inst.n_actions, inst.dim
    alpha, beta = inst.agent_arrays()
    X = inst.strategy_space
    spaces = [X if inst.supplemental_for(t) is None else X.intersect(inst.supplemental_for(t))
              for t in range(T)]
    ub = _type_upper_bounds(inst, spaces)
    n = T * d + T
    parts = [_poly_rows(spaces[t], n, slice(t * d, (t + 1) * d)) for t in range(T)]
    base = (np.vstack([p[0] for p in parts]), np.concatenate([p[1] for p in parts]),
            np.vstack([p[2] for p in parts]), np.concatenate([p[3] for p in parts]))
    blocks = {}
    for t in range(T):
        xt = np.arange(t * d, (t + 1) * d)
        for a in range(A):
            rows, rhs = _epigraph_rows(inst.principal_utility[t][a], n, T * d + t, xt)
            for s in range(T):
                for a2 in range(A):
                    if s == t and a2 == a:
                        continue
                    # V(x^s, a2; t) <= V(x^t, a; t)
                    r = np.zeros(n)
                    r[s * d:(s + 1) * d] += alpha[t, a2]
                    r[xt] -= alpha[t, a]
                    rows.append(r)
                    rhs.append(beta[t, a] - beta[t, a2])
            blocks[t, a] = (np.array(rows), np.array(rhs))
    lp = _AssignmentLP(inst, n, base, blocks, {t: T * d + t for t in range(T)})

    def relax(partial):
        sol = lp.solve(partial)
        if sol is None:
            return None
        return sol.objective_value, sol.primal[:T * d].reshape(T, d)

    (val, point, assign), explored = _branch_and_bound(inst, relax, ub)
    if point is None:
        raise NoMechanismError("no action-independent mechanism satisfies the constraints")
    return ClassResult(val, point, assign, explored)


def solve_type_independent(inst, method="joint"):
    """Best mechanism that ignores the reported type.

    Without supplemental constraints this is a single strategy ``x*`` (a
    Bayesian Stackelberg leader strategy). With them it is a distribution over
    strategies: ``method="joint"`` optimises one LP over all best-response
    profiles; ``method="per_action"`` keeps a single profile, i.e. a single
    strategy inside every ``C_t``, and is only a lower bound.
    """
    ensure_valid(inst)
    _guard(inst)
    if method not in ("joint", "per_action"):
        raise ValueError(f"unknown method {method!r}")
    if inst.has_supplemental and method == "joint":
        return _type_independent_distribution(inst)
    T, A, d = inst.n_types, inst.n_actions, inst.dim
    alpha, beta = inst.agent_arrays()
    X = inst.strategy_space
    for t in range(T):
        if inst.supplemental_for(t) is not None:
            X = X.intersect(inst.supplemental_for(t))
    ub = _type_upper_bounds(inst, [X] * T)
    n = d + T
    xs = np.arange(d)
    blocks = {}
    for t in range(T):
        for a in range(A):
            rows, rhs = _epigraph_rows(inst.principal_utility[t][a], n, d + t, xs)
            for a2 in range(A):
                if a2 != a:
                    r = np.zeros(n)
                    r[xs] = alpha[t, a2] - alpha[t, a]
                    rows.append(r)
                    rhs.append(beta[t, a] - beta[t, a2])
            blocks[t, a] = (np.array(rows), np.array(rhs))
    lp = _AssignmentLP(inst, n, _poly_rows(X, n, slice(0, d)), blocks,
                       {t: d + t for t in range(T)})

    def relax(partial):
        sol = lp.solve(partial)
        if sol is None:
            return None
        return sol.objective_value, sol.primal[:d]

    (val, point, assign), explored = _branch_and_bound(inst, relax, ub)
    if point is None:
        raise NoMechanismError("no type-independent strategy satisfies the constraints")
    return ClassResult(val, point, assign, explored)


def _live_profiles(inst):
    """Profiles ``t -> a`` whose best-response region meets ``X``."""
    T, A, d = inst.n_types, inst.n_actions, inst.dim
    alpha, beta = inst.agent_arrays()
    X = inst.strategy_space
    live = []

    def feasible(partial):
        b = _LPBuilder(d)
        b.poly(slice(0, d), X)
        for t, a in enumerate(partial):
            for a2 in range(A):
                if a2 != a:
                    b.le(np.arange(d), alpha[t, a2] - alpha[t, a], beta[t, a] - beta[t, a2])
        return solve_lp(b.problem(np.zeros(d))).status is not LPStatus.INFEASIBLE

    def visit(partial):
        if not feasible(partial):
            return
        if len(partial) == T:
            live.append(tuple(partial))
            if len(live) > MAX_PROFILES:
                raise SizeGuardError(f"more than {MAX_PROFILES} best-response profiles")
            return
        for a in range(A):
            visit(partial + [a])

    visit([])
    return live


def _type_independent_distribution(inst):
    """Distribution over strategies shared by all types, one atom per profile."""
    T, A, d = inst.n_types, inst.n_actions, inst.dim
    alpha, beta = inst.agent_arrays()
    profiles = _live_profiles(inst)
    if not profiles:
        raise NoMechanismError("no best-response profile is feasible")
    H = homogenize(inst.strategy_space)
    P = len(profiles)
    block = d + 1 + T  # lam, z, u_t
    n = P * block
    b = _LPBuilder(n)
    c = np.zeros(n)
    for k, prof in enumerate(profiles):
        o = k * block
        lam, z = o, np.arange(o + 1, o + 1 + d)
        b.poly(slice(o, o + 1 + d), H)
        for t, a in enumerate(prof):
            u = o + 1 + d + t
            c[u] = inst.prior[t]
            for p in inst.principal_utility[t][a].pieces:
                b.le(np.r_[u, z, lam], np.r_[1.0, -p.coeffs, -p.offset], 0.0)
            for a2 in range(A):
                if a2 != a:
                    b.le(np.r_[z, lam], np.r_[alpha[t, a2] - alpha[t, a],
                                              beta[t, a2] - beta[t, a]], 0.0)
    r = np.zeros(n)
    r[np.arange(P) * block] = 1.0
    b.eq.append(r)
    b.eq_rhs.append(1.0)
    for t in range(T):
        C = inst.supplemental_for(t)
        if C is None:
            continue
        for rows, rhs, dest, dest_rhs in ((C.A_ub, C.b_ub, b.ub, b.ub_rhs),
                                          (C.A_eq, C.b_eq, b.eq, b.eq_rhs)):
            for row, v in zip(rows, rhs):
                r = np.zeros(n)
                for k in range(P):
                    r[k * block + 1:k * block + 1 + d] = row
                dest.append(r)
                dest_rhs.append(v)
    sol = solve_lp(b.problem(c))
    if sol.status is LPStatus.INFEASIBLE:
        raise NoMechanismError("no type-independent distribution meets the constraints")
    if sol.status is LPStatus.UNBOUNDED:
        raise UnboundedUtilityError("restricted-class objective is unbounded")
    atoms = []
    for k, prof in enumerate(profiles):
        lam = sol.primal[k * block]
        if lam > 1e-9:
            x = sol.primal[k * block + 1:k * block + 1 + d] / lam
            atoms.append((float(lam), x, prof))
    return ClassResult(sol.objective_value, atoms, explored=P,
                       extra={"profiles": P})


def no_information_value(p):
    """Sender value when every type acts on its prior belief.

    Ties in the receiver's best response are broken in the sender's favour.
    """
    total = 0.0
    for t in range(len(p.types)):
        mu = p.beliefs[t]
        v = mu @ p.receiver[t]
        u = mu @ p.sender[t]
        best = np.flatnonzero(v >= v.max() - 1e-12)
        total += p.type_dist[t] * u[best].max()
    return float(total)


def information_value(s, t=0):
    """Full-information minus no-information payoff of buyer type ``t``."""
    v = s.buyer[t]
    full = float(s.prior @ v.max(axis=1))
    none = float((s.prior @ v).max())
    return full - none


# ---------------------------------------------------------------------------
# graphs and the Stackelberg hardness family


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on nodes ``0..n-1``."""

    n: int
    edges: tuple

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("graph needs at least one node")
        edges = set()
        for u, v in self.edges:
            u, v = int(u), int(v)
            if u == v or not (0 <= u < self.n and 0 <= v < self.n):
                raise DomainError(f"bad edge ({u}, {v})")
            edges.add((min(u, v), max(u, v)))
        object.__setattr__(self, "edges", tuple(sorted(edges)))

    def neighbours(self, v):
        return [b if a == v else a for a, b in self.edges if v in (a, b)]

    def masks(self):
        m = [0] * self.n
        for u, v in self.edges:
            m[u] |= 1 << v
            m[v] |= 1 << u
        return m

    def is_independent(self, nodes):
        s = set(nodes)
        return not any(u in s and v in s for u, v in self.edges)


def graph_catalog(n):
    """All simple graphs on ``n`` nodes up to isomorphism (small ``n`` only)."""
    pairs = list(itertools.combinations(range(n), 2))
    perms = list(itertools.permutations(range(n)))
    seen = set()
    out = []
    for bits in range(1 << len(pairs)):
        edges = [pairs[i] for i in range(len(pairs)) if bits >> i & 1]
        canon = min(
            tuple(sorted(tuple(sorted((p[u], p[v]))) for u, v in edges)) for p in perms)
        if canon not in seen:
            seen.add(canon)
            out.append(Graph(n, canon))
    return out


def random_graph(n, p, rng):
    edges = [(u, v) for u, v in itertools.combinations(range(n), 2) if rng.random() < p]
    return Graph(n, tuple(edges))


def gen_stackelberg_hardness(graph):
    """Bayesian Stackelberg game whose best type-dependent policy encodes MIS.

    One follower type per node ``v`` (uniform prior), leader actions
    ``a_v, b_v`` and follower actions ``1F, 2F, 3F``. The leader earns 1 iff
    the follower plays ``1F``.
    """
    K = graph.n
    d = 2 * K
    follower = np.zeros((K, d, 3))
    leader = np.zeros((K, d, 3))
    leader[:, :, 0] = 1.0
    for v in range(K):
        follower[v, :K] = (0.0, 0.0, 0.1)
        follower[v, K:] = (0.0, 0.0, 0.1)
        for w in graph.neighbours(v):
            follower[v, w] = (0.5, 0.0, 1.0)
        follower[v, v] = (0.1, 0.1, 0.1)
        follower[v, K + v] = (0.0, 1.0, 1.0)
    names = tuple(f"a{v}" for v in range(K)) + tuple(f"b{v}" for v in range(K))
    return StackelbergInstance(leader, follower, np.full(K, 1.0 / K),
                               types=tuple(f"v{v}" for v in range(K)),
                               actions=("1F", "2F", "3F"), leader_actions=names)


# ---------------------------------------------------------------------------
# random instances


def random_pa_instance(rng, n_types, n_actions, dim, space="simplex", pieces=2,
                       supplemental=False):
    """Random instance with Gaussian utilities on a compact or conic space."""
    if space == "simplex":
        X = Polyhedron.simplex(dim)
    elif space == "box":
        X = Polyhedron.box(np.zeros(dim), np.ones(dim))
    elif space == "orthant":
        X = Polyhedron.nonneg_orthant(dim)
    else:
        raise ValueError(f"unknown space {space!r}")
    U = [[ConcavePWL([AffineForm(rng.normal(size=dim), rng.normal())
                      for _ in range(int(rng.integers(1, pieces + 1)))])
          for _ in range(n_actions)] for _ in range(n_types)]
    V = [[AffineForm(rng.normal(size=dim), rng.normal()) for _ in range(n_actions)]
         for _ in range(n_types)]
    prior = rng.dirichlet(np.ones(n_types))
    C = None
    if supplemental:
        # a nonempty slab around a random point of X
        C = []
        for t in range(n_types):
            y = rng.dirichlet(np.ones(dim)) if space == "simplex" else rng.random(dim)
            g = rng.normal(size=dim)
            C.append(Polyhedron(dim, np.vstack([g, -g]),
                                [g @ y + 0.1, -(g @ y) + 0.1]))
    return PAInstance(list(range(n_types)), list(range(n_actions)), prior, dim, X, U, V,
                      supplemental=C, name="random")
