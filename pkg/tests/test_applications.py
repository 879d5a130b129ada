from dataclasses import replace

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pa_coord.applications import (
    ContractInstance,
    Graph,
    PersuasionInstance,
    SellingInfoInstance,
    SizeGuardError,
    StackelbergInstance,
    contract_to_pa,
    gen_stackelberg_hardness,
    graph_catalog,
    information_value,
    no_information_value,
    persuasion_to_pa,
    random_graph,
    random_pa_instance,
    selling_info_to_pa,
    solve_action_independent,
    solve_type_independent,
    stackelberg_to_pa,
)
from pa_coord.mechanism import NoMechanismError, UnboundedUtilityError, solve_optimal_mechanism
from pa_coord.model import DomainError, Polyhedron
from pa_coord.oracles import brute_force_mis, grid_concavify, GridSpec, minimax_lp


def example_contract():
    return ContractInstance([1.0, 0.0], [[[1.0, 0.0], [0.0, 1.0]]], [[0.4, 0.0]], [1.0])


def opposed_persuasion(mu=(0.7, 0.3)):
    return PersuasionInstance.common_prior(mu, [1.0], [[[0.0, 1.0], [0.0, 1.0]]],
                                           [[[1.0, 0.0], [0.0, 1.0]]])


def random_persuasion(rng, T, d, A, common=False):
    beliefs = rng.dirichlet(np.ones(d), size=T)
    if common:
        beliefs[:] = beliefs[0]
    return PersuasionInstance(beliefs, rng.dirichlet(np.ones(T)), rng.normal(size=(T, d, A)),
                              rng.normal(size=(T, d, A)))


# validation -----------------------------------------------------------------

def test_contract_validation():
    with pytest.raises(DomainError):
        ContractInstance([1.0, 0.0], [[[0.6, 0.6]]], [[0.0]], [1.0])
    with pytest.raises(DomainError):
        ContractInstance([np.inf, 0.0], [[[0.5, 0.5]]], [[0.0]], [1.0])


def test_persuasion_validation():
    with pytest.raises(DomainError):
        PersuasionInstance([[0.5, 0.6]], [1.0], np.zeros((1, 2, 2)), np.zeros((1, 2, 2)))


# reductions -----------------------------------------------------------------

def test_contract_utilities():
    c = ContractInstance([1.0, 0.0], [[[0.5, 0.5]]], [[0.2]], [1.0])
    inst = contract_to_pa(c)
    assert inst.U([0.0, 0.0], 0, 0) == pytest.approx(0.5)
    assert inst.U([1.0, 0.0], 0, 0) == pytest.approx(0.0)
    assert inst.V([1.0, 0.0], 0, 0) == pytest.approx(0.5 - 0.2)
    assert inst.supplemental is None and not inst.strategy_space.is_bounded()


@settings(max_examples=50)
@given(st.integers(0, 10**6))
def test_reductions_match_closed_forms(seed):
    rng = np.random.default_rng(seed)
    T, A, d = 2, 3, 3
    c = ContractInstance(rng.normal(size=d), rng.dirichlet(np.ones(d), size=(T, A)),
                         rng.random((T, A)), rng.dirichlet(np.ones(T)))
    p = random_persuasion(rng, T, d, A)
    s = StackelbergInstance(rng.normal(size=(T, d, A)), rng.normal(size=(T, d, A)),
                            rng.dirichlet(np.ones(T)))
    b = SellingInfoInstance(rng.dirichlet(np.ones(d)), rng.dirichlet(np.ones(T)),
                            rng.normal(size=(T, d, A)))
    x = rng.exponential(size=d)
    sig = rng.dirichlet(np.ones(d))
    price = rng.exponential()
    ci, pi, si, bi = contract_to_pa(c), persuasion_to_pa(p), stackelberg_to_pa(s), selling_info_to_pa(b)
    for t in range(T):
        for a in range(A):
            P = c.outcome_dist[t, a]
            assert ci.U(x, a, t) == pytest.approx(P @ (c.reward - x), abs=1e-12)
            assert ci.V(x, a, t) == pytest.approx(P @ x - c.cost[t, a], abs=1e-12)
            assert pi.U(sig, a, t) == pytest.approx(sig @ p.sender[t][:, a], abs=1e-12)
            assert pi.V(sig, a, t) == pytest.approx(sig @ p.receiver[t][:, a], abs=1e-12)
            assert si.U(sig, a, t) == pytest.approx(sig @ s.leader[t][:, a], abs=1e-12)
            assert si.V(sig, a, t) == pytest.approx(sig @ s.follower[t][:, a], abs=1e-12)
            y = np.r_[sig, price]
            assert bi.U(y, a, t) == pytest.approx(price, abs=1e-12)
            assert bi.V(y, a, t) == pytest.approx(sig @ b.buyer[t][:, a] - price, abs=1e-12)
        assert pi.supplemental[t].contains(p.beliefs[t])


# contracts --------------------------------------------------------------------

def test_contract_example_against_grid():
    res = solve_optimal_mechanism(contract_to_pa(example_contract()))
    assert res.objective == pytest.approx(0.6)
    # brute force over x1 in [0, 1] with x2 = 0; the agent works iff x1 >= 0.4
    best = max((1.0 - x1) if x1 - 0.4 >= -1e-12 else 0.0 for x1 in np.linspace(0, 1, 101))
    assert res.objective == pytest.approx(best)
    a = int(np.argmax(res.mechanism.probs[0]))
    assert a == 0 and res.mechanism.strategies[0, 0, 0] == pytest.approx(0.4)


# persuasion ----------------------------------------------------------------

def test_persuasion_example():
    p = opposed_persuasion()
    res = solve_optimal_mechanism(persuasion_to_pa(p))
    assert res.objective == pytest.approx(0.6)
    m = res.mechanism
    assert m.probs[0] == pytest.approx([0.4, 0.6])
    assert m.strategies[0, 0] == pytest.approx([1.0, 0.0])
    assert m.strategies[0, 1] == pytest.approx([0.5, 0.5])

    def phi(P):
        # receiver picks a2 iff P(w2) >= 1/2, ties toward the sender
        return (P[:, 1] >= 0.5 - 1e-12).astype(float)

    assert grid_concavify(phi, [0.7, 0.3], GridSpec(0.01, simplex=True)) == pytest.approx(0.6)


def test_persuasion_state_independent_receiver():
    rng = np.random.default_rng(4)
    sender = rng.normal(size=(1, 3, 3))
    receiver = np.tile([0.2, 0.9, 0.1], (1, 3, 1))
    p = PersuasionInstance.common_prior([0.2, 0.5, 0.3], [1.0], sender, receiver)
    res = solve_optimal_mechanism(persuasion_to_pa(p))
    assert res.objective == pytest.approx(p.beliefs[0] @ sender[0][:, 1])
    assert res.objective == pytest.approx(no_information_value(p))


@pytest.mark.parametrize("seed", range(8))
def test_persuasion_action_independent_is_no_information(seed):
    rng = np.random.default_rng(seed)
    p = random_persuasion(rng, 3, 3, 3, common=True)
    v = solve_action_independent(persuasion_to_pa(p)).value
    assert v == pytest.approx(no_information_value(p), abs=1e-9)


# Stackelberg ----------------------------------------------------------------

def test_single_follower_action():
    rng = np.random.default_rng(0)
    s = StackelbergInstance(rng.normal(size=(2, 3, 1)), rng.normal(size=(2, 3, 1)), [0.3, 0.7])
    res = solve_optimal_mechanism(stackelberg_to_pa(s))
    assert res.objective == pytest.approx(0.3 * s.leader[0].max() + 0.7 * s.leader[1].max())


def test_matching_pennies():
    L = np.array([[1.0, -1.0], [-1.0, 1.0]])
    s = StackelbergInstance([L], [-L], [1.0])
    assert solve_optimal_mechanism(stackelberg_to_pa(s)).objective == pytest.approx(0.0, abs=1e-9)
    assert solve_type_independent(stackelberg_to_pa(s)).value == pytest.approx(minimax_lp(L))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6))
def test_zero_sum_value(seed):
    rng = np.random.default_rng(seed)
    L = rng.normal(size=(3, 3))
    inst = stackelberg_to_pa(StackelbergInstance([L], [-L], [1.0]))
    assert solve_optimal_mechanism(inst).objective == pytest.approx(minimax_lp(L), abs=1e-7)


@pytest.mark.parametrize("graph, value", [
    (Graph(1, ()), 1.0),
    (Graph(2, ((0, 1),)), 0.5),
    (Graph(3, ((0, 1), (1, 2), (0, 2))), 1.0 / 3.0),
])
def test_hardness_small_graphs(graph, value):
    inst = stackelberg_to_pa(gen_stackelberg_hardness(graph))
    ai = solve_action_independent(inst)
    assert ai.value == pytest.approx(value, abs=1e-9)
    assert solve_optimal_mechanism(inst).objective >= ai.value - 1e-9
    assert solve_type_independent(inst).value <= ai.value + 1e-9


@pytest.mark.parametrize("n", [2, 3, 4])
def test_hardness_catalog(n):
    for g in graph_catalog(n):
        inst = stackelberg_to_pa(gen_stackelberg_hardness(g))
        assert n * solve_action_independent(inst).value == pytest.approx(brute_force_mis(g), abs=1e-6)


def test_graph_catalog_matches_atlas():
    atlas = nx.graph_atlas_g()
    for n in range(1, 6):
        assert len(graph_catalog(n)) == sum(1 for g in atlas if g.number_of_nodes() == n)


def test_graph_validation():
    with pytest.raises(DomainError):
        Graph(2, ((0, 0),))
    assert Graph(3, ((1, 0), (0, 1))).edges == ((0, 1),)


# selling information -----------------------------------------------------------

def test_selling_state_independent_buyer():
    buyer = np.tile([[0.3, 0.8]], (1, 2, 1))
    s = SellingInfoInstance([0.4, 0.6], [1.0], buyer, outside_option=True)
    assert solve_optimal_mechanism(selling_info_to_pa(s)).objective == pytest.approx(0.0, abs=1e-9)
    with pytest.raises(UnboundedUtilityError):
        solve_optimal_mechanism(selling_info_to_pa(replace(s, outside_option=False)))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6))
def test_selling_single_type_extracts_information_value(seed):
    rng = np.random.default_rng(seed)
    s = SellingInfoInstance(rng.dirichlet(np.ones(3)), [1.0], rng.normal(size=(1, 3, 3)),
                            outside_option=True)
    rev = solve_optimal_mechanism(selling_info_to_pa(s)).objective
    assert rev == pytest.approx(information_value(s), abs=1e-7)


def test_selling_price_pinned_to_zero():
    s = SellingInfoInstance([0.5, 0.5], [1.0], [[[1.0, 0.0], [0.0, 1.0]]], outside_option=True)
    inst = selling_info_to_pa(s)
    zero = Polyhedron(3, None, None, [[0.0, 0.0, 1.0]], [0.0])
    inst = replace(inst, strategy_space=inst.strategy_space.intersect(zero))
    assert solve_optimal_mechanism(inst).objective == pytest.approx(0.0, abs=1e-9)


# restricted classes ------------------------------------------------------------

@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6), st.booleans())
def test_class_ordering(seed, supplemental):
    rng = np.random.default_rng(seed)
    inst = random_pa_instance(rng, 2, 2, 2, space="box", supplemental=supplemental)
    try:
        general = solve_optimal_mechanism(inst).objective
    except NoMechanismError:
        return
    for solver in (solve_action_independent, solve_type_independent):
        try:
            assert solver(inst).value <= general + 1e-6
        except NoMechanismError:
            pass


@pytest.mark.parametrize("seed", range(5))
def test_single_type_classes_coincide(seed):
    inst = random_pa_instance(np.random.default_rng(seed), 1, 3, 2)
    g = solve_optimal_mechanism(inst).objective
    ti = solve_type_independent(inst).value
    ai = solve_action_independent(inst).value
    assert ti == pytest.approx(g, abs=1e-8) and ai == pytest.approx(ti, abs=1e-8)


@pytest.mark.parametrize("seed", range(5))
def test_public_signaling_joint_dominates_per_action(seed):
    p = random_persuasion(np.random.default_rng(seed), 2, 3, 3, common=True)
    inst = persuasion_to_pa(p)
    joint = solve_type_independent(inst)
    single = solve_type_independent(inst, method="per_action")
    general = solve_optimal_mechanism(inst).objective
    assert single.value <= joint.value + 1e-9 <= general + 2e-9
    # the atoms form a Bayes-plausible split of the common prior
    mean = sum(w * x for w, x, _ in joint.strategies)
    assert mean == pytest.approx(p.beliefs[0], abs=1e-8)
    assert sum(w for w, _, _ in joint.strategies) == pytest.approx(1.0)


def test_action_independent_strategies_feasible():
    inst = random_pa_instance(np.random.default_rng(3), 3, 2, 2, space="box")
    res = solve_action_independent(inst)
    value, strategies = res
    assert value == res.value and strategies.shape == (3, 2)
    for t, x in enumerate(strategies):
        assert inst.strategy_space.contains(x)
        a = res.assignment[t]
        assert inst.V(x, a, t) >= max(inst.V(y, b, t) for y in strategies for b in range(2)) - 1e-7


def test_size_guard():
    inst = random_pa_instance(np.random.default_rng(0), 11, 4, 1, space="box")
    with pytest.raises(SizeGuardError):
        solve_type_independent(inst)
    with pytest.raises(SizeGuardError):
        solve_action_independent(inst)


def test_random_graph_reproducible():
    a = random_graph(8, 0.4, np.random.default_rng(1))
    b = random_graph(8, 0.4, np.random.default_rng(1))
    assert a == b
