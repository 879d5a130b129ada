import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from pa_coord.applications import Graph, gen_stackelberg_hardness, stackelberg_to_pa
from pa_coord.model import (
    AffineForm,
    ConcavePWL,
    DomainError,
    PAInstance,
    Polyhedron,
    SuccinctMechanism,
    best_response,
    check_ic,
    check_structure,
    eval_principal,
    validate_instance,
)

finite = st.floats(-10, 10, allow_nan=False)


def two_by_two(prior=(0.5, 0.5), space=None):
    space = space or Polyhedron.simplex(2)
    U = [[ConcavePWL.affine([1.0, 0.0]), ConcavePWL.affine([0.0, 1.0])]] * 2
    V = [[AffineForm([1.0, 0.0]), AffineForm([0.0, 1.0])]] * 2
    return PAInstance(["t1", "t2"], ["a1", "a2"], prior, 2, space, U, V)


def test_valid_instance_ok():
    assert validate_instance(two_by_two()).ok


def test_prior_normalisation_flagged():
    rep = validate_instance(two_by_two(prior=(0.6, 0.6)))
    assert not rep.ok
    assert any("prior sums to 1.2" in p for p in rep.problems)


def test_empty_strategy_space_flagged():
    X = Polyhedron(1, [[1.0], [-1.0]], [-1.0, 0.0])
    inst = PAInstance(["t"], ["a"], [1.0], 1, X, [[ConcavePWL.affine([1.0])]],
                      [[AffineForm([0.0])]])
    assert "empty strategy space" in validate_instance(inst).problems


def test_dimension_mismatch_flagged():
    inst = PAInstance(["t"], ["a"], [1.0], 2, Polyhedron.simplex(2),
                      [[ConcavePWL.affine([1.0])]], [[AffineForm([0.0, 0.0])]])
    assert not validate_instance(inst).ok


def test_empty_supplemental_flagged():
    inst = two_by_two()
    C = Polyhedron(2, [[1.0, 0.0], [-1.0, 0.0]], [-1.0, 0.0])
    from dataclasses import replace
    rep = validate_instance(replace(inst, supplemental=(None, C)))
    assert any("empty" in p for p in rep.problems)


def test_best_response_single_action():
    inst = PAInstance(["t"], ["a0"], [1.0], 2, Polyhedron.simplex(2),
                      [[ConcavePWL.affine([0.0, 0.0])]], [[AffineForm([2.0, 3.0], 1.0)]])
    assert best_response(inst, [0.3, 0.7], 0) == (0, pytest.approx(3.7))


def test_best_response_dominant_and_tie():
    inst = two_by_two()
    assert best_response(inst, [1.0, 0.0], 0) == (0, 1.0)
    assert best_response(inst, [0.5, 0.5], 0) == (0, 0.5)


def test_best_response_outside_space():
    with pytest.raises(DomainError):
        best_response(two_by_two(), [2.0, 0.0], 0)


def test_check_ic_vacuous():
    inst = PAInstance(["t"], ["a"], [1.0], 2, Polyhedron.simplex(2),
                      [[ConcavePWL.affine([1.0, 0.0])]], [[AffineForm([1.0, -1.0])]])
    rep = check_ic(inst, SuccinctMechanism(np.ones((1, 1)), np.array([[[1.0, 0.0]]])))
    assert rep.feasible and rep.worst_violation == 0.0


def _table4_mechanism(graph, chosen):
    K = graph.n
    probs = np.zeros((K, 3))
    strat = np.zeros((K, 3, 2 * K))
    for v in range(K):
        if v in chosen:
            probs[v, 0] = 1.0
            strat[v, 0, v] = 1.0
        else:
            probs[v, 1] = 1.0
            strat[v, 1, K + v] = 1.0
    return SuccinctMechanism(probs, strat)


def test_check_ic_table4_independent_set():
    g = Graph(4, ((0, 1), (1, 2), (2, 3)))
    inst = stackelberg_to_pa(gen_stackelberg_hardness(g))
    rep = check_ic(inst, _table4_mechanism(g, {0, 2}))
    assert rep.feasible
    assert eval_principal(inst, _table4_mechanism(g, {0, 2})) == pytest.approx(0.5)


def test_check_ic_table4_edge_violation():
    g = Graph(4, ((0, 1), (1, 2), (2, 3)))
    inst = stackelberg_to_pa(gen_stackelberg_hardness(g))
    rep = check_ic(inst, _table4_mechanism(g, {0, 1}))
    assert not rep.feasible
    # type 0 reporting its neighbour 1 gets 1 instead of 0.1
    assert rep.worst_violation == pytest.approx(0.9)
    assert ("v0", "v1", pytest.approx(0.9)) in rep.violating_triplets


def test_eval_principal_examples():
    inst = PAInstance(["t"], ["a0"], [1.0], 2, Polyhedron.simplex(2),
                      [[ConcavePWL.affine([1.0, 0.0])]], [[AffineForm([0.0, 0.0])]])
    mech = SuccinctMechanism(np.ones((1, 1)), np.array([[[1.0, 0.0]]]))
    assert eval_principal(inst, mech) == 1.0
    inst2 = PAInstance(["t1", "t2"], ["a"], [0.5, 0.5], 1, Polyhedron.box([0], [1]),
                       [[ConcavePWL.affine([0.0], 2.0)], [ConcavePWL.affine([0.0], 4.0)]],
                       [[AffineForm([0.0])], [AffineForm([0.0])]])
    mech2 = SuccinctMechanism(np.ones((2, 1)), np.zeros((2, 1, 1)))
    assert eval_principal(inst2, mech2) == 3.0


def test_check_structure():
    inst = two_by_two()
    good = SuccinctMechanism(np.array([[1.0, 0.0], [0.5, 0.5]]),
                             np.array([[[1, 0], [0, 1]], [[1, 0], [0, 1]]], dtype=float))
    assert check_structure(inst, good) == []
    bad = SuccinctMechanism(np.array([[1.0, 0.2], [0.5, 0.5]]),
                            np.array([[[2, 0], [0, 1]], [[1, 0], [0, 1]]], dtype=float))
    assert len(check_structure(inst, bad)) == 2


def test_concave_pwl_needs_pieces():
    with pytest.raises(ValueError):
        ConcavePWL(())


def test_polyhedron_rows_validated():
    with pytest.raises(ValueError):
        Polyhedron(2, [[1.0, 2.0, 3.0]], [1.0])


@settings(max_examples=100)
@given(arrays(float, 3, elements=finite), finite, arrays(float, 3, elements=finite),
       arrays(float, 3, elements=finite), st.floats(0, 1))
def test_affine_utility_is_affine(c, b, x, y, lam):
    f = AffineForm(c, b)
    lhs = f(lam * x + (1 - lam) * y)
    rhs = lam * f(x) + (1 - lam) * f(y)
    assert lhs == pytest.approx(rhs, abs=1e-9 * (1 + np.abs(c).sum() * 10))


@settings(max_examples=100)
@given(arrays(float, (4, 3), elements=finite), arrays(float, 4, elements=finite),
       st.lists(st.floats(0, 1), min_size=3, max_size=3).filter(lambda v: sum(v) > 0))
def test_best_response_dominates(C, b, w):
    x = np.array(w) / sum(w)
    V = [[AffineForm(C[a], b[a]) for a in range(4)]]
    U = [[ConcavePWL.affine(np.zeros(3))] * 4]
    inst = PAInstance(["t"], list(range(4)), [1.0], 3, Polyhedron.simplex(3), U, V)
    a, val = best_response(inst, x, 0)
    assert all(val >= inst.V(x, b2, 0) for b2 in range(4))
    assert all(inst.V(x, b2, 0) < val for b2 in range(a))


@settings(max_examples=60)
@given(st.integers(0, 10**6), st.floats(0, 1))
def test_eval_principal_linear_in_probs(seed, lam):
    rng = np.random.default_rng(seed)
    from pa_coord.applications import random_pa_instance
    inst = random_pa_instance(rng, 2, 3, 2)
    S = rng.dirichlet(np.ones(2), size=(2, 3))
    p, q = rng.dirichlet(np.ones(3), size=2), rng.dirichlet(np.ones(3), size=2)
    mix = eval_principal(inst, SuccinctMechanism(lam * p + (1 - lam) * q, S))
    sep = lam * eval_principal(inst, SuccinctMechanism(p, S)) + \
        (1 - lam) * eval_principal(inst, SuccinctMechanism(q, S))
    assert mix == pytest.approx(sep, abs=1e-9)


@settings(max_examples=40)
@given(st.integers(0, 10**6))
def test_ic_report_consistent(seed):
    rng = np.random.default_rng(seed)
    from pa_coord.applications import random_pa_instance
    inst = random_pa_instance(rng, 2, 2, 2)
    mech = SuccinctMechanism(rng.dirichlet(np.ones(2), size=2),
                             rng.dirichlet(np.ones(2), size=(2, 2)))
    rep = check_ic(inst, mech, 1e-6)
    assert rep.worst_violation >= 0
    assert rep.feasible == (rep.worst_violation <= 1e-6)
    assert rep.feasible == (not rep.violating_triplets)
