import itertools

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pa_coord.applications import (
    ContractInstance,
    Graph,
    SizeGuardError,
    contract_to_pa,
    random_graph,
    random_pa_instance,
)
from pa_coord.info_acquisition import (
    ZeroCost,
    partition_decision_problem,
    simplex_lattice,
    solve_info_acquisition,
)
from pa_coord.mechanism import NoMechanismError, solve_optimal_mechanism
from pa_coord.model import AffineForm, ConcavePWL, DomainError, PAInstance, Polyhedron
from pa_coord.oracles import (
    MAX_GRID_POINTS,
    GridSpec,
    bounding_box,
    brute_force_mis,
    exhaustive_mis,
    grid_concavify,
    grid_lipschitz,
    minimax_lp,
    myerson_grid_lp,
    simplex_cell_diameter,
    simplex_lipschitz,
    snap_box,
)

UNIT_BOX = GridSpec(0.1, box=((0.0, 1.0), (0.0, 1.0)))


# ---------------------------------------------------------------------------
# grids


def test_grid_counts():
    assert GridSpec(0.5, simplex=True).count(3) == 6
    assert len(GridSpec(0.5, simplex=True).points(3)) == 6
    assert UNIT_BOX.count(2) == 121
    pts = UNIT_BOX.points(2)
    assert pts.shape == (121, 2) and pts.min() == 0.0 and pts.max() == 1.0


def test_grid_rejects_bad_specs():
    with pytest.raises(ValueError):
        GridSpec(0.0, simplex=True)
    with pytest.raises(ValueError):
        GridSpec(0.1)
    with pytest.raises(ValueError):
        GridSpec(0.3, simplex=True).points(2)


def test_grid_cap():
    g = GridSpec(1e-3, box=((0.0, 1.0),) * 3)
    assert g.count(3) > MAX_GRID_POINTS
    with pytest.raises(SizeGuardError):
        g.points(3)


def test_bounding_box():
    np.testing.assert_allclose(bounding_box(Polyhedron.simplex(3)), [[0, 1]] * 3, atol=1e-12)
    assert bounding_box(Polyhedron.nonneg_orthant(2)) is None
    np.testing.assert_allclose(snap_box(((0.03, 0.92), (-0.2, -0.2)), 0.1),
                               [[0.0, 1.0], [-0.2, -0.1]], atol=1e-12)


def test_lipschitz_helpers():
    assert simplex_cell_diameter(3, 0.1) == pytest.approx(0.4)
    assert simplex_lipschitz([[1.0, 0.0], [3.0, 2.5]]) == pytest.approx(0.5)


# ---------------------------------------------------------------------------
# discretized mechanism LP


def test_grid_lp_trivial():
    inst = PAInstance(["t"], ["a"], [1.0], 2, Polyhedron.simplex(2),
                      [[ConcavePWL.affine([1.0, 0.0])]], [[AffineForm([0.0, 0.0])]])
    assert myerson_grid_lp(inst, GridSpec(0.5, simplex=True)) == pytest.approx(1.0)


@pytest.mark.parametrize("seed", range(8))
def test_grid_lp_sandwich(seed):
    inst = random_pa_instance(np.random.default_rng(seed), 2, 2, 2, space="box")
    step = 0.1
    grid = myerson_grid_lp(inst, UNIT_BOX)
    exact = solve_optimal_mechanism(inst).objective
    assert grid <= exact + 1e-8
    assert exact <= grid + grid_lipschitz(inst) * step + 1e-8


@pytest.mark.parametrize("seed", range(4))
def test_grid_refinement_monotone(seed):
    inst = random_pa_instance(np.random.default_rng(100 + seed), 2, 2, 2, space="box")
    coarse = myerson_grid_lp(inst, GridSpec(0.2, box=((0.0, 1.0),) * 2))
    fine = myerson_grid_lp(inst, GridSpec(0.1, box=((0.0, 1.0),) * 2))
    assert fine >= coarse - 1e-9


@pytest.mark.parametrize("seed", range(21, 30))
def test_grid_lp_supplemental(seed):
    inst = random_pa_instance(np.random.default_rng(seed), 2, 2, 2, space="simplex",
                              supplemental=True)
    step = 0.01
    try:
        exact = solve_optimal_mechanism(inst).objective
    except NoMechanismError:
        # the slabs clash with incentive constraints; the grid cannot do better
        with pytest.raises(DomainError):
            myerson_grid_lp(inst, GridSpec(step, simplex=True))
        return
    grid = myerson_grid_lp(inst, GridSpec(step, simplex=True))
    assert grid <= exact + 1e-8
    assert exact <= grid + grid_lipschitz(inst) * step + 1e-8


def test_capped_contract():
    c = ContractInstance(reward=[1.0, 0.2], outcome_dist=[[[0.8, 0.2], [0.3, 0.7]]],
                         cost=[[0.25, 0.0]], prior=[1.0])
    inst = contract_to_pa(c)
    B, step = 2.0, 0.05
    capped = PAInstance(inst.types, inst.actions, inst.prior, inst.dim,
                        inst.strategy_space.intersect(Polyhedron.box([0.0, 0.0], [B, B])),
                        inst.principal_utility, inst.agent_utility)
    exact = solve_optimal_mechanism(capped).objective
    grid = myerson_grid_lp(capped, GridSpec(step, box=((0.0, B),) * 2))
    assert grid <= exact + 1e-8
    assert exact <= grid + grid_lipschitz(capped) * step + 1e-8
    # pay 0.5 on the high outcome: 0.8 * 0.5 - 0.25 = 0.2 * 0.5, principal 0.64 - 0.5 * 0.8
    assert exact == pytest.approx(0.84 - 0.4, abs=1e-8)


def test_grid_lp_empty_intersection():
    X = Polyhedron.box([0.33], [0.34])
    inst = PAInstance(["t"], ["a"], [1.0], 1, X, [[ConcavePWL.affine([1.0])]],
                      [[AffineForm([0.0])]])
    with pytest.raises(DomainError):
        myerson_grid_lp(inst, GridSpec(0.5, box=((0.0, 1.0),)))


# ---------------------------------------------------------------------------
# concavification


def test_concavify_affine():
    w = np.array([0.3, -1.2, 2.0])
    f = np.array([0.2, 0.3, 0.5])
    v = grid_concavify(lambda S: S @ w + 0.4, f, GridSpec(0.1, simplex=True))
    assert v == pytest.approx(f @ w + 0.4, abs=1e-10)


def test_concavify_convex_is_full_revelation():
    u = np.random.default_rng(0).normal(size=(3, 3))
    f = np.array([0.1, 0.6, 0.3])
    v = grid_concavify(lambda S: (S @ u.T).max(axis=1), f, GridSpec(0.1, simplex=True))
    assert v == pytest.approx(f @ u.max(axis=0), abs=1e-10)


def test_concavify_matches_solver():
    rng = np.random.default_rng(1)
    u = rng.normal(size=(4, 3))
    f = np.array([0.25, 0.35, 0.4])
    step = 0.05
    exact = solve_info_acquisition(partition_decision_problem(u), ZeroCost(), f).value
    ref = grid_concavify(lambda S: (S @ u.T).max(axis=1), f, GridSpec(step, simplex=True))
    tol = simplex_lipschitz(u) * simplex_cell_diameter(3, step)
    assert ref <= exact + 1e-8
    assert exact <= ref + tol


def test_concavify_refinement_monotone():
    rng = np.random.default_rng(2)
    u = rng.normal(size=(3, 3))
    phi = lambda S: (S @ u.T).max(axis=1) - 2.0 * (S ** 2).sum(axis=1)
    f = np.array([0.2, 0.4, 0.4])
    coarse = grid_concavify(phi, f, GridSpec(0.2, simplex=True))
    fine = grid_concavify(phi, f, GridSpec(0.1, simplex=True))
    assert fine >= coarse - 1e-10


def test_concavify_errors():
    with pytest.raises(DomainError):
        grid_concavify(lambda S: S[:, 0], [0.6, 0.6], GridSpec(0.5, simplex=True))
    with pytest.raises(ValueError):
        grid_concavify(lambda S: S[:, 0], [0.5, 0.5], UNIT_BOX)


# ---------------------------------------------------------------------------
# MIS


def test_mis_examples():
    assert brute_force_mis(Graph(6, ())) == 6
    assert brute_force_mis(Graph(4, tuple(itertools.combinations(range(4), 2)))) == 1
    assert brute_force_mis(Graph(5, tuple((i, (i + 1) % 5) for i in range(5)))) == 2


def test_mis_cap():
    with pytest.raises(SizeGuardError):
        brute_force_mis(Graph(25, ()))
    with pytest.raises(SizeGuardError):
        exhaustive_mis(Graph(17, ()))


def _nx_mis(g):
    G = nx.Graph()
    G.add_nodes_from(range(g.n))
    G.add_edges_from(g.edges)
    # largest clique of the complement
    return max(len(c) for c in nx.find_cliques(nx.complement(G)))


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 12), p=st.floats(0.0, 1.0))
def test_mis_agrees_with_references(seed, n, p):
    g = random_graph(n, p, np.random.default_rng(seed))
    m = brute_force_mis(g)
    assert m == exhaustive_mis(g) == _nx_mis(g)


def test_mis_larger_graphs_against_networkx():
    rng = np.random.default_rng(3)
    for n in (18, 22, 24):
        g = random_graph(n, 0.25, rng)
        assert brute_force_mis(g) == _nx_mis(g)


# ---------------------------------------------------------------------------
# zero-sum games


def test_minimax_examples():
    assert minimax_lp([[1, -1], [-1, 1]]) == pytest.approx(0.0, abs=1e-12)
    assert minimax_lp(np.full((3, 4), 2.5)) == pytest.approx(2.5)


@pytest.mark.parametrize("seed", range(5))
def test_minimax_against_grid(seed):
    M = np.random.default_rng(seed).normal(size=(2, 3))
    p = np.linspace(0, 1, 1001)
    P = np.stack([p, 1 - p], axis=1)
    brute = (P @ M).min(axis=1).max()
    assert abs(minimax_lp(M) - brute) <= 0.002
    assert minimax_lp(M) >= brute - 1e-12


def test_simplex_lattice_is_grid():
    pts = simplex_lattice(3, 4)
    assert len(pts) == 15
    np.testing.assert_allclose(pts.sum(axis=1), 1.0)
    assert len({tuple(r) for r in (pts * 4).round().astype(int)}) == 15
