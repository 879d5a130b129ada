"""Regenerate the JSON fixtures in this directory.

    python fixtures/build_fixtures.py
"""

from pathlib import Path

import numpy as np

from pa_coord import schema
from pa_coord.applications import (
    ContractInstance,
    Graph,
    PersuasionInstance,
    SellingInfoInstance,
    StackelbergInstance,
    random_pa_instance,
)
from pa_coord.info_acquisition import PiecewiseConvexCost
from pa_coord.model import AffineForm, ConcavePWL, ConvexPWL, PAInstance, Polyhedron

HERE = Path(__file__).resolve().parent


def fixtures():
    yield "pa_trivial", PAInstance(
        ["t"], ["a"], [1.0], 2, Polyhedron.simplex(2),
        [[ConcavePWL.affine([1.0, 0.0])]], [[AffineForm([0.0, 0.0])]], name="trivial")

    yield "pa_compact", random_pa_instance(np.random.default_rng(7), 2, 2, 2, space="box")

    # 4 ** 11 type-to-action assignments, beyond the enumeration guard
    T, A = 11, 4
    rng = np.random.default_rng(1)
    yield "pa_oversized", PAInstance(
        list(range(T)), list(range(A)), np.full(T, 1.0 / T), 1, Polyhedron.box([0.0], [1.0]),
        [[ConcavePWL.affine(rng.normal(size=1).round(3)) for _ in range(A)] for _ in range(T)],
        [[AffineForm(rng.normal(size=1).round(3), round(float(rng.normal()), 3))
          for _ in range(A)] for _ in range(T)],
        name="oversized")

    yield "contract", ContractInstance(
        reward=[1.0, 0.0], outcome_dist=[[[1.0, 0.0], [0.0, 1.0]]], cost=[[0.4, 0.0]],
        prior=[1.0], types=["agent"], actions=["work", "shirk"])

    yield "contract_irregular", ContractInstance(
        reward=[0.8, 2.4, -0.7],
        outcome_dist=[[[0.99, 0.01, 0.0], [0.17, 0.83, 0.0], [0.39, 0.01, 0.6]],
                      [[0.82, 0.18, 0.0], [0.2, 0.8, 0.0], [0.86, 0.14, 0.0]]],
        cost=[[0.0, 0.9, 0.4], [0.0, 0.17, 0.46]],
        prior=[0.45, 0.55], types=["low", "high"], actions=["shirk", "work", "special"])

    yield "persuasion", PersuasionInstance(
        beliefs=[[0.7, 0.3]], type_dist=[1.0],
        sender=[[[0.0, 1.0], [0.0, 1.0]]], receiver=[[[1.0, 0.0], [0.0, 1.0]]],
        types=["receiver"], actions=["a1", "a2"])

    yield "stackelberg", StackelbergInstance(
        leader=[[[1.0, -1.0], [-1.0, 1.0]]], follower=[[[-1.0, 1.0], [1.0, -1.0]]],
        prior=[1.0], types=["follower"], actions=["heads", "tails"],
        leader_actions=["heads", "tails"])

    yield "selling_info", SellingInfoInstance(
        prior=[0.5, 0.5], type_dist=[1.0], buyer=[[[1.0, 0.0], [0.0, 1.0]]],
        types=["buyer"], actions=["a1", "a2"], outside_option=True)

    yield "decision", schema.DecisionProblem(
        utility=[[1.0, 0.0], [0.0, 1.0]], prior=[0.5, 0.5], actions=["a1", "a2"])

    yield "graph", Graph(5, tuple((i, (i + 1) % 5) for i in range(5)))

    # |2 s1 - 1| - 1/2 on the 2-state simplex
    yield "pwl_cost", PiecewiseConvexCost(ConvexPWL((
        AffineForm([2.0, 0.0], -1.5), AffineForm([-2.0, 0.0], 0.5), AffineForm([0.0, 0.0]))))


def main():
    for name, obj in fixtures():
        (HERE / f"{name}.json").write_text(schema.serialize(obj), encoding="utf-8")
        print(name)


if __name__ == "__main__":
    main()
