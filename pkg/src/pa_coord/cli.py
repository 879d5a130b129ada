"""``pa-coord``: batch front end for the solvers and oracles.

Exit codes: 0 success, 1 bad input, 2 infeasible, 3 unbounded, 4 size guard,
5 a verification that ran but did not pass.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from dataclasses import replace

import numpy as np

from . import schema
from .applications import (
    SizeGuardError,
    contract_to_pa,
    gen_stackelberg_hardness,
    persuasion_to_pa,
    selling_info_to_pa,
    solve_action_independent,
    solve_type_independent,
    stackelberg_to_pa,
)
from .info_acquisition import (
    EntropyApprox,
    PiecewiseConvexCost,
    ZeroCost,
    partition_costly_persuasion,
    partition_decision_problem,
    solve_info_acquisition,
)
from .lp import LPError
from .mechanism import NoMechanismError, UnboundedUtilityError, solve_optimal_mechanism
from .model import DomainError, Polyhedron, SuccinctMechanism, check_ic, eval_principal
from .oracles import (
    GridSpec,
    bounding_box,
    brute_force_mis,
    grid_lipschitz,
    myerson_grid_lp,
    snap_box,
)

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE, EXIT_UNBOUNDED, EXIT_GUARD, EXIT_FAIL = range(6)

_TO_PA = {
    "pa": lambda x: x,
    "contract": contract_to_pa,
    "persuasion": persuasion_to_pa,
    "stackelberg": stackelberg_to_pa,
    "selling_info": selling_info_to_pa,
    "graph": lambda g: stackelberg_to_pa(gen_stackelberg_hardness(g)),
}


class UsageError(ValueError):
    pass


def _as_pa(kind, obj):
    if kind not in _TO_PA:
        raise UsageError(f"kind {kind!r} does not describe a principal-agent instance")
    return _TO_PA[kind](obj)


def _labels(seq):
    return [x if isinstance(x, (str, int)) else str(x) for x in seq]


def _mechanism_payload(inst, mech):
    return {
        "types": _labels(inst.types),
        "actions": _labels(inst.actions),
        "probs": mech.probs.tolist(),
        "strategies": mech.strategies.tolist(),
    }


def _posterior_menu(inst, mech, beliefs):
    menu, worst = [], 0.0
    for t in range(inst.n_types):
        entries = [{"action": _labels(inst.actions)[a], "prob": float(mech.probs[t, a]),
                    "posterior": mech.strategies[t, a].tolist()}
                   for a in range(inst.n_actions) if mech.probs[t, a] > 0.0]
        mean = mech.probs[t] @ mech.strategies[t]
        res = float(np.abs(mean - beliefs[t]).max())
        worst = max(worst, res)
        menu.append({"type": _labels(inst.types)[t], "signals": entries,
                     "plausibility_residual": res})
    return menu, worst


# ---------------------------------------------------------------------------
# commands


def cmd_solve(args):
    kind, obj = schema.load(args.path)
    inst = _as_pa(kind, obj)
    t0 = time.perf_counter()
    out = {"command": "solve", "kind": kind, "class": args.mclass}
    if args.mclass == "general":
        res = solve_optimal_mechanism(inst, epsilon=args.epsilon)
        out.update(
            objective=res.objective,
            closure_objective=res.closure_objective,
            regular=res.regular,
            epsilon_used=res.epsilon_used,
            repaired_pairs=[[_labels(inst.actions)[a], _labels(inst.types)[t]]
                            for a, t in res.repaired_pairs],
            pinned_pairs=[[_labels(inst.actions)[a], _labels(inst.types)[t]]
                          for a, t in res.pinned_pairs],
            additive_bound=res.additive_bound,
            mechanism=_mechanism_payload(inst, res.mechanism),
        )
        if kind == "persuasion":
            menu, worst = _posterior_menu(inst, res.mechanism, obj.beliefs)
            out["posterior_menu"] = menu
            out["plausibility_residual"] = worst
    elif args.mclass == "action-independent":
        res = solve_action_independent(inst)
        out.update(objective=res.value, strategies=np.asarray(res.strategies).tolist(),
                   assignment=[_labels(inst.actions)[a] for a in res.assignment])
    else:
        res = solve_type_independent(inst)
        if isinstance(res.strategies, list):
            out["distribution"] = [
                {"prob": p, "strategy": x.tolist(),
                 "profile": [_labels(inst.actions)[a] for a in prof]}
                for p, x, prof in res.strategies]
        else:
            out["strategy"] = np.asarray(res.strategies).tolist()
            out["assignment"] = [_labels(inst.actions)[a] for a in res.assignment]
        out["objective"] = res.value
    out["timing_s"] = time.perf_counter() - t0
    return EXIT_OK, out, f"objective {out['objective']:.10g}"


def _parse_cost(spec, dim):
    if spec == "zero":
        return ZeroCost()
    if spec.startswith("pwl:"):
        try:
            kind, cost = schema.load(spec[4:])
        except schema.SchemaError as e:
            raise UsageError(f"{spec[4:]}: {e}") from None
        if kind != "pwl_cost":
            raise UsageError("cost file must have kind pwl_cost")
        return cost
    if spec.startswith("entropy:"):
        try:
            n = int(spec[8:])
        except ValueError:
            raise UsageError(f"bad entropy resolution {spec[8:]!r}") from None
        if n < 2:
            raise UsageError("entropy resolution must be at least 2")
        return EntropyApprox(n, dim)
    raise UsageError(f"unknown cost {spec!r}; use zero, pwl:<file> or entropy:<n>")


def cmd_acquire(args):
    kind, obj = schema.load(args.path)
    if kind == "decision":
        part = partition_decision_problem(obj.utility, obj.actions)
        prior = obj.prior
    elif kind == "persuasion":
        if len(obj.types) != 1:
            raise UsageError("acquire needs a single-type persuasion instance")
        part = partition_costly_persuasion(obj.sender[0].T, obj.receiver[0].T, obj.actions)
        prior = obj.beliefs[0]
    else:
        raise UsageError("acquire needs a decision or persuasion instance")
    cost = _parse_cost(args.cost, part.dim)
    if isinstance(cost, PiecewiseConvexCost) and cost.pwl.dim != part.dim:
        raise UsageError(f"cost has dimension {cost.pwl.dim}, instance has {part.dim} states")
    t0 = time.perf_counter()
    exp = solve_info_acquisition(part, cost, prior)
    out = {
        "command": "acquire",
        "kind": kind,
        "cost": args.cost,
        "value": exp.value,
        "gross": exp.gross,
        "cost_term": exp.cost,
        "net_value": exp.gross - exp.cost,
        "cost_gap": exp.cost_gap,
        "cells": len(part.cells),
        "experiment": [{"prob": s.prob, "posterior": s.posterior.tolist(),
                        "cell": _labels([part.cells[s.cell].label])[0]}
                       for s in exp.signals],
        "plausibility_residual": exp.plausibility_error(),
        "timing_s": time.perf_counter() - t0,
    }
    return EXIT_OK, out, f"value {exp.value:.10g} with {len(exp.signals)} signals"


def _grid_for(X, step):
    d = X.dim
    if (X.A_eq.shape[0] == 1 and np.allclose(X.A_eq[0], 1.0) and np.isclose(X.b_eq[0], 1.0)
            and X.A_ub.shape[0] == d and np.allclose(X.A_ub, -np.eye(d))
            and np.allclose(X.b_ub, 0.0)):
        return GridSpec(step, simplex=True)
    box = bounding_box(X)
    if box is None:
        raise UsageError("strategy space is unbounded; pass --cap B to truncate it")
    return GridSpec(step, box=snap_box(box, step))


def _stored_objective(path, inst):
    """Objective of a saved ``solve`` result, checked against its own mechanism."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = schema.loads(fh.read())
        obj = float(doc["objective"])
        mech = doc["mechanism"]
        probs = np.array(mech["probs"], dtype=float)
        strat = np.array(mech["strategies"], dtype=float)
    except (OSError, KeyError, TypeError, ValueError) as e:
        raise UsageError(f"corrupted result file: {e}") from None
    shape = (inst.n_types, inst.n_actions)
    if (doc.get("command") != "solve" or not math.isfinite(obj) or probs.shape != shape
            or strat.shape != shape + (inst.dim,)):
        raise UsageError("corrupted result file: does not match the instance")
    mech = SuccinctMechanism(probs, strat)
    return obj, mech


def cmd_verify(args):
    kind, obj = schema.load(args.path)
    t0 = time.perf_counter()
    if args.against == "mis":
        if kind != "graph":
            raise UsageError("--against mis needs a graph instance")
        inst = stackelberg_to_pa(gen_stackelberg_hardness(obj))
        res = solve_action_independent(inst)
        solver = obj.n * res.value
        oracle = float(brute_force_mis(obj))
        tol = 1e-6
        ok = abs(solver - oracle) <= tol
        out = {"against": "mis", "solver_value": solver, "oracle_value": oracle}
    elif args.against.startswith("grid:"):
        try:
            step = float(args.against[5:])
        except ValueError:
            raise UsageError(f"bad grid step {args.against[5:]!r}") from None
        if not step > 0:
            raise UsageError("grid step must be positive")
        inst = _as_pa(kind, obj)
        if args.cap is not None:
            d = inst.dim
            cap = Polyhedron.box(np.full(d, -args.cap), np.full(d, args.cap))
            inst = replace(inst, strategy_space=inst.strategy_space.intersect(cap))
        grid = _grid_for(inst.strategy_space, step)
        extra = {}
        if args.result:
            solver, mech = _stored_objective(args.result, inst)
            ic = check_ic(inst, mech, 1e-6)
            own = eval_principal(inst, mech)
            extra = {"ic_feasible": ic.feasible, "recomputed_objective": own}
            consistent = ic.feasible and abs(own - solver) <= 1e-8
        else:
            solver = solve_optimal_mechanism(inst, epsilon=args.epsilon).objective
            consistent = True
        oracle = myerson_grid_lp(inst, grid)
        tol = grid_lipschitz(inst) * step
        ok = consistent and oracle <= solver + 1e-8 and solver <= oracle + tol + 1e-8
        out = {"against": args.against, "solver_value": solver, "oracle_value": oracle,
               "grid_points": grid.count(inst.dim), **extra}
    else:
        raise UsageError(f"unknown oracle {args.against!r}; use grid:<step> or mis")
    out.update(command="verify", kind=kind, tolerance=tol, verdict="PASS" if ok else "FAIL",
               timing_s=time.perf_counter() - t0)
    text = (f"solver {out['solver_value']:.10g}  oracle {out['oracle_value']:.10g}  "
            f"tolerance {tol:.3g}  {out['verdict']}")
    return (EXIT_OK if ok else EXIT_FAIL), out, text


# ---------------------------------------------------------------------------
# entry point


def build_parser():
    p = argparse.ArgumentParser(prog="pa-coord", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("path", help="instance file (JSON)")
        sp.add_argument("--json", action="store_true", help="print the result as JSON")
        sp.add_argument("-o", "--output", help="write the JSON result to this file")

    s = sub.add_parser("solve", help="optimal mechanism for an instance")
    common(s)
    s.add_argument("--epsilon", type=float, default=0.01)
    s.add_argument("--class", dest="mclass", default="general",
                   choices=("general", "type-independent", "action-independent"))
    s.set_defaults(func=cmd_solve)

    a = sub.add_parser("acquire", help="optimal costly experiment")
    common(a)
    a.add_argument("--cost", default="zero", help="zero | pwl:<file> | entropy:<n>")
    a.set_defaults(func=cmd_acquire)

    v = sub.add_parser("verify", help="compare the solver against an oracle")
    common(v)
    v.add_argument("--against", required=True, help="grid:<step> | mis")
    v.add_argument("--cap", type=float, default=None,
                   help="truncate the strategy space to [-B, B]^d")
    v.add_argument("--epsilon", type=float, default=0.01)
    v.add_argument("--result", help="check a saved solve result instead of re-solving")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_INPUT if e.code else EXIT_OK
    try:
        code, out, text = args.func(args)
    except schema.SchemaError as e:
        print(f"error: {args.path}: {e}", file=sys.stderr)
        return EXIT_INPUT
    except (UsageError, DomainError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except NoMechanismError as e:
        print(f"infeasible: {e}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except UnboundedUtilityError as e:
        print(f"unbounded: {e}", file=sys.stderr)
        return EXIT_UNBOUNDED
    except SizeGuardError as e:
        print(f"too large: {e}", file=sys.stderr)
        return EXIT_GUARD
    except LPError as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_INPUT
    out["schema_version"] = schema.SCHEMA_VERSION
    doc = schema.dumps(out)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(doc)
    if args.json:
        sys.stdout.write(doc)
    else:
        print(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
