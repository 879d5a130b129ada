"""Compiled versus pure-Python kernels on representative workloads.

    python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import time

import numpy as np

from pa_coord import _core
from pa_coord.applications import Graph, random_graph, random_pa_instance
from pa_coord.lp import LPProblem, solve_lp
from pa_coord.mechanism import build_cp_closure


def random_lps(rng, count=20, m=40, n=60):
    out = []
    for _ in range(count):
        A = rng.normal(size=(m, n))
        b = rng.random(m) + 0.5
        out.append(LPProblem.build(rng.normal(size=n), A, b, upper=np.full(n, 5.0)))
    return out


def closure_lps(rng, count=10):
    return [build_cp_closure(random_pa_instance(rng, 3, 3, 3, space="box"))[0]
            for _ in range(count)]


def graphs(rng, count=20, n=22):
    return [random_graph(n, 0.2, rng) for _ in range(count)]


def timed(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(0)
    work = {
        "dense LPs 40x60": random_lps(rng),
        "closure LPs 3x3x3": closure_lps(rng),
        "MIS n=22": graphs(rng),
    }
    names = list(_core.BACKENDS)
    if "compiled" not in names:
        print("compiled extension not built; only the python kernels are timed")
    print(f"{'workload':<20}" + "".join(f"{n:>12}" for n in names) + "     speedup")
    for label, items in work.items():
        row = {}
        for name in names:
            if isinstance(items[0], Graph):
                kern = _core.kernels(name)

                def run(kern=kern):
                    for g in items:
                        kern.max_independent_set(g.masks())
            else:
                def run(name=name):
                    for lp in items:
                        solve_lp(lp, backend=name)
            row[name] = timed(run, args.repeat)
        speed = row["python"] / row["compiled"] if "compiled" in row else float("nan")
        print(f"{label:<20}" + "".join(f"{row[n]:>11.3f}s" for n in names) + f"{speed:>11.1f}x")


if __name__ == "__main__":
    main()
