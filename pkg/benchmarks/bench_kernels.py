"""
Compare the numba and pure-numpy backends on the hot kernels.

    python benchmarks/bench_kernels.py [--sizes 100 200 400] [--repeat 5]

Each kernel is called once per backend before timing so numba compilation
is not counted. Reported times are the best of ``--repeat`` runs.
"""

import argparse
import timeit

import numpy as np

from mrdcsis._accel import available_backends
from mrdcsis.assignment import solve_lsap, squared_distance_cost
from mrdcsis.dcor import dcov_terms_against, distance_summary
from mrdcsis.lds import sobol_points
from mrdcsis.screening import compute_scores


def lsap_case(n, rng):
    x = rng.standard_t(2, size=(n, 3))
    return squared_distance_cost(x, sobol_points(n, 3).points)


def best_of(fn, repeat):
    fn()  # warm-up / JIT
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def run(sizes, repeat, p):
    rng = np.random.default_rng(0)
    backends = available_backends()
    rows = []
    for n in sizes:
        cost = lsap_case(n, rng)
        x = rng.normal(size=(n, 3))
        y = rng.normal(size=(n, 2))
        X = rng.normal(size=(n, p, 3))
        Y = rng.normal(size=(n, 2))
        summ = {b: distance_summary(y, backend=b) for b in backends}
        cases = {
            "lsap": lambda b: solve_lsap(cost, backend=b),
            "dcov_terms": lambda b: dcov_terms_against(x, summ[b]),
            f"screen p={p}": lambda b: compute_scores(X, Y, "mrdc", backend=b),
        }
        for name, fn in cases.items():
            times = {b: best_of(lambda: fn(b), repeat) for b in backends}
            rows.append((name, n, times))
    return backends, rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[1])
    ap.add_argument("--sizes", type=int, nargs="+", default=[100, 200, 400])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--p", type=int, default=20, help="predictors in the screening case")
    args = ap.parse_args()

    backends, rows = run(args.sizes, args.repeat, args.p)
    print(f"{'kernel':<14}{'n':>6}" + "".join(f"{b + ' ms':>14}" for b in backends) + f"{'speedup':>10}")
    for name, n, times in rows:
        line = f"{name:<14}{n:>6}" + "".join(f"{times[b] * 1e3:>14.2f}" for b in backends)
        if len(backends) == 2:
            line += f"{times['numpy'] / times['numba']:>9.1f}x"
        print(line)


if __name__ == "__main__":
    main()
