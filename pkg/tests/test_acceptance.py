"""
End-to-end acceptance checks, one test per criterion.

Each test records a one-line verdict through ``record_criterion``; the lines
are printed in the pytest terminal summary under "acceptance criteria".
The Monte Carlo criteria run at full size (p = 500, n = 200, 50 replicates)
and dominate the suite's wall time.
"""

import json
import time

import numpy as np
import pytest

from mrdcsis.assignment import solve_lsap
from mrdcsis.cli import main as cli_main
from mrdcsis.dcor import dcov_terms, mrdc
from mrdcsis.lds import sobol_points
from mrdcsis.screening import base_threshold, max_ratio_threshold
from mrdcsis.simgen import SimDesign, build_example, run_simulation
from oracles import brute_force_lsap, double_centered_dcov2, literal_terms


def _verdict(record, number, checks, detail):
    ok = all(checks)
    record(number, ok, detail)
    assert ok, detail


@pytest.fixture(scope="module")
def example1_case1():
    design = SimDesign("ex1-case1", n=200, p=500, reps=50, seed=0)
    t0 = time.perf_counter()
    reports = run_simulation(design, ("mrdc", "sis"))
    return reports, time.perf_counter() - t0


def test_criterion_01_assignment_optimality(record_criterion):
    rng = np.random.default_rng(101)
    mismatches = 0
    for t in range(200):
        n = int(rng.integers(1, 9))
        c = rng.integers(-20, 50, size=(n, n)) if t % 2 == 0 else rng.normal(size=(n, n))
        best, _ = brute_force_lsap(c)
        _, total = solve_lsap(c)
        mismatches += total != best
    big = rng.random((1000, 1000))
    t0 = time.perf_counter()
    sigma, _ = solve_lsap(big)
    elapsed = time.perf_counter() - t0
    _verdict(
        record_criterion,
        1,
        [mismatches == 0, elapsed < 10.0, np.unique(sigma).size == 1000],
        f"{200 - mismatches}/200 small solves optimal; n=1000 solve {elapsed:.2f} s (< 10 s)",
    )


def test_criterion_02_estimator_oracle(record_criterion):
    rng = np.random.default_rng(102)
    worst_rel, worst_dc = 0.0, 0.0
    for _ in range(100):
        n = int(rng.integers(2, 61))
        x = rng.standard_t(2, size=(n, int(rng.integers(1, 4))))
        y = rng.normal(size=(n, int(rng.integers(1, 4))))
        t = dcov_terms(x, y)
        for got, want in zip((t.s1, t.s2, t.s3), literal_terms(x, y)):
            worst_rel = max(worst_rel, abs(got - want) / abs(want))
        worst_dc = max(worst_dc, abs(t.dcov2 - double_centered_dcov2(x, y)))
    _verdict(
        record_criterion,
        2,
        [worst_rel <= 1e-10, worst_dc <= 1e-10],
        f"max rel err S1/S2/S3 {worst_rel:.1e}, max |dcov2 - double-centred| {worst_dc:.1e} (tol 1e-10)",
    )


def test_criterion_03_exact_invariances(record_criterion):
    rng = np.random.default_rng(103)
    transforms = {"exp": np.exp, "cube": lambda v: v**3, "affine": lambda v: 2.5 * v + 3.0}
    failures = {name: 0 for name in transforms}
    failures["multivariate"] = 0
    for name, f in transforms.items():
        for _ in range(100):
            x = rng.normal(size=60)
            y = x**2 + rng.normal(size=60)
            failures[name] += mrdc(f(x), y) != mrdc(x, y)
    for _ in range(100):
        x = rng.standard_t(3, size=(40, 2))
        y = np.abs(x[:, :1]) + rng.normal(size=(40, 1))
        a = rng.uniform(0.1, 10.0)
        b = rng.normal(scale=5.0, size=2)
        failures["multivariate"] += mrdc(a * x + b, y) != mrdc(x, y)
    _verdict(
        record_criterion,
        3,
        [v == 0 for v in failures.values()],
        "bitwise mismatches out of 100: " + ", ".join(f"{k}={v}" for k, v in failures.items()),
    )


def test_criterion_04_gaussian_monotonicity(record_criterion):
    t0 = time.perf_counter()
    means = []
    for rho in (0.0, 0.3, 0.6, 0.9):
        design = SimDesign("gaussian-rho", n=500, p=1, reps=100, seed=4, rho=rho)
        vals = []
        for r in range(design.reps):
            X, Y, _ = build_example(design, r)
            vals.append(mrdc(X[:, 0, :], Y))
        means.append(float(np.mean(vals)))
    elapsed = time.perf_counter() - t0
    _verdict(
        record_criterion,
        4,
        [all(a < b for a, b in zip(means, means[1:])), elapsed < 120.0],
        "mean mrdc at rho 0/0.3/0.6/0.9 = " + ", ".join(f"{m:.4f}" for m in means) + f"; {elapsed:.1f} s (< 120 s)",
    )


@pytest.mark.slow
def test_criterion_05_example1_case1(record_criterion, example1_case1):
    reports, elapsed = example1_case1
    mr, sis = reports["mrdc"], reports["sis"]
    _verdict(
        record_criterion,
        5,
        [mr.Pa["d3"] >= 0.8, mr.S_mean <= 60, sis.Pa["d3"] <= 0.2, elapsed < 15 * 60],
        f"MrDc Pa(d3)={mr.Pa['d3']:.2f} (>= 0.8), S.mean={mr.S_mean:.1f} (<= 60); "
        f"SIS Pa(d3)={sis.Pa['d3']:.2f} (<= 0.2); {elapsed:.0f} s (< 900 s)",
    )


@pytest.mark.slow
def test_criterion_06_example1_case2(record_criterion):
    design = SimDesign("ex1-case2", n=200, p=500, reps=50, seed=0)
    reports = run_simulation(design, ("mrdc", "dcsis"))
    mr, dc = reports["mrdc"].Pa["d3"], reports["dcsis"].Pa["d3"]
    _verdict(
        record_criterion,
        6,
        [mr - dc >= 0.3],
        f"MrDc Pa(d3)={mr:.2f}, DC-SIS Pa(d3)={dc:.2f}, difference {mr - dc:.2f} (>= 0.3)",
    )


@pytest.mark.slow
def test_criterion_07_example3_case1(record_criterion):
    design = SimDesign("ex3-case1", n=200, p=500, reps=50, seed=0)
    t0 = time.perf_counter()
    reports = run_simulation(design, ("mrdc", "dcsis"))
    elapsed = time.perf_counter() - t0
    mr, dc = reports["mrdc"].S_mean, reports["dcsis"].S_mean
    ratio = dc / mr
    _verdict(
        record_criterion,
        7,
        [ratio >= 3.0, elapsed < 30 * 60],
        f"S.mean MrDc={mr:.1f}, DC-SIS={dc:.1f}, ratio {ratio:.2f} (>= 3); {elapsed:.0f} s (< 1800 s)",
    )


@pytest.mark.slow
def test_criterion_08_rank_consistency(record_criterion, example1_case1):
    gaps = np.array(example1_case1[0]["mrdc"].rank_gaps)
    rate = float(np.mean(gaps > 0))
    _verdict(
        record_criterion,
        8,
        [rate >= 0.75],
        f"rank_gap > 0 in {int(np.sum(gaps > 0))}/{gaps.size} replicates = {rate:.2f} (>= 0.75); "
        f"median gap {np.median(gaps):+.4f}",
    )


def test_criterion_09_threshold_arithmetic(record_criterion):
    d1 = base_threshold(200)
    s0 = max_ratio_threshold([0.9, 0.8, 0.7, 0.1, 0.05])
    _verdict(record_criterion, 9, [d1 == 37, s0 == 3], f"d1(n=200)={d1} (37); max-ratio={s0} (3)")


def test_criterion_10_sobol_net(record_criterion):
    n = 256
    pts = sobol_points(n, 2).points
    worst = 0.0
    for a in range(9):
        for b in range(9 - a):
            wa, wb = 2.0**-a, 2.0**-b
            for i in range(2**a):
                for j in range(2**b):
                    inside = (
                        (pts[:, 0] >= i * wa) & (pts[:, 0] < (i + 1) * wa)
                        & (pts[:, 1] >= j * wb) & (pts[:, 1] < (j + 1) * wb)
                    )
                    worst = max(worst, abs(int(inside.sum()) - n * wa * wb))
    _verdict(record_criterion, 10, [worst <= 1], f"max |count - expected| over dyadic boxes = {worst:g} (<= 1)")


def test_criterion_11_thread_determinism(record_criterion, tmp_path, capsys):
    design = tmp_path / "design.json"
    design.write_text(json.dumps({"example": "ex3-case2", "n": 100, "p": 150, "reps": 8, "seed": 11}))
    codes = []
    for threads in (1, 8):
        codes.append(cli_main(["simulate", "--design", str(design), "--methods", "mrdc,dcsis",
                               "--out", str(tmp_path / f"t{threads}"), "--threads", str(threads)]))
    capsys.readouterr()
    same = [
        (tmp_path / "t1" / name).read_bytes() == (tmp_path / "t8" / name).read_bytes()
        for name in ("mrdc.json", "dcsis.json")
    ]
    _verdict(
        record_criterion,
        11,
        [codes == [0, 0], all(same)],
        f"exit codes {codes}; JSON reports byte-identical for --threads 1 vs 8: {all(same)}",
    )
