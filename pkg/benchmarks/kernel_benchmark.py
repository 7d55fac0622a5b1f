#!/usr/bin/env python3
"""Compare the compiled regression kernels against the numpy fallback.

Times the two backends on the workloads that dominate a search run: small
least-squares fits, multinomial Newton fits, single conditional
independence tests, and one full PC-stable pass over a simulated mixed
dataset. Run from the repository root:

    python benchmarks/kernel_benchmark.py [--quick]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from mixedcausal._kernels import get_backend
from mixedcausal.citest import CiTester
from mixedcausal.search import SearchConfig, pcs_skeleton
from mixedcausal.simulate import SimConfig, make_rng, simulate_dataset


def time_fn(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(3):
        t0 = time.perf_counter()
        for _ in range(repeats):
            fn()
        best = min(best, (time.perf_counter() - t0) / repeats)
    return best


def bench_fits(backend, n: int, m: int, repeats: int):
    kern = get_backend(backend)
    rng = make_rng(0)
    X = np.ascontiguousarray(
        np.column_stack([np.ones(n)] + [rng.normal(size=n) for _ in range(m - 1)])
    )
    y = np.ascontiguousarray(rng.normal(size=n))
    yc = rng.integers(0, 3, n).astype(np.int32)
    t_lin = time_fn(lambda: kern.linear_fit(X, y), repeats)
    t_mn = time_fn(lambda: kern.multinomial_fit(X, yc, 3), max(repeats // 5, 10))
    return t_lin, t_mn


def bench_ci(backend, repeats: int):
    _, data = simulate_dataset(SimConfig(20, 0.5, 200, seed=1))
    tester = CiTester(data, backend=backend)
    pairs = [(0, 1, set()), (0, 5, {2, 3}), (10, 11, {4}), (12, 13, {6, 7})]

    def run():
        for x, y, s in pairs:
            tester.test(x, y, s, 0.05)

    return time_fn(run, repeats) / len(pairs)


def bench_search(backend):
    _, data = simulate_dataset(SimConfig(60, 0.5, 300, seed=2))
    t0 = time.perf_counter()
    tester = CiTester(data, backend=get_backend(backend))
    stats: dict = {}
    pcs_skeleton(data, SearchConfig(alpha=0.05), tester=tester, stats=stats)
    return time.perf_counter() - t0, stats.get("n_tests", 0)


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--quick", action="store_true", help="fewer repeats")
    args = parser.parse_args()
    repeats = 200 if args.quick else 2000

    print(f"{'workload':34s} {'python':>12s} {'compiled':>12s} {'speedup':>9s}")
    rows = []
    for n, m in ((100, 4), (100, 10), (500, 8)):
        lin_py, mn_py = bench_fits("python", n, m, repeats)
        lin_c, mn_c = bench_fits("compiled", n, m, repeats)
        rows.append((f"linear_fit n={n} m={m}", lin_py, lin_c))
        rows.append((f"multinomial_fit n={n} m={m} k=3", mn_py, mn_c))
    rows.append(("ci_test (mixed, small |S|)", bench_ci("python", repeats // 4),
                 bench_ci("compiled", repeats // 4)))
    for label, t_py, t_c in rows:
        print(f"{label:34s} {t_py * 1e6:10.1f}us {t_c * 1e6:10.1f}us {t_py / t_c:8.1f}x")

    t_py, n_tests = bench_search("python")
    t_c, _ = bench_search("compiled")
    print(
        f"{'pc-stable skeleton (60 vars)':34s} {t_py:10.2f}s  {t_c:10.2f}s  "
        f"{t_py / t_c:8.1f}x   ({n_tests} tests)"
    )


if __name__ == "__main__":
    main()
