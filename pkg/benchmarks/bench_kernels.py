#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python fallback.

Times the two hot kernels (LPT makespan scheduling and the weighted
best-split scan) plus an end-to-end forest fit under each backend.

Run:  python benchmarks/bench_kernels.py
"""

import time

import numpy as np

import verisim._fallback as fallback

try:
    import verisim._native as native
except ImportError:
    native = None


def timeit(fn, *args, repeat=5, number=20):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        for _ in range(number):
            fn(*args)
        best = min(best, (time.perf_counter() - t0) / number)
    return best


def bench_lpt(backend, rng):
    times = rng.lognormal(-6.0, 0.5, size=4000)
    return timeit(backend.lpt_makespan, times, 8)


def bench_split(backend, rng):
    n = 20000
    x = np.sort(rng.uniform(0, 1, n))
    y = np.sin(x * 6) + rng.normal(0, 0.1, n)
    w = rng.multinomial(n, np.full(n, 1.0 / n)).astype(np.float64)
    return timeit(backend.best_split, x, y, w, 0, n)


def bench_forest_fit(backend, rng):
    from verisim import forest, kernels

    saved = kernels.best_split
    kernels.best_split = backend.best_split
    try:
        x = rng.uniform(1e4, 8e6, 4000)
        y = (x / 1e5) ** 0.25 + rng.normal(0, 0.05, 4000)
        return timeit(forest.fit_forest, x, y, 30, 50, 0, repeat=3, number=1)
    finally:
        kernels.best_split = saved


def main():
    rng = np.random.default_rng(0)
    backends = [("fallback", fallback)] + ([("native", native)] if native else [])
    rows = []
    for name, mod in backends:
        rows.append(
            (
                name,
                bench_lpt(mod, np.random.default_rng(1)),
                bench_split(mod, np.random.default_rng(2)),
                bench_forest_fit(mod, np.random.default_rng(3)),
            )
        )
    print(f"{'backend':<10} {'lpt_makespan(4k jobs)':>22} {'best_split(20k)':>18} {'forest fit(4k,d30,s50)':>24}")
    for name, t_lpt, t_split, t_fit in rows:
        print(f"{name:<10} {t_lpt * 1e6:>19.1f} us {t_split * 1e6:>15.1f} us {t_fit * 1e3:>21.1f} ms")
    if len(rows) == 2:
        print(
            f"{'speedup':<10} {rows[0][1] / rows[1][1]:>20.1f} x {rows[0][2] / rows[1][2]:>16.1f} x "
            f"{rows[0][3] / rows[1][3]:>22.1f} x"
        )
    if native is None:
        print("compiled extension not built: run `pip install -e .` with Cython available")


if __name__ == "__main__":
    main()
