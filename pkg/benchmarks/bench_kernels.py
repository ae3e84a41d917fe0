#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python fallback.

Usage: python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from gapedge import _kernels_py

try:
    from gapedge import _kernels as _compiled
except ImportError:
    _compiled = None


def timeit(fn, repeat=5):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_sturm(mod):
    rng = np.random.default_rng(0)
    diag = rng.normal(size=2000)
    off = rng.normal(size=1999)
    shifts = np.linspace(-3, 3, 64)
    return timeit(lambda: mod.sturm_counts(diag, off, shifts))


def bench_pruefer(mod):
    def run():
        for mu in (-0.25, -1.0, -3.484):
            for x in np.linspace(20, 80, 13):
                mod.pruefer_count(mu, float(np.exp(-x)), 1e-9, 1e-11)

    return timeit(run, repeat=3)


def bench_shoot(mod):
    def run():
        for lam in np.linspace(-8, 8, 24):
            mod.dirac_shoot(0.5, 0.3, float(lam), 1e-6, 0.9, 0.3, 1.0, 1e-10, 1e-12)

    return timeit(run, repeat=3)


def main():
    rows = []
    for name, fn in (("sturm_counts", bench_sturm), ("pruefer_count", bench_pruefer), ("dirac_shoot", bench_shoot)):
        t_py = fn(_kernels_py)
        if _compiled is not None:
            t_c = fn(_compiled)
            rows.append((name, t_py, t_c, t_py / t_c))
        else:
            rows.append((name, t_py, None, None))

    print(f"{'kernel':<16}{'python':>12}{'compiled':>12}{'speedup':>10}")
    for name, t_py, t_c, ratio in rows:
        if t_c is None:
            print(f"{name:<16}{t_py * 1e3:>10.2f}ms{'n/a':>12}{'n/a':>10}")
        else:
            print(f"{name:<16}{t_py * 1e3:>10.2f}ms{t_c * 1e3:>10.2f}ms{ratio:>9.1f}x")
    if _compiled is None:
        print("\ncompiled backend unavailable; install with the Cython toolchain to compare")


if __name__ == "__main__":
    main()
