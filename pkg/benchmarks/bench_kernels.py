#!/usr/bin/env python3
"""Benchmark the compiled shell kernels against the numpy fallback.

Usage:
    python benchmarks/bench_kernels.py [--n-max N] [--repeat R]

Covers the two hot paths: exact r_2 shell-count construction and the
Kahan-compensated occupation reduction over a shell table.
"""

import argparse
import time

import numpy as np

from qgas import _kernels_py


def _load_backends():
    backends = [("python", _kernels_py)]
    try:
        from qgas import _shellsum

        backends.insert(0, ("cython", _shellsum))
    except ImportError:
        print("compiled backend not built; benchmarking the fallback only")
    return backends


def bench(fn, repeat):
    best = float("inf")
    result = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - t0)
    return best, result


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n-max", type=int, default=20_000_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    backends = _load_backends()
    rows = []
    counts_by_backend = {}
    for name, mod in backends:
        t, counts = bench(lambda m=mod: m.torus_r2_counts_i32(args.n_max), args.repeat)
        counts_by_backend[name] = np.asarray(counts, dtype=np.int64)
        rows.append((f"r2 counts (n_max={args.n_max:.1e})", name, t))

    table = counts_by_backend[backends[0][0]]
    for name, arr in counts_by_backend.items():
        assert np.array_equal(arr, table), f"backend {name} disagrees on counts"
    table64 = table.astype(np.int64)

    for name, mod in backends:
        t, val = bench(
            lambda m=mod: m.shell_reduce(table64, 0, 0, 1.0, 0.0, 0.0, 2e-3, 1.0, -1.0),
            args.repeat,
        )
        rows.append((f"number shell reduce ({args.n_max:.1e} shells)", name, t))

    energies = np.sort(np.random.default_rng(0).uniform(0, 40, size=2_000_000))
    weights = np.ones_like(energies)
    for name, mod in backends:
        t, _ = bench(
            lambda m=mod: m.lines_reduce(energies, weights, 0, 0.5, 0.9, 0.5),
            args.repeat,
        )
        rows.append(("lines reduce (2e6 lines)", name, t))

    width = max(len(r[0]) for r in rows)
    print(f"\n{'kernel':<{width}}  backend  best time")
    first = {}
    for task, name, t in rows:
        first.setdefault(task, t)
        rel = t / first[task] if first[task] > 0 else float("inf")
        print(f"{task:<{width}}  {name:<7}  {t * 1e3:9.1f} ms  ({rel:.2f}x first backend)")


if __name__ == "__main__":
    main()
