"""Compare the compiled kernel backend against the NumPy fallback.

Times the statevector gate kernels at several qubit counts and the tree
grower at several training-set sizes, then prints a speedup table.

Usage:  python benchmarks/bench_kernels.py [--repeat N]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from dqfe import _kernels_numpy as py_impl

try:
    from dqfe import _speedups as c_impl
except ImportError:
    c_impl = None


def time_gates(impl, n: int, sweeps: int) -> float:
    rng = np.random.default_rng(1)
    amps = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    amps = (amps / np.linalg.norm(amps)).astype(np.complex128)
    t0 = time.perf_counter()
    for _ in range(sweeps):
        for q in range(n):
            impl.apply_ry(amps, q, 0.31)
        for q in range(n - 1):
            impl.apply_ryz(amps, q, q + 1, 0.17)
            impl.apply_ryz(amps, q + 1, q, 0.17)
            impl.apply_rzz(amps, q, q + 1, 0.09)
    return time.perf_counter() - t0


def time_trees(impl, rows: int, cols: int, n_trees: int) -> float:
    rng = np.random.default_rng(2)
    X = np.ascontiguousarray(rng.normal(size=(rows, cols)))
    y = rng.integers(0, 5, size=rows).astype(np.int64)
    t0 = time.perf_counter()
    for t in range(n_trees):
        impl.build_tree(X, y, 5, 1000 + t, 8, 1, max(1, int(cols**0.5)))
    return time.perf_counter() - t0


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=3, help="best-of repeats")
    args = parser.parse_args()

    if c_impl is None:
        print("compiled extension not available; run pip install -e . first")
        return

    print(f"{'workload':<32} {'python':>10} {'compiled':>10} {'speedup':>8}")
    for n, sweeps in ((10, 40), (14, 10), (18, 2)):
        py = min(time_gates(py_impl, n, sweeps) for _ in range(args.repeat))
        cc = min(time_gates(c_impl, n, sweeps) for _ in range(args.repeat))
        label = f"gates n={n} x{sweeps} sweeps"
        print(f"{label:<32} {py:>9.3f}s {cc:>9.3f}s {py / cc:>7.1f}x")
    for rows, cols, n_trees in ((200, 15, 20), (1000, 15, 10), (1000, 44, 10)):
        py = min(time_trees(py_impl, rows, cols, n_trees) for _ in range(args.repeat))
        cc = min(time_trees(c_impl, rows, cols, n_trees) for _ in range(args.repeat))
        label = f"trees {rows}x{cols} x{n_trees}"
        print(f"{label:<32} {py:>9.3f}s {cc:>9.3f}s {py / cc:>7.1f}x")


if __name__ == "__main__":
    main()
