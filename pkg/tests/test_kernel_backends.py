"""Compiled extension vs NumPy fallback: same gates, same trees.

Gate buffers may differ in the last ulp where complex*complex multiplies
round differently, so gates are compared at 1e-12; tree structures are
discrete decisions off a shared stream and must match exactly.
"""

import numpy as np
import pytest

from dqfe import _kernels_numpy as py_impl
from dqfe import kernels

compiled = pytest.importorskip(
    "dqfe._speedups", reason="compiled extension not built"
)


def random_amps(rng, n):
    a = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return (a / np.linalg.norm(a)).astype(np.complex128)


@pytest.mark.parametrize("n", [1, 2, 4, 6])
def test_gate_kernels_agree(n, rng):
    a0 = random_amps(rng, n)
    ops = [("apply_ry", (0, 0.73)), ("apply_rx", (n - 1, -0.41)), ("apply_h", (0,))]
    if n >= 2:
        ops += [
            ("apply_rzz", (0, n - 1, 0.9)),
            ("apply_ryz", (0, n - 1, 1.3)),
            ("apply_ryz", (n - 1, 0, -0.6)),
        ]
    for name, args in ops:
        x1, x2 = a0.copy(), a0.copy()
        getattr(compiled, name)(x1, *args)
        getattr(py_impl, name)(x2, *args)
        assert np.abs(x1 - x2).max() < 1e-12, name


def test_gate_sequences_agree(rng):
    n = 5
    x1 = random_amps(rng, n)
    x2 = x1.copy()
    seq = []
    for _ in range(40):
        kind = rng.choice(["ry", "rx", "h", "rzz", "ryz"])
        q = int(rng.integers(0, n))
        p = int((q + 1 + rng.integers(0, n - 1)) % n)
        angle = float(rng.uniform(-2, 2))
        seq.append((kind, q, p, angle))
    for kind, q, p, angle in seq:
        if kind == "h":
            compiled.apply_h(x1, q)
            py_impl.apply_h(x2, q)
        elif kind in ("ry", "rx"):
            getattr(compiled, f"apply_{kind}")(x1, q, angle)
            getattr(py_impl, f"apply_{kind}")(x2, q, angle)
        else:
            getattr(compiled, f"apply_{kind}")(x1, q, p, angle)
            getattr(py_impl, f"apply_{kind}")(x2, q, p, angle)
    assert np.abs(x1 - x2).max() < 1e-10


def test_tree_builders_identical(rng):
    for trial in range(10):
        m = int(rng.integers(5, 200))
        nf = int(rng.integers(2, 10))
        n_classes = int(rng.integers(2, 5))
        X = np.ascontiguousarray(rng.normal(size=(m, nf)))
        y = rng.integers(0, n_classes, size=m).astype(np.int64)
        seed = int(rng.integers(0, 2**63))
        depth = int(rng.choice([-1, 1, 3, 6]))
        min_leaf = int(rng.integers(1, 4))
        k = int(rng.integers(1, nf + 1))
        a = compiled.build_tree(X, y, n_classes, seed, depth, min_leaf, k)
        b = py_impl.build_tree(X, y, n_classes, seed, depth, min_leaf, k)
        assert a[5] == b[5]
        for u, v in zip(a[:5], b[:5]):
            assert np.array_equal(u, v)


def test_tree_builder_handles_duplicate_values(rng):
    X = np.ascontiguousarray(rng.integers(0, 3, size=(60, 4)).astype(float))
    y = rng.integers(0, 2, size=60).astype(np.int64)
    a = compiled.build_tree(X, y, 2, 7, -1, 1, 2)
    b = py_impl.build_tree(X, y, 2, 7, -1, 1, 2)
    for u, v in zip(a[:5], b[:5]):
        assert np.array_equal(u, v)


def test_backend_name_reports_selection():
    assert kernels.backend_name() in ("compiled", "python")


def test_pure_python_env_override(tmp_path):
    import subprocess
    import sys

    code = "import dqfe.kernels as k; print(k.backend_name())"
    out = subprocess.run(
        [sys.executable, "-c", code],
        env={"PATH": "/usr/bin:/bin", "DQFE_PURE_PYTHON": "1"},
        capture_output=True,
        text=True,
        check=True,
    )
    assert out.stdout.strip() == "python"
