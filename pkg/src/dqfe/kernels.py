"""Kernel backend selection.

The compiled extension is preferred when importable; set
``DQFE_PURE_PYTHON=1`` to force the NumPy fallback.  Both backends share
one contract and one RNG stream layout, so swapping them never changes
results (see tests/test_kernel_backends.py).
"""

from __future__ import annotations

import os

if os.environ.get("DQFE_PURE_PYTHON") == "1":
    from . import _kernels_numpy as _impl
else:
    try:
        from . import _speedups as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernels_numpy as _impl

apply_ry = _impl.apply_ry
apply_rx = _impl.apply_rx
apply_h = _impl.apply_h
apply_rzz = _impl.apply_rzz
apply_ryz = _impl.apply_ryz
build_tree = _impl.build_tree


def backend_name() -> str:
    return _impl.BACKEND
