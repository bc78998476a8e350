"""Pure NumPy implementations of the hot kernels.

This module mirrors the compiled extension ``dqfe._speedups`` operation
for operation: gate updates use the same multiply/add sequences and the
tree builder consumes the same SplitMix64 stream in the same order, so
both backends produce identical results.  Selection happens in
``dqfe.kernels``.

Gate convention: rotation kernels implement exp(-i*angle/2 * P); qubit 0
is the least significant statevector index bit; all kernels mutate the
amplitude buffer in place.
"""

from __future__ import annotations

import math

import numpy as np

from .rng import SplitMix64, doubles_stream

BACKEND = "python"


def apply_ry(amps: np.ndarray, q: int, angle: float) -> None:
    c = math.cos(angle / 2.0)
    s = math.sin(angle / 2.0)
    v = amps.reshape(-1, 2, 1 << q)
    a0 = v[:, 0, :].copy()
    a1 = v[:, 1, :]
    v[:, 0, :] = c * a0 - s * a1
    v[:, 1, :] = s * a0 + c * a1


def apply_rx(amps: np.ndarray, q: int, angle: float) -> None:
    c = math.cos(angle / 2.0)
    ms = complex(0.0, -math.sin(angle / 2.0))
    v = amps.reshape(-1, 2, 1 << q)
    a0 = v[:, 0, :].copy()
    a1 = v[:, 1, :]
    v[:, 0, :] = c * a0 + ms * a1
    v[:, 1, :] = ms * a0 + c * a1


def apply_h(amps: np.ndarray, q: int) -> None:
    r = 1.0 / math.sqrt(2.0)
    v = amps.reshape(-1, 2, 1 << q)
    a0 = v[:, 0, :].copy()
    a1 = v[:, 1, :]
    v[:, 0, :] = (a0 + a1) * r
    v[:, 1, :] = (a0 - a1) * r


def _split_view(amps: np.ndarray, qa: int, qb: int) -> tuple:
    """Reshape so bit hi = axis 1 and bit lo = axis 3."""
    hi, lo = (qa, qb) if qa > qb else (qb, qa)
    v = amps.reshape(-1, 2, 1 << (hi - lo), 1 << lo)
    v = v.reshape(-1, 2, 1 << (hi - lo - 1), 2, 1 << lo)
    return v, hi, lo


def apply_rzz(amps: np.ndarray, qa: int, qb: int, angle: float) -> None:
    half = angle / 2.0
    p0 = complex(math.cos(half), -math.sin(half))
    p1 = complex(math.cos(half), math.sin(half))
    v, _, _ = _split_view(amps, qa, qb)
    v[:, 0, :, 0, :] *= p0
    v[:, 1, :, 1, :] *= p0
    v[:, 0, :, 1, :] *= p1
    v[:, 1, :, 0, :] *= p1


def apply_ryz(amps: np.ndarray, qy: int, qz: int, angle: float) -> None:
    """Y rotation on qy whose direction is conditioned on the Z value of qz."""
    c = math.cos(angle / 2.0)
    s = math.sin(angle / 2.0)
    v, hi, _ = _split_view(amps, qy, qz)
    z_axis = 3 if qy == hi else 1
    for zbit, zsign in ((0, 1.0), (1, -1.0)):
        sz = s * zsign
        if z_axis == 1:
            a0 = v[:, zbit, :, 0, :].copy()
            a1 = v[:, zbit, :, 1, :]
            v[:, zbit, :, 0, :] = c * a0 - sz * a1
            v[:, zbit, :, 1, :] = sz * a0 + c * a1
        else:
            a0 = v[:, 0, :, zbit, :].copy()
            a1 = v[:, 1, :, zbit, :]
            v[:, 0, :, zbit, :] = c * a0 - sz * a1
            v[:, 1, :, zbit, :] = sz * a0 + c * a1


def _candidates(rng: SplitMix64, n_features: int, k: int) -> list:
    if k >= n_features:
        return list(range(n_features))
    perm = list(range(n_features))
    for t in range(k):
        j = t + rng.randbelow(n_features - t)
        perm[t], perm[j] = perm[j], perm[t]
    return sorted(perm[:k])


def build_tree(
    X: np.ndarray,
    y: np.ndarray,
    n_classes: int,
    seed: int,
    max_depth: int,
    min_leaf: int,
    k_features: int,
):
    """Grow one CART-style tree on a bootstrap resample.

    Splits maximize Gini impurity decrease over ``k_features`` randomly
    drawn candidate columns; ties break toward the lowest feature index,
    then the lowest threshold.  Returns (feature, threshold, left, right,
    counts, node_count) arrays; leaves carry feature == -1.
    """
    m0, nf = X.shape
    rng = SplitMix64(seed)
    us = doubles_stream(seed, m0)
    boot = np.minimum((us * m0).astype(np.int64), m0 - 1)
    rng.skip(m0)
    Xb = np.ascontiguousarray(X[boot])
    yb = np.ascontiguousarray(y[boot].astype(np.int64))

    max_nodes = 2 * m0 + 2
    feature = np.full(max_nodes, -1, dtype=np.int32)
    threshold = np.zeros(max_nodes)
    left = np.full(max_nodes, -1, dtype=np.int32)
    right = np.full(max_nodes, -1, dtype=np.int32)
    counts = np.zeros((max_nodes, n_classes), dtype=np.int64)
    eye = np.eye(n_classes, dtype=np.int64)

    node_count = 1
    stack = [(np.arange(m0), 0, 0)]
    while stack:
        idx, depth, nid = stack.pop()
        mn = idx.size
        yn = yb[idx]
        cnt = np.bincount(yn, minlength=n_classes)
        counts[nid] = cnt
        if (
            (0 <= max_depth <= depth)
            or mn < 2 * min_leaf
            or cnt.max() == mn
        ):
            continue
        cand = _candidates(rng, nf, k_features)
        best_f, best_thr, best_w = -1, 0.0, math.inf
        tpos = np.arange(1, mn)
        tf = tpos.astype(np.float64)
        rf = (mn - tpos).astype(np.float64)
        for f in cand:
            vals = Xb[idx, f]
            order = np.argsort(vals)
            sv = vals[order]
            sy = yn[order]
            valid = sv[:-1] < sv[1:]
            valid &= (tpos >= min_leaf) & (mn - tpos >= min_leaf)
            if not valid.any():
                continue
            lcc = np.cumsum(eye[sy[:-1]], axis=0)
            accl = np.zeros(mn - 1)
            accr = np.zeros(mn - 1)
            for c in range(n_classes):
                pl = lcc[:, c] / tf
                accl = accl + pl * pl
                pr = (cnt[c] - lcc[:, c]) / rf
                accr = accr + pr * pr
            wsum = (tf * (1.0 - accl) + rf * (1.0 - accr)) / float(mn)
            wsum = np.where(valid, wsum, math.inf)
            tb = int(np.argmin(wsum))
            if wsum[tb] < best_w:
                best_w = float(wsum[tb])
                best_f = f
                best_thr = 0.5 * (sv[tb] + sv[tb + 1])
        if best_f < 0:
            # no candidate column had a valid boundary (all constant)
            continue
        mask = Xb[idx, best_f] <= best_thr
        li, ri = idx[mask], idx[~mask]
        if li.size == 0 or ri.size == 0:
            continue
        feature[nid] = best_f
        threshold[nid] = best_thr
        lid, rid = node_count, node_count + 1
        node_count += 2
        left[nid], right[nid] = lid, rid
        stack.append((ri, depth + 1, rid))
        stack.append((li, depth + 1, lid))

    return (
        feature[:node_count].copy(),
        threshold[:node_count].copy(),
        left[:node_count].copy(),
        right[:node_count].copy(),
        counts[:node_count].copy(),
        node_count,
    )
