"""Shared test oracles: dense-matrix circuit simulation built from explicit
tensor products (independent of the stride-based kernels), exhaustive chain
enumeration, and synthetic dataset builders."""

from __future__ import annotations

import itertools
import math

import numpy as np
import pytest

from dqfe.dataset import FeatureTable
from dqfe.mi_graph import MiMatrix, chain_weight

I2 = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)


def operator_on(n: int, ops: dict) -> np.ndarray:
    """Tensor product with ops[q] on qubit q (qubit 0 = least significant)."""
    out = np.array([[1.0]], dtype=complex)
    for q in range(n):
        out = np.kron(ops.get(q, I2), out)
    return out


def dense_gate_matrix(gate, n: int) -> np.ndarray:
    """Full 2^n unitary of one gate, from cos/sin of the Pauli string."""
    if gate.kind == "h":
        return operator_on(n, {gate.qubits[0]: HADAMARD})
    if gate.kind == "ry":
        pauli = operator_on(n, {gate.qubits[0]: PAULI_Y})
    elif gate.kind == "rx":
        pauli = operator_on(n, {gate.qubits[0]: PAULI_X})
    elif gate.kind == "rzz":
        i, j = gate.qubits
        pauli = operator_on(n, {i: PAULI_Z, j: PAULI_Z})
    elif gate.kind == "ryz":
        y, z = gate.qubits
        pauli = operator_on(n, {y: PAULI_Y, z: PAULI_Z})
    else:
        raise ValueError(gate.kind)
    half = gate.angle / 2.0
    return math.cos(half) * np.eye(1 << n) - 1j * math.sin(half) * pauli


def dense_circuit_unitary(circuit) -> np.ndarray:
    u = np.eye(1 << circuit.n, dtype=complex)
    for g in circuit.gates:
        u = dense_gate_matrix(g, circuit.n) @ u
    return u


def dense_minus_state(n: int) -> np.ndarray:
    v = np.array([1.0, -1.0]) / math.sqrt(2)
    out = np.array([1.0])
    for _ in range(n):
        out = np.kron(v, out)
    return out.astype(complex)


def dense_run(circuit) -> np.ndarray:
    return dense_circuit_unitary(circuit) @ dense_minus_state(circuit.n)


def exhaustive_chain_optimum(mi: MiMatrix) -> float:
    """Best chain weight over all orderings (reversal symmetry halved)."""
    n = mi.n
    best = -math.inf
    for perm in itertools.permutations(range(n)):
        if perm[0] > perm[-1]:
            continue
        w = chain_weight(perm, mi)
        if w > best:
            best = w
    return best


def random_mi_matrix(n: int, seed: int, bins: int = 8) -> MiMatrix:
    rng = np.random.default_rng(seed)
    w = rng.uniform(0.0, 1.0, size=(n, n))
    w = np.triu(w, 1)
    w = w + w.T
    diag = rng.uniform(1.0, 3.0, size=n)
    w[np.diag_indices(n)] = diag
    return MiMatrix(w, bins)


def gaussian_blob_table(
    n_classes: int = 5,
    n_features: int = 15,
    train_per_class: int = 200,
    test_per_class: int = 40,
    seed: int = 0,
    overlap_pair: tuple = (0, 1),
    overlap_dist: float = 1.2,
    separation: float = 6.0,
) -> FeatureTable:
    """Balanced Gaussian class blobs with one deliberately overlapping pair."""
    rng = np.random.default_rng(seed)
    means = rng.normal(size=(n_classes, n_features))
    means /= np.linalg.norm(means, axis=1, keepdims=True)
    means *= separation
    a, b = overlap_pair
    direction = rng.normal(size=n_features)
    direction /= np.linalg.norm(direction)
    means[b] = means[a] + overlap_dist * direction
    feats, labels, split = [], [], []
    for c in range(n_classes):
        pts = means[c] + rng.normal(size=(train_per_class + test_per_class, n_features))
        feats.append(pts)
        labels.extend([c] * (train_per_class + test_per_class))
        split.extend(["train"] * train_per_class + ["test"] * test_per_class)
    return FeatureTable(
        np.vstack(feats),
        np.array(labels),
        np.array(split),
        tuple(f"f{i}" for i in range(n_features)),
    )


def simple_table(X, y, split=None, n_classes: int = 0) -> FeatureTable:
    X = np.asarray(X, dtype=np.float64)
    if split is None:
        split = ["train"] * X.shape[0]
    return FeatureTable(
        X,
        np.asarray(y),
        np.asarray(split),
        tuple(f"f{i}" for i in range(X.shape[1])),
        n_classes,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
