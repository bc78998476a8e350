"""Exact statevector simulation, shot sampling, and Z expectations.

Conventions (project-wide): qubit 0 is the least significant statevector
index bit; Z eigenvalues map bit 0 -> +1, bit 1 -> -1; bitstring keys put
qubit 0 in the FIRST character.  Shot sampling runs on SplitMix64
(see :mod:`dqfe.rng`), so counts are bit-reproducible across platforms.

Simulation is capped at a desk-scale qubit count (default 24); wider
systems are deliberately out of reach of this simulator.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import kernels
from .cd_circuit import Gate, QuantumCircuit
from .rng import doubles_stream

MAX_QUBITS_DEFAULT = 24

_NORM_TOL = 1e-10


@dataclass
class Statevector:
    n: int
    amps: np.ndarray

    def __post_init__(self):
        a = np.ascontiguousarray(np.asarray(self.amps, dtype=np.complex128))
        if a.shape != (1 << self.n,):
            raise ValueError(f"expected {1 << self.n} amplitudes, got {a.shape}")
        self.amps = a

    def norm_sq(self) -> float:
        a = self.amps
        return float(np.sum(a.real * a.real + a.imag * a.imag))

    def probabilities(self) -> np.ndarray:
        a = self.amps
        return a.real * a.real + a.imag * a.imag

    def copy(self) -> "Statevector":
        return Statevector(self.n, self.amps.copy())


def _check_n(n: int, max_qubits: int) -> None:
    if not (1 <= n <= max_qubits):
        raise ValueError(
            f"n={n} is outside the desk-scale cap (1..{max_qubits} qubits)"
        )


def init_minus_state(n: int, max_qubits: int = MAX_QUBITS_DEFAULT) -> Statevector:
    """All-|-> product state: amplitude (-1)^popcount(k) / 2^(n/2)."""
    _check_n(n, max_qubits)
    k = np.arange(1 << n, dtype=np.uint64)
    par = k.copy()
    for shift in (32, 16, 8, 4, 2, 1):
        par ^= par >> np.uint64(shift)
    signs = 1.0 - 2.0 * (par & np.uint64(1)).astype(np.float64)
    amps = (signs * 2.0 ** (-n / 2.0)).astype(np.complex128)
    return Statevector(n, amps)


def init_plus_state(n: int, max_qubits: int = MAX_QUBITS_DEFAULT) -> Statevector:
    """All-|+> product state (mixer sign convention ``minus``)."""
    _check_n(n, max_qubits)
    amps = np.full(1 << n, 2.0 ** (-n / 2.0), dtype=np.complex128)
    return Statevector(n, amps)


def apply_gate(state: Statevector, gate: Gate) -> Statevector:
    """Multiply the state by the gate's unitary.

    Updates the amplitude buffer in place and returns the same object;
    treat the input as consumed.
    """
    if gate.max_qubit >= state.n:
        raise ValueError(f"gate {gate} outside qubit range 0..{state.n - 1}")
    a = state.amps
    if gate.kind == "ry":
        kernels.apply_ry(a, gate.qubits[0], gate.angle)
    elif gate.kind == "rx":
        kernels.apply_rx(a, gate.qubits[0], gate.angle)
    elif gate.kind == "h":
        kernels.apply_h(a, gate.qubits[0])
    elif gate.kind == "rzz":
        kernels.apply_rzz(a, gate.qubits[0], gate.qubits[1], gate.angle)
    elif gate.kind == "ryz":
        kernels.apply_ryz(a, gate.qubits[0], gate.qubits[1], gate.angle)
    else:  # pragma: no cover - Gate validates kinds
        raise ValueError(f"unknown gate kind {gate.kind!r}")
    assert abs(state.norm_sq() - 1.0) < _NORM_TOL, "statevector norm drifted"
    return state


def run(
    circuit: QuantumCircuit,
    max_qubits: int = MAX_QUBITS_DEFAULT,
    initial: str = "minus",
) -> Statevector:
    """Prepare the mixer ground state and apply the circuit's gates in order."""
    if initial == "minus":
        state = init_minus_state(circuit.n, max_qubits)
    elif initial == "plus":
        state = init_plus_state(circuit.n, max_qubits)
    else:
        raise ValueError(f"initial must be 'minus' or 'plus', got {initial!r}")
    for gate in circuit.gates:
        state = apply_gate(state, gate)
    return state


def _axis(n: int, q: int) -> int:
    # C-order reshape to [2]*n puts qubit n-1 on axis 0.
    return n - 1 - q


def exact_z_expectations(state: Statevector, pairs) -> tuple:
    """(<Z_i> for all qubits, <Z_i Z_j> for each requested pair)."""
    n = state.n
    probs = state.probabilities().reshape([2] * n)
    one = np.empty(n)
    all_axes = set(range(n))
    for q in range(n):
        marg = probs.sum(axis=tuple(sorted(all_axes - {_axis(n, q)})))
        one[q] = marg[0] - marg[1]
    two = np.empty(len(pairs))
    for e, (i, j) in enumerate(pairs):
        if i == j or not (0 <= i < n and 0 <= j < n):
            raise ValueError(f"invalid qubit pair ({i},{j})")
        keep = {_axis(n, i), _axis(n, j)}
        marg = probs.sum(axis=tuple(sorted(all_axes - keep)))
        two[e] = marg[0, 0] + marg[1, 1] - marg[0, 1] - marg[1, 0]
    return np.clip(one, -1.0, 1.0), np.clip(two, -1.0, 1.0)


@dataclass(frozen=True)
class ShotCounts:
    """Measurement outcome histogram; keys put qubit 0 in the first char."""

    counts: dict
    shots: int
    n: int

    def __post_init__(self):
        if self.shots < 1:
            raise ValueError("shots must be positive")
        total = 0
        for key, c in self.counts.items():
            if len(key) != self.n or any(ch not in "01" for ch in key):
                raise ValueError(f"bad bitstring key {key!r} for n={self.n}")
            if c < 0:
                raise ValueError("counts must be non-negative")
            total += c
        if total != self.shots:
            raise ValueError(f"counts sum to {total}, expected shots={self.shots}")

    def to_json(self) -> str:
        return json.dumps(
            {"shots": self.shots, "counts": self.counts}, sort_keys=True, indent=2
        )

    @classmethod
    def from_json(cls, text: str) -> "ShotCounts":
        d = json.loads(text)
        counts = {str(k): int(v) for k, v in d["counts"].items()}
        if not counts:
            raise ValueError("counts must be non-empty")
        n = len(next(iter(counts)))
        return cls(counts, int(d["shots"]), n)


def _bitstring(k: int, n: int) -> str:
    return "".join("1" if (k >> q) & 1 else "0" for q in range(n))


def sample_shots(state: Statevector, shots: int, seed: int) -> ShotCounts:
    """Draw i.i.d. Z-basis outcomes by inverse CDF on a seeded SplitMix64."""
    if shots < 1:
        raise ValueError("shots must be positive")
    cdf = np.cumsum(state.probabilities())
    us = doubles_stream(seed, shots)
    idx = np.searchsorted(cdf, us, side="right")
    np.minimum(idx, (1 << state.n) - 1, out=idx)
    values, counts = np.unique(idx, return_counts=True)
    out = {_bitstring(int(k), state.n): int(c) for k, c in zip(values, counts)}
    return ShotCounts(out, shots, state.n)


def estimate_z_expectations(counts: ShotCounts, pairs) -> tuple:
    """Empirical means of s_i and s_i*s_j over the recorded shots.

    Accumulation is exact (integer) before the final division, so the
    result is independent of key order.
    """
    if not counts.counts:
        raise ValueError("empty counts")
    n = counts.n
    one_acc = np.zeros(n, dtype=np.int64)
    two_acc = np.zeros(len(pairs), dtype=np.int64)
    pl = list(pairs)
    for i, j in pl:
        if i == j or not (0 <= i < n and 0 <= j < n):
            raise ValueError(f"invalid qubit pair ({i},{j})")
    for key in sorted(counts.counts):
        c = counts.counts[key]
        s = np.array([1 - 2 * int(ch) for ch in key], dtype=np.int64)
        one_acc += c * s
        for e, (i, j) in enumerate(pl):
            two_acc[e] += c * s[i] * s[j]
    return one_acc / counts.shots, two_acc / counts.shots
