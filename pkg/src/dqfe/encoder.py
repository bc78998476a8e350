"""Per-sample spin-glass Hamiltonians from scaled feature vectors.

A feature vector x and the shared interaction graph G define the diagonal
operator

    H(x) = sum_i h_i Z_i + sum_{(i,j) in G} m_ij Z_i Z_j

with the fields h placed on qubits via the graph permutation
(``fields[p] = x[permutation[p]]``) and the couplings m copied verbatim
from the graph edges.

Project-wide sign conventions, shared by every module:
  * Z eigenvalues: bit 0 <-> +1, bit 1 <-> -1.
  * Qubit 0 is the least significant bit of a statevector index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mi_graph import InteractionGraph

SIGN_CONVENTIONS = ("plus", "minus")


@dataclass(frozen=True)
class TransverseFieldSpec:
    """Sign of the mixer H = +/- sum_i X_i; fixed at pipeline construction.

    ``plus`` starts circuits in the all-|-> product state, ``minus`` in
    all-|+>; the choice is recorded in provenance output.
    """

    sign_convention: str = "plus"

    def __post_init__(self):
        if self.sign_convention not in SIGN_CONVENTIONS:
            raise ValueError(f"sign_convention must be one of {SIGN_CONVENTIONS}")

    @property
    def initial_state(self) -> str:
        return "minus" if self.sign_convention == "plus" else "plus"


@dataclass(frozen=True)
class IsingHamiltonian:
    fields: np.ndarray
    couplings: tuple

    def __post_init__(self):
        h = np.asarray(self.fields, dtype=np.float64)
        if h.ndim != 1 or h.shape[0] < 1:
            raise ValueError("fields must be a non-empty 1-D vector")
        if not np.all(np.isfinite(h)):
            raise ValueError("fields must be finite")
        n = h.shape[0]
        cps = tuple((int(i), int(j), float(m)) for i, j, m in self.couplings)
        for i, j, m in cps:
            if i == j or not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"invalid coupling endpoints ({i},{j}) for n={n}")
            if m < 0.0:
                raise ValueError("coupling weights must be non-negative")
        h = h.copy()
        h.setflags(write=False)
        object.__setattr__(self, "fields", h)
        object.__setattr__(self, "couplings", cps)

    @property
    def n(self) -> int:
        return self.fields.shape[0]


def encode_hamiltonian(x, graph: InteractionGraph) -> IsingHamiltonian:
    """Place feature values on qubits per the graph permutation; copy couplings."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != graph.n:
        raise ValueError(
            f"feature vector length {x.shape} does not match graph qubit count {graph.n}"
        )
    fields = x[list(graph.permutation)]
    return IsingHamiltonian(fields, graph.edges)


def _signs(bits, n: int) -> np.ndarray:
    if isinstance(bits, str):
        if len(bits) != n or any(c not in "01" for c in bits):
            raise ValueError(f"bitstring must be {n} characters of 0/1, got {bits!r}")
        b = np.array([int(c) for c in bits], dtype=np.int64)
    else:
        b = np.asarray(bits, dtype=np.int64)
        if b.shape != (n,) or np.any((b != 0) & (b != 1)):
            raise ValueError(f"bit vector must be {n} entries of 0/1")
    return 1 - 2 * b


def hamiltonian_energy(h: IsingHamiltonian, bits) -> float:
    """Diagonal energy of a computational basis state (bit 0 <-> spin +1)."""
    s = _signs(bits, h.n)
    e = float(np.dot(h.fields, s))
    for i, j, m in h.couplings:
        e += m * s[i] * s[j]
    return e
