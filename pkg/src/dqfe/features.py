"""Per-sample quantum feature extraction and hybrid table assembly.

Each table row is encoded into its own Hamiltonian, quenched by one
impulse circuit, and measured; the resulting one-body values <Z_i> and
pair correlations <Z_i Z_j> become the columns z_i and zz_i_j of a new
feature table.  Rows are independent, so extraction parallelizes across
samples; results are gathered in input order and never depend on the
schedule.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .cd_circuit import ImpulseParams, build_cd_circuit
from .dataset import FeatureTable
from .encoder import encode_hamiltonian
from .mi_graph import InteractionGraph
from .rng import derive_seed
from .simulator import (
    MAX_QUBITS_DEFAULT,
    ShotCounts,
    estimate_z_expectations,
    exact_z_expectations,
    run,
    sample_shots,
)

MODES = ("exact", "sampled")
PAIR_SCOPES = ("edges", "all_pairs")

_SHOT_TAG = 0x51C7


@dataclass(frozen=True)
class QuantumFeatureVector:
    one_body: np.ndarray
    two_body: np.ndarray
    sample_id: int

    def __post_init__(self):
        for arr in (self.one_body, self.two_body):
            a = np.asarray(arr, dtype=np.float64)
            if a.size and (a.min() < -1.0 or a.max() > 1.0):
                raise ValueError("expectation values must lie in [-1, 1]")

    def flatten(self) -> np.ndarray:
        return np.concatenate([self.one_body, self.two_body])


def measurement_pairs(graph: InteractionGraph, pair_scope: str) -> list:
    if pair_scope == "edges":
        return [(i, j) for i, j, _ in graph.edges]
    if pair_scope == "all_pairs":
        n = graph.n
        return [(i, j) for i in range(n) for j in range(i + 1, n)]
    raise ValueError(f"pair_scope must be one of {PAIR_SCOPES}, got {pair_scope!r}")


def quantum_column_names(n: int, pairs) -> tuple:
    return tuple([f"z_{q}" for q in range(n)] + [f"zz_{i}_{j}" for i, j in pairs])


def default_threads() -> int:
    env = os.environ.get("DQFE_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def extract_quantum_features(
    table: FeatureTable,
    graph: InteractionGraph,
    params: ImpulseParams = ImpulseParams(),
    shots: int = 4096,
    mode: str = "exact",
    pair_scope: str = "edges",
    seed: int = 0,
    threads: int | None = None,
    transverse_sign: str = "plus",
    max_qubits: int = MAX_QUBITS_DEFAULT,
    counts_sink: list | None = None,
) -> FeatureTable:
    """Quench-and-measure every row (train and test) of a scaled table.

    ``exact`` mode reads expectations off the statevector; ``sampled``
    mode draws ``shots`` outcomes per row with a seed derived from
    (seed, row index).  Pass a list as ``counts_sink`` to capture the
    per-sample ShotCounts for audit or replay.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if table.n_features != graph.n:
        raise ValueError(
            f"table has {table.n_features} columns but graph expects {graph.n}"
        )
    pairs = measurement_pairs(graph, pair_scope)
    initial = "minus" if transverse_sign == "plus" else "plus"

    def one_row(r: int):
        h = encode_hamiltonian(table.features[r], graph)
        circuit = build_cd_circuit(h, params, sample_id=r)
        state = run(circuit, max_qubits=max_qubits, initial=initial)
        if mode == "exact":
            one, two = exact_z_expectations(state, pairs)
            return one, two, None
        counts = sample_shots(state, shots, derive_seed(derive_seed(seed, _SHOT_TAG), r))
        one, two = estimate_z_expectations(counts, pairs)
        return one, two, counts

    n_workers = threads if threads else default_threads()
    rows = range(table.n_rows)
    if n_workers > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(one_row, rows))
    else:
        results = [one_row(r) for r in rows]

    feats = np.empty((table.n_rows, graph.n + len(pairs)))
    for r, (one, two, counts) in enumerate(results):
        feats[r, : graph.n] = one
        feats[r, graph.n :] = two
        if counts_sink is not None and counts is not None:
            counts_sink.append(counts)
    return FeatureTable(
        feats,
        table.labels,
        table.split,
        quantum_column_names(graph.n, pairs),
        table.n_classes,
    )


def features_from_counts(
    table: FeatureTable,
    graph: InteractionGraph,
    counts_list,
    pair_scope: str = "edges",
) -> FeatureTable:
    """Rebuild the quantum feature table from recorded ShotCounts (replay
    path for externally executed circuits); no simulation involved."""
    pairs = measurement_pairs(graph, pair_scope)
    if len(counts_list) != table.n_rows:
        raise ValueError(
            f"need {table.n_rows} counts objects, got {len(counts_list)}"
        )
    feats = np.empty((table.n_rows, graph.n + len(pairs)))
    for r, counts in enumerate(counts_list):
        if not isinstance(counts, ShotCounts):
            raise ValueError(f"counts entry {r} is not ShotCounts")
        if counts.n != graph.n:
            raise ValueError(
                f"counts entry {r} has {counts.n} qubits, graph expects {graph.n}"
            )
        one, two = estimate_z_expectations(counts, pairs)
        feats[r, : graph.n] = one
        feats[r, graph.n :] = two
    return FeatureTable(
        feats,
        table.labels,
        table.split,
        quantum_column_names(graph.n, pairs),
        table.n_classes,
    )


def make_hybrid(classical: FeatureTable, quantum: FeatureTable) -> FeatureTable:
    """Column-wise concatenation, classical first, prefixed c_/q_."""
    if classical.n_rows != quantum.n_rows:
        raise ValueError(
            f"row count mismatch: {classical.n_rows} vs {quantum.n_rows}"
        )
    if not np.array_equal(classical.labels, quantum.labels):
        raise ValueError("label mismatch between classical and quantum tables")
    if not np.array_equal(classical.split, quantum.split):
        raise ValueError("split-tag mismatch between classical and quantum tables")
    names = tuple(
        [f"c_{c}" for c in classical.column_names]
        + [f"q_{c}" for c in quantum.column_names]
    )
    return FeatureTable(
        np.hstack([classical.features, quantum.features]),
        classical.labels,
        classical.split,
        names,
        max(classical.n_classes, quantum.n_classes),
    )
