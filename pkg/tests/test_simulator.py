import math

import numpy as np
import pytest

from conftest import (
    dense_gate_matrix,
    dense_minus_state,
    dense_run,
    operator_on,
    PAULI_X,
)
from dqfe.cd_circuit import Gate, ImpulseParams, QuantumCircuit, build_cd_circuit
from dqfe.encoder import IsingHamiltonian
from dqfe.rng import SplitMix64
from dqfe.simulator import (
    ShotCounts,
    Statevector,
    apply_gate,
    estimate_z_expectations,
    exact_z_expectations,
    init_minus_state,
    init_plus_state,
    run,
    sample_shots,
)


def random_state(rng, n):
    a = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    a /= np.linalg.norm(a)
    return Statevector(n, a)


def test_minus_state_n1():
    s = init_minus_state(1)
    assert np.allclose(s.amps, [1 / math.sqrt(2), -1 / math.sqrt(2)])


def test_minus_state_n2():
    s = init_minus_state(2)
    assert np.allclose(s.amps, [0.5, -0.5, -0.5, 0.5])


def test_minus_state_x_polarization():
    s = init_minus_state(3)
    for q in range(3):
        x_full = operator_on(3, {q: PAULI_X})
        val = np.real(np.vdot(s.amps, x_full @ s.amps))
        assert val == pytest.approx(-1.0, abs=1e-12)


def test_plus_state_uniform():
    s = init_plus_state(2)
    assert np.allclose(s.amps, 0.5)


def test_desk_scale_cap():
    with pytest.raises(ValueError) as err:
        init_minus_state(25)
    assert "desk-scale cap" in str(err.value)
    with pytest.raises(ValueError):
        init_minus_state(0)
    with pytest.raises(ValueError):
        init_minus_state(5, max_qubits=4)  # cap is configurable
    assert init_minus_state(12, max_qubits=12).n == 12


def test_apply_identity_ry():
    rng = np.random.default_rng(0)
    s = random_state(rng, 3)
    before = s.amps.copy()
    apply_gate(s, Gate("ry", (1,), 0.0))
    assert np.array_equal(s.amps, before)


@pytest.mark.parametrize(
    "gate",
    [
        Gate("ry", (0,), 0.83),
        Gate("rx", (2,), -0.31),
        Gate("rzz", (0, 2), 1.24),
        Gate("ryz", (1, 2), 0.56),
        Gate("ryz", (2, 0), -0.97),
        Gate("h", (1,)),
    ],
)
def test_gate_inverse_restores_state(gate):
    rng = np.random.default_rng(5)
    s = random_state(rng, 3)
    before = s.amps.copy()
    apply_gate(s, gate)
    if gate.kind == "h":
        apply_gate(s, gate)
    else:
        apply_gate(s, Gate(gate.kind, gate.qubits, -gate.angle))
    assert np.abs(s.amps - before).max() < 1e-12


@pytest.mark.parametrize(
    "gate",
    [
        Gate("ry", (1,), 0.71),
        Gate("rx", (0,), 1.3),
        Gate("h", (2,)),
        Gate("rzz", (0, 1), 0.9),
        Gate("rzz", (2, 0), -0.4),
        Gate("ryz", (0, 2), 0.65),
        Gate("ryz", (2, 1), -1.1),
    ],
)
def test_gate_matches_dense_matrix(gate):
    rng = np.random.default_rng(17)
    s = random_state(rng, 3)
    expect = dense_gate_matrix(gate, 3) @ s.amps
    apply_gate(s, gate)
    assert np.abs(s.amps - expect).max() < 1e-12


def test_apply_gate_rejects_out_of_range():
    s = init_minus_state(2)
    with pytest.raises(ValueError):
        apply_gate(s, Gate("ry", (2,), 0.1))


def test_norm_preserved_through_circuit(rng):
    h = IsingHamiltonian(
        rng.uniform(-1, 1, size=4), ((0, 1, 0.5), (1, 2, 0.25), (2, 3, 0.75))
    )
    state = run(build_cd_circuit(h, ImpulseParams(theta=0.9)))
    assert abs(state.norm_sq() - 1.0) < 1e-10


def test_run_empty_circuit():
    state = run(QuantumCircuit(3))
    assert np.array_equal(state.amps, init_minus_state(3).amps)


def test_run_matches_dense_oracle(rng):
    for _ in range(8):
        n = int(rng.integers(1, 5))
        fields = rng.uniform(-1, 1, size=n)
        couplings = tuple((i, i + 1, float(rng.uniform(0, 1))) for i in range(n - 1))
        c = build_cd_circuit(IsingHamiltonian(fields, couplings), ImpulseParams(theta=0.5))
        assert np.abs(run(c).amps - dense_run(c)).max() < 1e-10


def test_zero_impulse_returns_initial_state_exactly():
    h = IsingHamiltonian(np.array([0.3, -0.8]), ((0, 1, 0.4),))
    state = run(build_cd_circuit(h, ImpulseParams(theta=0.0)))
    assert np.array_equal(state.amps, init_minus_state(2).amps)


def test_exact_expectations_all_zeros_state():
    s = Statevector(3, np.eye(1, 8, 0, dtype=complex).ravel())  # |000>
    one, two = exact_z_expectations(s, [(0, 1), (1, 2), (0, 2)])
    assert np.all(one == 1.0)
    assert np.all(two == 1.0)


def test_exact_expectations_minus_state():
    one, two = exact_z_expectations(init_minus_state(3), [(0, 1), (0, 2)])
    assert np.all(one == 0.0)
    assert np.all(two == 0.0)


def test_exact_expectations_match_dense_contraction(rng):
    s = random_state(rng, 3)
    pairs = [(0, 1), (1, 2), (0, 2)]
    one, two = exact_z_expectations(s, pairs)
    probs = np.abs(s.amps) ** 2
    for q in range(3):
        signs = np.array([1.0 - 2.0 * ((k >> q) & 1) for k in range(8)])
        assert one[q] == pytest.approx(float(probs @ signs), abs=1e-12)
    for e, (i, j) in enumerate(pairs):
        signs = np.array(
            [(1.0 - 2.0 * ((k >> i) & 1)) * (1.0 - 2.0 * ((k >> j) & 1)) for k in range(8)]
        )
        assert two[e] == pytest.approx(float(probs @ signs), abs=1e-12)


def test_exact_expectations_global_phase_invariant(rng):
    s = random_state(rng, 3)
    pairs = [(0, 2)]
    one_a, two_a = exact_z_expectations(s, pairs)
    phase = np.exp(1j * 1.234)
    s2 = Statevector(3, s.amps * phase)
    one_b, two_b = exact_z_expectations(s2, pairs)
    assert np.abs(one_a - one_b).max() < 1e-12
    assert np.abs(two_a - two_b).max() < 1e-12


def test_exact_expectations_rejects_bad_pair():
    s = init_minus_state(2)
    with pytest.raises(ValueError):
        exact_z_expectations(s, [(0, 0)])


def test_sampling_deterministic_distribution():
    s = Statevector(2, np.array([1.0, 0.0, 0.0, 0.0], dtype=complex))
    counts = sample_shots(s, 100, seed=1)
    assert counts.counts == {"00": 100}


def test_sampling_concentration_single_qubit():
    counts = sample_shots(init_minus_state(1), 10**6, seed=7)
    for key in ("0", "1"):
        assert abs(counts.counts[key] / 10**6 - 0.5) < 0.005


def test_sampling_same_seed_identical():
    rng = np.random.default_rng(2)
    s = random_state(rng, 4)
    a = sample_shots(s, 4096, seed=99)
    b = sample_shots(s, 4096, seed=99)
    assert a == b
    c = sample_shots(s, 4096, seed=100)
    assert a != c


def test_sampling_bitstring_orientation():
    # state |10> in index terms: qubit0=1, qubit1=0 -> index 1
    amps = np.zeros(4, dtype=complex)
    amps[1] = 1.0
    counts = sample_shots(Statevector(2, amps), 10, seed=0)
    assert counts.counts == {"10": 10}


def test_estimate_all_shots_same_outcome():
    counts = ShotCounts({"00": 7}, 7, 2)
    one, two = estimate_z_expectations(counts, [(0, 1)])
    assert np.all(one == 1.0) and np.all(two == 1.0)


def test_estimate_hand_counts():
    counts = ShotCounts({"00": 50, "11": 50}, 100, 2)
    one, two = estimate_z_expectations(counts, [(0, 1)])
    assert np.array_equal(one, [0.0, 0.0])
    assert np.array_equal(two, [1.0])


def test_estimate_matches_empirical_distribution(rng):
    s = random_state(rng, 3)
    counts = sample_shots(s, 2048, seed=3)
    pairs = [(0, 1), (1, 2)]
    one, two = estimate_z_expectations(counts, pairs)
    # re-contract the empirical distribution as a diagonal mixed state
    probs = np.zeros(8)
    for key, c in counts.counts.items():
        k = sum(int(ch) << q for q, ch in enumerate(key))
        probs[k] = c / counts.shots
    emp = Statevector(3, np.sqrt(probs).astype(complex))
    e_one, e_two = exact_z_expectations(emp, pairs)
    assert np.abs(one - e_one).max() < 1e-12
    assert np.abs(two - e_two).max() < 1e-12


def test_estimator_consistency_binomial_bound(rng):
    trials = 0
    hits = 0
    for t in range(100):
        n = 3
        s = random_state(rng, n)
        exact_one, _ = exact_z_expectations(s, [])
        counts = sample_shots(s, 1024, seed=t)
        est_one, _ = estimate_z_expectations(counts, [])
        for q in range(n):
            trials += 1
            if abs(est_one[q] - exact_one[q]) <= 5.0 / math.sqrt(1024):
                hits += 1
    assert hits / trials >= 0.99


def test_shot_counts_validation():
    with pytest.raises(ValueError):
        ShotCounts({"00": 5}, 6, 2)
    with pytest.raises(ValueError):
        ShotCounts({"0x": 5}, 5, 2)
    with pytest.raises(ValueError):
        ShotCounts({"000": 5}, 5, 2)


def test_shot_counts_json_round_trip(rng):
    s = random_state(rng, 3)
    counts = sample_shots(s, 500, seed=11)
    back = ShotCounts.from_json(counts.to_json())
    assert back == counts


def test_estimate_rejects_empty():
    with pytest.raises(ValueError):
        estimate_z_expectations(ShotCounts({"0": 1}, 1, 1), [(0, 1)])


def test_splitmix_sampling_uses_documented_stream():
    # inverse-CDF with the documented SplitMix64 doubles
    s = init_minus_state(1)
    shots = 16
    counts = sample_shots(s, shots, seed=42)
    rng = SplitMix64(42)
    cdf = np.cumsum(np.abs(s.amps) ** 2)
    expect = {"0": 0, "1": 0}
    for _ in range(shots):
        u = rng.next_double()
        k = int(np.searchsorted(cdf, u, side="right"))
        expect["01"[min(k, 1)]] += 1
    assert {k: v for k, v in expect.items() if v} == counts.counts
