import numpy as np

from dqfe.rng import SplitMix64, derive_seed, doubles_stream, mix64


def test_scalar_and_vector_streams_agree():
    for seed in (0, 1, 2**63, 0xDEADBEEF):
        s = SplitMix64(seed)
        scalar = [s.next_double() for _ in range(200)]
        vector = doubles_stream(seed, 200)
        assert np.array_equal(np.array(scalar), vector)


def test_skip_matches_draws():
    a = SplitMix64(99)
    b = SplitMix64(99)
    for _ in range(17):
        a.next_double()
    b.skip(17)
    assert a.state == b.state
    assert a.next_u64() == b.next_u64()


def test_doubles_in_unit_interval():
    us = doubles_stream(7, 10000)
    assert us.min() >= 0.0 and us.max() < 1.0
    # roughly uniform
    assert abs(us.mean() - 0.5) < 0.02


def test_randbelow_bounds():
    rng = SplitMix64(5)
    draws = [rng.randbelow(7) for _ in range(1000)]
    assert min(draws) == 0 and max(draws) == 6


def test_derive_seed_spreads():
    seeds = {derive_seed(42, i) for i in range(1000)}
    assert len(seeds) == 1000
    assert derive_seed(42, 1) != derive_seed(43, 1)


def test_mix64_is_deterministic():
    assert mix64(0) == mix64(0)
    assert mix64(1) != mix64(2)


def test_shuffle_is_a_permutation():
    rng = SplitMix64(11)
    items = list(range(50))
    rng.shuffle(items)
    assert sorted(items) == list(range(50))
    assert items != list(range(50))
