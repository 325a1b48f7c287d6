import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from littlewood_lab.errors import ConfigError, EmptyInputError
from littlewood_lab.rng import (SeedSpec, chunk_sizes, gaussian_stream, map_ordered, pairwise_sum,
                                philox_key, rademacher_stream)

seeds = st.builds(SeedSpec, st.integers(0, 2**64 - 1), st.text("abcxyz-_", min_size=1, max_size=12),
                  st.integers(0, 10**6))


def test_rademacher_deterministic():
    s = SeedSpec(17, "coeffs")
    a, b = rademacher_stream(s, 8), rademacher_stream(s, 8)
    assert a.dtype == np.int8 and np.array_equal(a, b)
    assert set(np.unique(a)) <= {-1, 1}


def test_rademacher_mean_within_clt_bound():
    x = rademacher_stream(SeedSpec(1, "mean"), 10**6).astype(float)
    assert abs(x.mean()) <= 0.004


def test_replica_streams_uncorrelated():
    base = SeedSpec(2, "corr")
    a = rademacher_stream(base.replica(0), 10**5).astype(float)
    b = rademacher_stream(base.replica(1), 10**5).astype(float)
    assert abs(np.corrcoef(a, b)[0, 1]) <= 0.01


def test_labelled_streams_uncorrelated():
    a = gaussian_stream(SeedSpec(3, "left"), 10**5)
    b = gaussian_stream(SeedSpec(3, "right"), 10**5)
    assert abs(np.corrcoef(a, b)[0, 1]) <= 3 / np.sqrt(10**5)


def test_gaussian_moments():
    z = gaussian_stream(SeedSpec(4, "moments"), 10**6)
    assert np.array_equal(z, gaussian_stream(SeedSpec(4, "moments"), 10**6))
    assert 0.99 <= z.var() <= 1.01
    assert 2.9 <= np.mean(z ** 4) <= 3.1


@pytest.mark.parametrize("fn", [rademacher_stream, gaussian_stream])
def test_zero_length_is_empty_input(fn):
    with pytest.raises(EmptyInputError):
        fn(SeedSpec(0), 0)


def test_seed_validation():
    with pytest.raises(ConfigError):
        SeedSpec(2**64)
    with pytest.raises(ConfigError):
        SeedSpec(1, "x", -1)
    with pytest.raises(ConfigError):
        SeedSpec(1, "é")


@given(seeds, st.integers(1, 300), st.integers(1, 300))
def test_rademacher_prefix_consistent(seed, n, extra):
    assert np.array_equal(rademacher_stream(seed, n + extra)[:n], rademacher_stream(seed, n))


@given(seeds)
def test_seed_dict_round_trip(seed):
    assert SeedSpec.from_dict(seed.to_dict()) == seed
    assert np.array_equal(philox_key(seed), philox_key(SeedSpec.from_dict(seed.to_dict())))


@given(seeds)
def test_keys_differ_across_replicas(seed):
    assert not np.array_equal(philox_key(seed), philox_key(seed.replica(seed.replica_index + 1)))


@given(st.integers(1, 10**5), st.integers(1, 5000))
def test_chunk_sizes_partition(total, chunk):
    sizes = chunk_sizes(total, chunk)
    assert sum(sizes) == total and all(0 < s <= chunk for s in sizes)


@given(st.lists(st.integers(-1000, 1000), max_size=40))
def test_pairwise_sum_exact_on_integers(vals):
    assert pairwise_sum(vals) == sum(vals)


def test_map_ordered_thread_invariant():
    fn = lambda i: float(gaussian_stream(SeedSpec(9, "m", i), 1000).sum())
    assert map_ordered(fn, range(12), 1) == map_ordered(fn, range(12), 4)
