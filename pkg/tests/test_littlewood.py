import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from littlewood_lab.errors import ConfigError, DomainError, EmptyInputError
from littlewood_lab.littlewood import (SignSequence, brute_sup_norm, evaluate, even_odd_split,
                                       max_partial_sum_diff, partial_sums, profile, read_polynomials,
                                       scale_sequence, sup_norm, write_polynomials)
from littlewood_lab.rng import SeedSpec

signs = st.lists(st.sampled_from([-1, 1]), min_size=1, max_size=80).map(SignSequence)
signs_deg1 = st.lists(st.sampled_from([-1, 1]), min_size=2, max_size=80).map(SignSequence)


def poly(*c):
    return SignSequence(np.array(c))


@pytest.mark.parametrize("coeffs,x,expected", [((1, 1, 1), 1.0, 3.0), ((1, -1), -1.0, 2.0),
                                               ((1, 1, -1), 0.5, 1.25)])
def test_evaluate_examples(coeffs, x, expected):
    assert evaluate(poly(*coeffs), x) == expected


def test_evaluate_rejects_outside_interval():
    with pytest.raises(DomainError):
        evaluate(poly(1, 1), 1.5)


def test_sign_sequence_validation():
    with pytest.raises(ConfigError):
        SignSequence(np.array([1, 0, -1]))
    with pytest.raises(EmptyInputError):
        SignSequence(np.array([], dtype=int))


def test_text_round_trip(tmp_path):
    polys = [SignSequence.random(SeedSpec(5, "io", i), 12) for i in range(4)]
    path = tmp_path / "p.txt"
    write_polynomials(path, polys)
    assert read_polynomials(path) == polys


@pytest.mark.parametrize("coeffs,value,x", [((1, 1, 1), 3.0, 1.0), ((1, -1, 1, -1), 4.0, -1.0)])
def test_sup_norm_examples(coeffs, value, x):
    res = sup_norm(poly(*coeffs))
    assert res.value == pytest.approx(value, rel=1e-12)
    assert res.argmax_x == pytest.approx(x)


def test_sup_norm_matches_brute_force_oracle():
    worst = 0.0
    for i in range(50):
        p = SignSequence.random(SeedSpec(11, "oracle", i), 32)
        worst = max(worst, abs(sup_norm(p).value / brute_sup_norm(p).value - 1))
    assert worst <= 1e-9


def test_profile_examples():
    p = SignSequence.random(SeedSpec(3, "prof"), 40)
    assert profile(p, 0.0) == pytest.approx(p.coeffs.sum() / math.sqrt(40), abs=1e-14)
    # only eps_0 survives as t grows: 1/sqrt(3) for the all-ones cubic
    assert profile(poly(1, 1, 1, 1), 400.0) == pytest.approx(1 / math.sqrt(3), rel=1e-12)
    with pytest.raises(DomainError):
        profile(p, -1.0)


def test_profile_identity_on_random_polynomials():
    t = np.concatenate([[0.0], np.geomspace(1e-4, 3 * 32, 20000)])
    for i in range(50):
        p = SignSequence.random(SeedSpec(12, "identity", i), 32)
        n = p.degree
        via = max(1.0, math.sqrt(n) * np.abs(profile(p, t, 1)).max(),
                  math.sqrt(n) * np.abs(profile(p, t, -1)).max())
        assert via <= sup_norm(p).value * (1 + 1e-12)
        assert via == pytest.approx(sup_norm(p).value, rel=1e-6)


def test_even_odd_examples():
    E, O = even_odd_split(poly(1, 1))
    assert E(0.0) == pytest.approx(1.0)
    p = SignSequence.random(SeedSpec(6, "eo"), 64)
    c = p.coeffs.copy()
    c[7] *= -1
    E2, _ = even_odd_split(SignSequence(c))
    t = np.linspace(0, 100, 50)
    assert np.array_equal(even_odd_split(p)[0](t), E2(t))


def test_even_odd_reconstruction_random():
    t = np.geomspace(1e-3, 200, 300)
    for i in range(20):
        p = SignSequence.random(SeedSpec(7, "eo", i), 64)
        E, O = even_odd_split(p)
        assert np.allclose(E(t) + O(t), profile(p, t, 1), rtol=0, atol=1e-13)
        assert np.allclose(E(t) - O(t), profile(p, t, -1), rtol=0, atol=1e-13)


@pytest.mark.parametrize("coeffs,expected", [((1, 1, 1, 1), 3), ((1, -1, 1, -1), 1)])
def test_partial_sum_examples(coeffs, expected):
    assert max_partial_sum_diff(poly(*coeffs), 0, 3) == expected


def test_partial_sum_argument_errors():
    with pytest.raises(ConfigError):
        max_partial_sum_diff(poly(1, 1, 1), 2, 2)


def test_difference_bound_on_random_triples():
    rng = np.random.default_rng(8)
    x = np.linspace(0, 1, 4001)
    for i in range(200):
        p = SignSequence.random(SeedSpec(8, "diff", i), 60)
        m, n = sorted(rng.choice(61, size=2, replace=False))
        c = p.coeffs.astype(float)
        gap = np.polynomial.polynomial.polyval(x, c[: n + 1]) - np.polynomial.polynomial.polyval(x, c[: m + 1])
        assert np.abs(gap).max() <= max_partial_sum_diff(p, m, n) + 1e-12


def test_scale_sequence_values():
    triple = scale_sequence(16, lambda p: 0.5)
    # (log log 16)^(1/3) = 1.0197814^(1/3) = 1.0065508
    assert triple.s_n == pytest.approx(1.0065508, abs=1e-7)
    assert scale_sequence(10**6, lambda p: p).p_n == pytest.approx(0.2690398, abs=1e-6)
    with pytest.raises(DomainError):
        scale_sequence(15, lambda p: 0.5)


@given(signs)
def test_sup_norm_bounds_and_symmetries(p):
    v = sup_norm(p).value
    assert 1.0 - 1e-12 <= v <= p.degree + 1 + 1e-9
    assert sup_norm(p.negated()).value == pytest.approx(v, rel=1e-10)
    assert sup_norm(p.alternated()).value == pytest.approx(v, rel=1e-10)


@given(st.integers(0, 200))
def test_all_ones_attains_maximum(n):
    assert sup_norm(SignSequence(np.ones(n + 1, dtype=int))).value == pytest.approx(n + 1, rel=1e-12)


@given(signs_deg1, st.floats(0, 1e4))
def test_partial_sums_exact(p, t):
    s = partial_sums(p)
    assert s.dtype == np.int64 and s[-1] == int(p.coeffs.astype(int).sum())
    assert abs(profile(p, t, 1)) <= (p.degree + 1) / math.sqrt(p.degree)
