import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from littlewood_lab.envelope import (LIMINF_CONSTANT, batch_sup_norms, block_decompose_check,
                                     bridge_check, checkpoints, dyadic_mesh, envelope_seed,
                                     mesh_ratio, polyval_pointwise, run_envelope, sparse_sequence)
from littlewood_lab.errors import ConfigError, DomainError, RangeError
from littlewood_lab.littlewood import SignSequence, polyval_many, sup_norm
from littlewood_lab.rng import SeedSpec, rademacher_stream


class ConstantB:
    def __call__(self, p):
        return 0.5

    def branch(self, p):
        return "mc"


def random_poly(seed, degree):
    return SignSequence(rademacher_stream(SeedSpec(seed, "test-env"), degree + 1))


def test_mesh_hand_example():
    assert dyadic_mesh(16, 0.5).points.tolist() == [16, 24, 32]


def test_mesh_gaps_example():
    mesh = dyadic_mesh(1000, 0.1)
    assert mesh.points[0] == 1000 and mesh.points[-1] == 2000
    assert mesh.max_gap < 200


@pytest.mark.parametrize("N,delta", [(3, 0.1), (16, 0.0), (16, 0.6), (16, -0.1)])
def test_mesh_rejects_bad_arguments(N, delta):
    with pytest.raises(ConfigError):
        dyadic_mesh(N, delta)


@given(st.integers(4, 5000), st.floats(1e-3, 0.5))
def test_mesh_invariants(N, delta):
    pts = dyadic_mesh(N, delta).points
    gaps = np.diff(pts)
    assert pts[0] == N and pts[-1] == 2 * N
    assert np.all(gaps > 0)
    # below one step per point the mesh is every integer, so gaps of 1 are allowed
    assert np.all((gaps < 2 * delta * N) | (gaps == 1))
    if delta * N >= 1:
        assert pts.size <= 2 / delta + 2


def test_block_residual_at_zero():
    poly = random_poly(1, 40)
    chk = block_decompose_check(poly, 10, [0.0])
    assert chk.residual == 0.0


def test_block_residual_degree_100():
    poly = random_poly(2, 100)
    chk = block_decompose_check(poly, 31, np.linspace(-1, 1, 200))
    assert chk.residual <= 1e-10
    assert chk.residual <= 1e-12 * 101
    assert chk.block_degree == 100 - 31 - 1
    assert np.array_equal(chk.block.coeffs, poly.coeffs[32:])


@given(st.integers(2, 300), st.data())
def test_block_residual_property(degree, data):
    n_j = data.draw(st.integers(0, degree - 1))
    poly = random_poly(degree, degree)
    chk = block_decompose_check(poly, n_j, np.linspace(-1, 1, 101))
    assert chk.residual <= 1e-12 * (degree + 1)


def test_block_rejects_bad_index():
    with pytest.raises(ConfigError):
        block_decompose_check(random_poly(0, 10), 10, [0.5])


def test_sparse_sequence_first_terms():
    seq = sparse_sequence(1.0, 3)
    assert seq[0] == 3
    expected = [math.ceil(math.exp(j * math.log(j + 1) ** (1 / 3))) for j in (1, 2, 3)]
    assert seq.tolist() == expected


def test_sparse_sequence_growth():
    seq = sparse_sequence(1.0, 20).astype(float)
    assert np.all(np.diff(seq) > 0)
    ratios = seq[:-1] / seq[1:]
    assert ratios[-1] < ratios[0]


def test_sparse_sequence_errors():
    with pytest.raises(DomainError):
        sparse_sequence(0.0, 3)
    with pytest.raises(RangeError, match="largest safe j"):
        sparse_sequence(4.0, 50)


def test_checkpoints_cover_dyadic_points():
    ns = checkpoints(2 ** 12)
    assert ns[0] == 16 and ns[-1] == 2 ** 12
    for k in range(4, 13):
        assert 2 ** k in ns
    assert mesh_ratio(16, 4.0) <= 0.5


def test_polyval_pointwise_matches_rowwise():
    rng = np.random.default_rng(0)
    c = rng.choice([-1.0, 1.0], size=(7, 50))
    xs = rng.uniform(-1, 1, 7)
    expected = [np.polynomial.polynomial.polyval(x, row) for x, row in zip(xs, c)]
    np.testing.assert_allclose(polyval_pointwise(c, xs), expected, rtol=1e-12, atol=1e-12)


def test_batch_sup_norms_matches_sup_norm():
    coeffs = np.vstack([rademacher_stream(envelope_seed(3, s), 1025) for s in range(3)])
    ns = checkpoints(1024)
    sups = batch_sup_norms(coeffs.astype(float), ns)
    for i in range(3):
        for j in range(0, ns.size, 11):
            ref = sup_norm(SignSequence(coeffs[i, : ns[j] + 1])).value
            assert sups[i, j] == pytest.approx(ref, rel=1e-9)


def test_prefix_consistency():
    short = run_envelope(2 ** 14, 3, 11, ConstantB())
    long = run_envelope(2 ** 16, 3, 11, ConstantB())
    for s in range(3):
        a = short.sup_norm[short.seed == s]
        b = long.sup_norm[long.seed == s]
        assert np.array_equal(a, b[: a.size])
        assert np.array_equal(short.n[short.seed == s], long.n[long.seed == s][: a.size])


def test_running_extremes_monotone():
    tr = run_envelope(2 ** 12, 4, 5, ConstantB())
    for s in range(4):
        m = tr.seed == s
        assert np.all(np.diff(tr.running_min_liminf[m]) <= 0)
        assert np.all(np.diff(tr.running_min_normalized[m]) <= 0)
        assert np.all(np.diff(tr.running_max_limsup[m]) >= 0)
        assert np.all(tr.ratio_limsup[m] >= 0)
    assert set(tr.b_branch) == {"mc"}


def test_ratio_limsup_trivial_bound():
    # the all-ones polynomial attains (n+1) at x = 1
    n = np.array([16, 64, 1024])
    bound = (n + 1) / np.sqrt(n * np.log(np.log(n)))
    sups = batch_sup_norms(np.ones((1, 1025)), n)[0]
    np.testing.assert_allclose(sups, n + 1)
    assert np.all(sups / np.sqrt(n * np.log(np.log(n))) <= bound * (1 + 1e-12))


def test_extrapolation_rows_are_flagged():
    from littlewood_lab.errors import ExtrapolationError

    class Narrow(ConstantB):
        def __call__(self, p):
            if p < 0.4:
                raise ExtrapolationError("out of range")
            return 0.5

    tr = run_envelope(2 ** 10, 1, 0, Narrow())
    flagged = [b == "extrapolation" for b in tr.b_branch]
    assert any(flagged)
    assert np.all(np.isnan(tr.ratio_liminf[np.array(flagged)]))


def test_summary_fields():
    tr = run_envelope(2 ** 10, 2, 0, ConstantB())
    summ = tr.summary()
    assert summ["seeds"] == 2 and summ["n_max"] == 2 ** 10
    assert summ["liminf_constant"] == pytest.approx(-1.948889, abs=1e-6)
    assert LIMINF_CONSTANT == pytest.approx((3 * math.pi ** 2 / 4) ** (1 / 3))
    assert set(summ["per_seed"]) == {"0", "1"}


def test_n_max_limit():
    with pytest.raises(ConfigError):
        run_envelope(2 ** 21, 1, 0, ConstantB())


def test_gaussian_bridge_ks():
    res = bridge_check(2 ** 14, 2000, root_seed=0)
    assert res.poly_sups.size == res.gauss_sups.size == 2000
    assert res.ks <= 0.05


def test_bridge_uses_profile_values():
    n = 256
    grid = np.array([0.0, 0.5, 3.0])
    res = bridge_check(n, 2, root_seed=9, t_grid=grid)
    c = rademacher_stream(SeedSpec(9, "bridge", 1), n + 1).astype(float)
    expected = np.abs(polyval_many(c, np.exp(-grid / n))).max() / math.sqrt(n)
    assert res.poly_sups[1] == pytest.approx(expected, rel=1e-14)
