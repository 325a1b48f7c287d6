import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from littlewood_lab.errors import ConfigError, DomainError, ResolutionError
from littlewood_lab.gaussian import KernelSpec
from littlewood_lab.spectral import (cauchy_eigenvalues, discretize, eig_count, fit_counting,
                                     offdiag_singular_values, sandwich_check, sech_fourier_transform,
                                     spectrum, tail_block_ratio, truncation_robustness)

SECH = lambda a: KernelSpec("sech", {"a": a})
SINC = lambda u, a: KernelSpec("sinc", {"u": u, "a": a})


@pytest.fixture(scope="module")
def t_spec():
    return spectrum(discretize(KernelSpec("T"), 800, 40.0))


@pytest.fixture(scope="module")
def tt_spec():
    return spectrum(discretize(KernelSpec("Ttilde"), 400, 20.0))


def test_trace_examples():
    assert discretize(SECH(2.0), 40).quadrature_trace == pytest.approx(1.0, abs=1e-12)
    assert discretize(SINC(math.pi, 1.0), 40).quadrature_trace == pytest.approx(1.0, abs=1e-12)
    d = discretize(KernelSpec("T"), 400, 20.0)
    assert d.quadrature_trace + d.trace_remainder == pytest.approx(0.5, abs=1e-12)
    assert d.quadrature_trace == pytest.approx(0.5, abs=1e-8)


def test_matrix_symmetric_and_positive():
    for k in (SECH(5.0), SINC(3.0, 2.0), KernelSpec("T"), KernelSpec("Ttilde")):
        d = discretize(k, 200, 20.0 if k.family in ("T", "Ttilde") else None)
        assert np.abs(d.matrix - d.matrix.T).max() <= 1e-14
        lam = np.linalg.eigvalsh(d.matrix)
        assert lam.min() >= -1e-10 * lam.max()


def test_sinc_contraction():
    lam = spectrum(discretize(SINC(20.0, 2.0), 200)).eigenvalues
    assert lam.max() <= 1 + 1e-10 and lam.min() >= -1e-10


def test_discretize_errors():
    with pytest.raises(ConfigError):
        discretize(SECH(1.0), 8)
    with pytest.raises(ResolutionError):
        discretize(SINC(200.0, 10.0), 40)


def test_spectrum_sum_matches_trace(tt_spec):
    assert tt_spec.eigenvalues.sum() == pytest.approx(tt_spec.trace, abs=1e-8)
    assert tt_spec.eigenvalues[0] <= 0.5


def test_unitary_equivalence(t_spec, tt_spec):
    a, b = t_spec.eigenvalues[:50], tt_spec.eigenvalues[:50]
    assert np.max(np.abs(a / b - 1)) <= 1e-8


def test_cauchy_solver_agrees_with_dense_on_top_eigenvalues():
    d = discretize(SECH(10.0), 200)
    fast = spectrum(d, "cauchy").eigenvalues[:20]
    dense = spectrum(d, "eigh").eigenvalues[:20]
    assert np.max(np.abs(fast / dense - 1)) <= 1e-10


def test_cauchy_eigenvalues_small_case():
    x = np.array([1.0, 2.0, 3.0])
    d = np.array([1.0, 0.5, 0.25])
    dense = np.linalg.eigvalsh(d[:, None] * d[None, :] / (x[:, None] + x[None, :]))[::-1]
    assert np.allclose(cauchy_eigenvalues(x, d), dense, rtol=1e-13)


def test_refinement_stability_sech():
    a = spectrum(discretize(SECH(10.0), 200)).eigenvalues[:30]
    b = spectrum(discretize(SECH(10.0), 400)).eigenvalues[:30]
    assert np.max(np.abs(a / b - 1)) < 1e-9


def test_sinc_count_at_half():
    u = 100 * math.pi
    curve = eig_count(spectrum(discretize(SINC(u, 1.0), 1000)), [0.5])
    assert abs(curve.counts[0] - 100) <= 10 * math.log(u + math.e)
    assert curve.predicted[0] == pytest.approx(100.0)


def test_sech_counting_slope():
    spec = spectrum(discretize(SECH(20.0), 800))
    fit = fit_counting(eig_count(spec, np.geomspace(1e-10, 1e-2, 80)), ("log", "one"))
    assert fit.leading == pytest.approx(20 / math.pi ** 2, rel=0.1)


def test_T_counting_leading_coefficient(tt_spec):
    fit = fit_counting(eig_count(tt_spec, np.geomspace(1e-12, 1e-4, 80)))
    assert fit.leading == pytest.approx(1 / (2 * math.pi ** 2), rel=0.2)


def test_counting_flags_unresolved(tt_spec):
    curve = eig_count(tt_spec, [1e-20, 1e-3])
    assert curve.counts[-1] == -1 and not curve.resolved[-1]
    with pytest.raises(ConfigError):
        eig_count(tt_spec, [])


@pytest.mark.parametrize("u,a", [(2.0, 4.0), (3.0, 8.0)])
def test_sandwich(u, a):
    rep = sandwich_check(u, a, 320)
    assert rep.ok
    assert rep.lower_min_eig >= -1e-10 and rep.upper_min_eig >= -1e-10


def test_offdiag_block():
    rep = offdiag_singular_values(1, 1.0)
    assert rep.singular_values[0] <= rep.hs_norm * (1 + 1e-10)
    assert rep.hs_norm == pytest.approx(rep.frobenius, rel=1e-6)
    assert np.all(np.isfinite(rep.ratios)) and rep.ratios.max() < 10
    with pytest.raises(DomainError):
        offdiag_singular_values(0, 1.0)


def test_tail_block_scaling():
    assert tail_block_ratio(2, 1.5) == pytest.approx(1.0, abs=1e-8)


def test_truncation_robustness():
    diff = truncation_robustness(np.geomspace(1e-12, 1e-1, 40))
    assert np.all(diff == 0)


@pytest.mark.parametrize("xi", [0.0, 0.7, 1.9, 3.0])
def test_sech_fourier_transform(xi):
    assert sech_fourier_transform(xi) == pytest.approx(math.pi / math.cosh(math.pi * xi), abs=1e-8)


@given(st.floats(1.0, 12.0), st.integers(16, 120))
def test_sech_trace_property(a, n):
    d = discretize(SECH(a), n)
    assert d.quadrature_trace == pytest.approx(a / 2, abs=1e-10)


@given(st.floats(0.5, 6.0), st.floats(0.5, 4.0))
def test_sinc_trace_property(u, a):
    d = discretize(SINC(u, a), 160)
    assert d.quadrature_trace == pytest.approx(a * u / math.pi, abs=1e-10)


@given(st.lists(st.floats(1e-9, 1.0), min_size=2, max_size=30, unique=True))
def test_counts_monotone(taus):
    spec = spectrum(discretize(KernelSpec("Ttilde"), 200, 10.0))
    curve = eig_count(spec, taus)
    ok = curve.counts[curve.resolved]
    assert np.all(np.diff(ok) >= 0)
