import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from littlewood_lab.cutoff import (BUDGET, WINDOW, build_cutoff, cutoff_fourier, decay_fit,
                                   default_scale, fourier_coeff_mc, fourier_coeff_variance,
                                   grid_fourier, tail_sum, truncation_bound, variance_decay_constant,
                                   weights)
from littlewood_lab.errors import ConfigError, ResolutionError
from littlewood_lab.rng import SeedSpec


@pytest.fixture(scope="module")
def w():
    return build_cutoff()


def test_scale_is_least_integer_within_budget():
    c = default_scale(3)
    assert c == 18.0
    assert tail_sum(3, c) <= BUDGET < tail_sum(3, c - 1)
    assert weights(64)[0] == pytest.approx(18 * 3 * math.log(3) ** 2)


def test_plateau_support_mass(w):
    assert w(0.0) == pytest.approx(1.0, abs=1e-10)
    assert w(0.6) == 0.0
    assert w.g_mass() == pytest.approx(1.0, abs=1e-10)
    assert w.g_radius <= BUDGET
    x = w.grid
    assert np.all((w.values >= 0) & (w.values <= 1))
    assert np.abs(w.values[np.abs(x) <= 0.25] - 1).max() <= 1e-10
    assert np.all(w.values[np.abs(x) >= 0.5] == 0)
    assert np.all(w.values[np.abs(x) >= WINDOW + w.g_radius] == 0)


def test_resolution_error():
    with pytest.raises(ResolutionError):
        build_cutoff(64, grid_step=2.0 ** -8)
    with pytest.raises(ConfigError):
        build_cutoff(2)


def test_fourier_at_zero(w):
    assert cutoff_fourier(0.0) == pytest.approx(0.75, abs=1e-15)
    assert w.values[:-1].sum() * w.step == pytest.approx(0.75, abs=1e-10)


def test_grid_transform_matches_product(w):
    xi = np.linspace(0, math.pi / w.step / 4, 25)[:: 4]
    assert np.abs(grid_fourier(w, xi) - cutoff_fourier(xi)).max() <= 1e-6


def test_decay_regression_slope():
    fit = decay_fit()
    assert fit.slope < 0 and fit.r_squared >= 0.9
    assert fit.slope == pytest.approx(-0.8006, abs=2e-3)


def test_truncation_bound_small_at_moderate_xi():
    assert truncation_bound(100.0) < 1e-3


def test_variance_values(w):
    # frozen quadrature values for the default cutoff
    expected = {0: 0.27802, 1: 0.02716, 2: 0.012086, 3: 0.0026628, 5: 0.00092056}
    for k, v in expected.items():
        assert fourier_coeff_variance(k, w) == pytest.approx(v, rel=5e-4)
    assert fourier_coeff_variance(0, w) > fourier_coeff_variance(5, w)


@pytest.mark.parametrize("k", [1, 4, 9])
def test_variance_symmetric(w, k):
    assert fourier_coeff_variance(-k, w) == pytest.approx(fourier_coeff_variance(k, w), rel=1e-8)


def test_variance_matches_monte_carlo(w):
    for k in range(4):
        mean, _ = fourier_coeff_mc(k, w, SeedSpec(21, "fourier"), 10**4)
        assert mean == pytest.approx(fourier_coeff_variance(k, w), rel=0.05)


def test_variance_decay_constant(w):
    c, fit = variance_decay_constant(w, np.arange(20, 201, 30))
    assert c > 0 and fit.slope < 0


@given(st.floats(-5000, 5000, allow_nan=False))
def test_fourier_bounded_by_mass(xi):
    assert abs(cutoff_fourier(xi)) <= 0.75 + 1e-15


@given(st.floats(0, 5000, allow_nan=False))
def test_fourier_even(xi):
    assert cutoff_fourier(-xi) == cutoff_fourier(xi)
