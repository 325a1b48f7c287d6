"""Smooth compactly supported cutoff built from an infinite convolution of boxes.

g = f_C * f_{C+1} * ... * f_K with f_k = (a_k/2) 1[-1/a_k, 1/a_k], a_k = c k log^2 k,
and w = 1[-3/8, 3/8] * g.  The support of g has radius sum 1/a_k <= 1/16, so
w = 1 on |x| <= 5/16 and w = 0 on |x| >= 7/16.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import ConfigError, ResolutionError, ToleranceError
from .gaussian import KernelSpec, covariance_factor, gram, sample_with_factor, sech_kernel
from .rng import SeedSpec

WINDOW = 3.0 / 8.0
BUDGET = 1.0 / 16.0
DEFAULT_STEP = 2.0 ** -15


def _log2_weights(k):
    k = np.asarray(k, dtype=float)
    return k * np.log(k) ** 2


def tail_sum(start: int, scale: float = 1.0, cutoff: int = 10**6) -> float:
    """sum_{k >= start} 1 / (scale k log^2 k), with the integral tail beyond ``cutoff``."""
    k = np.arange(start, cutoff, dtype=float)
    return float((1.0 / _log2_weights(k)).sum() + 1.0 / math.log(cutoff)) / scale


def default_scale(c_start: int = 3) -> float:
    """Smallest integer scale c with sum_{k >= c_start} 1/(c k log^2 k) <= 1/16."""
    return float(math.ceil(tail_sum(c_start) / BUDGET))


def weights(k_max: int, c_start: int = 3, scale: float | None = None) -> np.ndarray:
    scale = default_scale(c_start) if scale is None else scale
    return scale * _log2_weights(np.arange(c_start, k_max + 1))


@dataclass(frozen=True, eq=False)
class CutoffFunction:
    grid: np.ndarray
    values: np.ndarray
    g_values: np.ndarray
    k_max: int
    c_start: int
    scale: float
    step: float

    @property
    def a(self) -> np.ndarray:
        return weights(self.k_max, self.c_start, self.scale)

    @property
    def g_radius(self) -> float:
        return float((1.0 / self.a).sum())

    @property
    def support_radius(self) -> float:
        return WINDOW + self.g_radius

    @property
    def plateau_radius(self) -> float:
        return WINDOW - self.g_radius

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.interp(x, self.grid, self.values, left=0.0, right=0.0)
        return np.where(np.abs(x) >= self.support_radius, 0.0, out)

    def g_mass(self) -> float:
        return float(self.g_values[:-1].sum() * self.step)

    def fourier(self, xi):
        return cutoff_fourier(xi, self.k_max, self.c_start, self.scale)


def _sinc_product(xi, a):
    xi = np.asarray(xi, dtype=float)
    out = np.ones_like(xi)
    for ak in a:
        out *= np.sinc(xi / (math.pi * ak))
    return out


def _window_transform(xi):
    xi = np.asarray(xi, dtype=float)
    small = np.abs(xi) < 1e-4
    safe = np.where(small, 1.0, xi)
    series = 2 * WINDOW * (1 - (WINDOW * xi) ** 2 / 6 + (WINDOW * xi) ** 4 / 120)
    return np.where(small, series, 2.0 * np.sin(WINDOW * safe) / safe)


def cutoff_fourier(xi, k_max: int = 64, c_start: int = 3, scale: float | None = None):
    """w^(xi) = (2 sin(3 xi / 8) / xi) * prod_k sinc(xi / a_k); real because w is even."""
    if k_max < c_start:
        raise ConfigError("k_max must be at least c_start")
    a = weights(k_max, c_start, scale)
    val = _window_transform(xi) * _sinc_product(xi, a)
    return float(val) if np.ndim(xi) == 0 else val


def truncation_bound(xi, k_max: int = 64, c_start: int = 3, scale: float | None = None):
    """Relative error bound from dropping the factors k > k_max.

    Each dropped factor satisfies 1 >= sinc(y) >= 1 - y^2/6.
    """
    scale = default_scale(c_start) if scale is None else scale
    k = np.arange(k_max + 1, 10**6, dtype=float)
    inv_sq = float((1.0 / (scale * _log2_weights(k)) ** 2).sum())
    return np.asarray(xi, dtype=float) ** 2 * inv_sq / 6.0


def build_cutoff(k_max: int = 64, grid_step: float = DEFAULT_STEP, c_start: int = 3,
                 scale: float | None = None) -> CutoffFunction:
    """Sample w and g on a uniform grid of [-1, 1].

    Both are obtained by inverse FFT of their exact Fourier coefficients on the
    period-2 torus (a cyclic convolution of the boxes whose transforms are the
    sinc factors).  Rounding noise outside the known supports is set to zero.
    """
    scale = default_scale(c_start) if scale is None else float(scale)
    if k_max < c_start:
        raise ConfigError("k_max must be at least c_start")
    a = weights(k_max, c_start, scale)
    if grid_step > 1.0 / a[-1]:
        raise ResolutionError(f"grid_step {grid_step:g} does not resolve the narrowest box 1/a = {1 / a[-1]:g}")
    cells = int(round(2.0 / grid_step))
    if abs(cells * grid_step - 2.0) > 1e-12:
        raise ConfigError("grid_step must divide the interval [-1, 1] evenly")
    freq = np.pi * np.fft.fftfreq(cells, 1.0 / cells)
    phase = np.where(np.fft.fftfreq(cells, 1.0 / cells).astype(np.int64) % 2 == 0, 1.0, -1.0)
    g_hat = _sinc_product(freq, a)
    w_hat = _window_transform(freq) * g_hat
    grid = -1.0 + grid_step * np.arange(cells + 1)

    def synth(coeffs):
        vals = 0.5 * cells * np.fft.ifft(coeffs * phase).real
        return np.append(vals, vals[0])

    g_radius = float((1.0 / a).sum())
    g = synth(g_hat)
    g[np.abs(grid) >= g_radius] = 0.0
    g = np.clip(g, 0.0, None)
    w = synth(w_hat)
    w[np.abs(grid) >= WINDOW + g_radius] = 0.0
    w = np.clip(w, 0.0, 1.0)
    return CutoffFunction(grid, w, g, k_max, c_start, scale, grid_step)


def grid_fourier(w: CutoffFunction, xi):
    """Fourier transform of the sampled w by direct (trapezoidal) summation."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    mask = w.values > 0
    x, v = w.grid[mask], w.values[mask]
    return np.array([w.step * np.sum(v * np.cos(z * x)) for z in xi])


# -- decay regressions ----------------------------------------------------------

@dataclass(frozen=True)
class DecayFit:
    slope: float
    intercept: float
    r_squared: float
    n_points: int
    mode: str


def _linfit(x, y, mode) -> DecayFit:
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    r2 = 1.0 - resid.var() / y.var()
    return DecayFit(float(slope), float(intercept), float(r2), int(len(x)), mode)


def decay_fit(k_max: int = 64, lo: float = 50.0, hi: float = 2000.0, mode: str = "envelope",
              n_samples: int = 200_000, c_start: int = 3, scale: float | None = None) -> DecayFit:
    """Regress log|w^(xi)| on xi / log^2(xi + e).

    ``envelope`` uses the maximum of |w^| over consecutive windows of one period
    of the sin(3 xi / 8) factor, which removes the zeros of the oscillation;
    ``raw`` regresses every sample.
    """
    xi = np.linspace(lo, hi, n_samples)
    v = np.abs(cutoff_fourier(xi, k_max, c_start, scale))
    if mode == "raw":
        keep = v > 0
        x, y = xi[keep], np.log(v[keep])
    elif mode == "envelope":
        period = 2.0 * math.pi / WINDOW
        idx = ((xi - lo) // period).astype(int)
        full = idx < idx.max()
        x, y = [], []
        for b in np.unique(idx[full]):
            sel = np.flatnonzero(idx == b)
            j = sel[np.argmax(v[sel])]
            x.append(xi[j])
            y.append(math.log(v[j]))
        x, y = np.array(x), np.array(y)
    else:
        raise ConfigError(f"unknown decay-fit mode {mode!r}")
    return _linfit(x / np.log(x + math.e) ** 2, y, mode)


# -- Fourier coefficient variance ---------------------------------------------

def fourier_coeff_variance(k: int, w: CutoffFunction, rel_tol: float = 1e-9,
                           abs_tol: float = 1e-12) -> float:
    """E|a_k|^2 for a_k = int w(t) X_t e^{-2 pi i k t} dt.

    Computed as (1/2) int sech(pi xi) |w^(2 pi k - xi)|^2 dxi by adaptive
    quadrature on windows around xi = 0 and xi = 2 pi k, plus the stretch between.
    """
    if abs(k) > 10**4:
        raise ConfigError("|k| must be at most 1e4")
    centre = 2.0 * math.pi * k
    half = 12.0

    def integrand(xi):
        return 2.0 * sech_kernel(2.0 * math.pi * xi) * w.fourier(centre - xi) ** 2

    cuts = sorted({-half, half, centre - half, centre + half})
    pieces = list(zip(cuts[:-1], cuts[1:]))
    total, err_total = 0.0, 0.0
    for a, b in pieces:
        val, err = integrate.quad(integrand, a, b, epsabs=0.0, epsrel=rel_tol, limit=400)
        total += val
        err_total += err
    total *= 0.5
    err_total *= 0.5
    if err_total > max(abs_tol, 1e-6 * abs(total)):
        raise ToleranceError(f"variance quadrature for k={k} did not converge (err {err_total:.2e})")
    return total


def fourier_coeff_mc(k: int, w: CutoffFunction, seed: SeedSpec, n_samples: int,
                     step: float = 1.0 / 256.0, threads: int = 1) -> tuple[float, float]:
    """Monte Carlo mean of |a_k|^2 and its standard error from exact stationary paths.

    Paths of X are drawn on a uniform grid covering the support of w and the
    integral is a trapezoid sum (w vanishes to all orders at the support ends).
    """
    r = w.support_radius
    m = int(math.ceil(r / step))
    t = step * np.arange(-m, m + 1)
    factor = covariance_factor(gram(KernelSpec("covX"), t)).matrix
    paths = sample_with_factor(factor, seed, n_samples, threads=threads)
    wt = step * w(t)
    phase = 2.0 * math.pi * k * t
    re = paths @ (wt * np.cos(phase))
    im = paths @ (wt * np.sin(phase))
    sq = re * re + im * im
    return float(sq.mean()), float(sq.std(ddof=1) / math.sqrt(n_samples))


def variance_decay_constant(w: CutoffFunction, ks) -> tuple[float, DecayFit]:
    """Largest c with variance(k) <= exp(-c k / log^2(k + e)) on ``ks``, plus a regression."""
    ks = np.asarray(ks, dtype=float)
    var = np.array([fourier_coeff_variance(int(k), w) for k in ks])
    x = ks / np.log(ks + math.e) ** 2
    c = float(np.min(-np.log(var) / x))
    return c, _linfit(x, np.log(var), "variance")
