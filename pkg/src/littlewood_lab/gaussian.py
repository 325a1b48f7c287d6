"""Covariance kernels and exact / discretized sampling of the Y, Y~, Z, X processes.

    Y_t  = int_0^1   e^{-ut} dB_u        E[Y_s Y_t]   = (1 - e^{-(s+t)}) / (s+t)
    Y~_t = int_0^inf e^{-ut} dB_u        E[Y~_s Y~_t] = 1 / (s+t)
    Z_t  = e^{t/2} Y_{e^t}               E[Z_s Z_t]   = K(s-t) (1 - e^{-e^s - e^t})
    X_t  = e^{t/2} Y~_{e^t}              E[X_s X_t]   = K(s-t),  K(t) = sech(t/2)/2
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import linalg

from .errors import (ConfigError, DomainError, IllConditionedKernelError,
                     SingularityError)
from .rng import SeedSpec, chunk_sizes, generator, map_ordered

FAMILIES = ("covY", "covYtilde", "covZ", "covX", "sinc", "sech", "T", "Ttilde")
_REQUIRED = {"sinc": ("u", "a"), "sech": ("a",)}
MAX_EXACT_GRID = 8192
JITTER = 1e-12


@dataclass(frozen=True)
class KernelSpec:
    family: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown kernel family {self.family!r}; expected one of {FAMILIES}")
        params = {k: float(v) for k, v in self.params.items()}
        for name in _REQUIRED.get(self.family, ()):
            if name not in params:
                raise ConfigError(f"kernel {self.family} needs parameter {name}")
            if not params[name] > 0:
                raise DomainError(f"kernel {self.family}: {name} must be positive")
        object.__setattr__(self, "params", params)

    def to_dict(self) -> dict:
        return {"family": self.family, "params": dict(self.params)}

    @classmethod
    def from_dict(cls, data: dict) -> "KernelSpec":
        return cls(data["family"], dict(data.get("params", {})))


@dataclass(frozen=True, eq=False)
class PathSample:
    t_grid: np.ndarray
    values: np.ndarray
    kernel: KernelSpec | None
    seed: SeedSpec

    def __post_init__(self):
        if np.shape(self.values)[-1] != len(self.t_grid):
            raise ConfigError("values and t_grid lengths differ")


def sech_kernel(z):
    """K(z) = sech(z/2)/2, written to avoid overflow for large |z|."""
    a = np.exp(-0.5 * np.abs(np.asarray(z, dtype=float)))
    return a / (1.0 + a * a)


def _one_minus_exp_over(x):
    """(1 - e^{-x}) / x with the removable singularity at 0 filled in."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = np.abs(x) < 1e-8
    xs = x[small]
    out[small] = 1.0 - xs / 2.0 + xs * xs / 6.0
    xb = x[~small]
    out[~small] = -np.expm1(-xb) / xb
    return out


def _cauchy_exp(s, t, rate):
    """rate-scaled 1/(e^{rate s} + e^{rate t}) without overflow."""
    hi = np.maximum(s, t)
    gap = np.abs(s - t)
    return np.exp(-rate * hi) / (1.0 + np.exp(-rate * gap))


def kernel_matrix(kernel: KernelSpec, s, t) -> np.ndarray:
    """Vectorized kernel values k(s_i, t_j) with broadcasting over ``s`` and ``t``."""
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    fam, p = kernel.family, kernel.params
    if fam == "covY":
        if np.any(s < 0) or np.any(t < 0):
            raise DomainError("covY is defined for s, t >= 0")
        return _one_minus_exp_over(s + t)
    if fam == "covYtilde":
        tot = s + t
        if np.any(tot <= 0):
            raise SingularityError("covYtilde needs s + t > 0")
        return 1.0 / tot
    if fam == "covX" or fam == "sech":
        return sech_kernel(s - t)
    if fam == "covZ":
        return sech_kernel(s - t) * -np.expm1(-np.exp(s) - np.exp(t))
    if fam == "sinc":
        u = p["u"]
        return (u / math.pi) * np.sinc(u * (s - t) / math.pi)
    if fam == "T":
        return _cauchy_exp(s, t, 1.0)
    if fam == "Ttilde":
        return 2.0 * _cauchy_exp(s, t, 2.0)
    raise ConfigError(f"no kernel formula for {fam}")


def cov_eval(kernel: KernelSpec, s: float, t: float) -> float:
    return float(kernel_matrix(kernel, np.float64(s), np.float64(t)))


def gram(kernel: KernelSpec, grid) -> np.ndarray:
    g = np.asarray(grid, dtype=float)
    m = kernel_matrix(kernel, g[:, None], g[None, :])
    return 0.5 * (m + m.T)


# -- factorization ------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CovarianceFactor:
    """``C ~= F F^T`` with ``F`` of shape (m, rank)."""

    matrix: np.ndarray
    method: str
    jitter: float
    rank: int


def covariance_factor(cov: np.ndarray, method: str = "eigh", rel_floor: float = 1e-13) -> CovarianceFactor:
    """Symmetric factor of a PSD covariance matrix.

    ``eigh`` keeps the eigenpairs above ``rel_floor * lambda_max`` (the rest are
    rounding noise), so nothing is ever added to the diagonal.  ``cholesky``
    tries a plain Cholesky, then once more with ``1e-12 * I``.
    """
    cov = np.asarray(cov, dtype=float)
    if method == "eigh":
        vals, vecs = np.linalg.eigh(cov)
        top = float(vals[-1])
        if top <= 0:
            raise IllConditionedKernelError("covariance matrix has no positive eigenvalue")
        if vals[0] < -1e-10 * top:
            raise IllConditionedKernelError(
                f"covariance matrix is indefinite: lambda_min={vals[0]:.3e}, lambda_max={top:.3e}")
        keep = vals > rel_floor * top
        factor = vecs[:, keep] * np.sqrt(vals[keep])
        return CovarianceFactor(factor[:, ::-1].copy(), "eigh", 0.0, int(keep.sum()))
    if method == "cholesky":
        for jitter in (0.0, JITTER):
            try:
                lower = linalg.cholesky(cov + jitter * np.eye(len(cov)), lower=True)
                return CovarianceFactor(lower, "cholesky", jitter, len(cov))
            except linalg.LinAlgError:
                continue
        raise IllConditionedKernelError("Cholesky failed even after 1e-12 diagonal jitter")
    raise ConfigError(f"unknown factorization method {method!r}")


def _chunk_seed(seed: SeedSpec, chunk: int) -> SeedSpec:
    return SeedSpec(seed.root_seed, f"{seed.stream_label}#{seed.replica_index}", chunk)


def sample_with_factor(factor: np.ndarray, seed: SeedSpec, n_samples: int,
                       chunk: int = 4096, threads: int = 1) -> np.ndarray:
    """``n_samples`` draws ``F @ xi``; replica chunk ``c`` always uses stream ``c``."""
    sizes = chunk_sizes(n_samples, chunk)
    rank = factor.shape[1]

    def one(c):
        z = generator(_chunk_seed(seed, c)).standard_normal((sizes[c], rank))
        return z @ factor.T

    return np.vstack(map_ordered(one, range(len(sizes)), threads))


def iter_samples(factor: np.ndarray, seed: SeedSpec, n_samples: int, chunk: int = 4096):
    """Chunk-by-chunk version of :func:`sample_with_factor` for large runs."""
    rank = factor.shape[1]
    for c, size in enumerate(chunk_sizes(n_samples, chunk)):
        z = generator(_chunk_seed(seed, c)).standard_normal((size, rank))
        yield z @ factor.T


def sample_path_exact(kernel: KernelSpec, t_grid, seed: SeedSpec, n_samples: int | None = None,
                      method: str = "eigh", threads: int = 1):
    """Exact-covariance Gaussian path(s) on ``t_grid``.

    Returns a :class:`PathSample` for a single draw, or a ``(n_samples, m)``
    array when ``n_samples`` is given.
    """
    grid = np.asarray(t_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ConfigError("t_grid must be a non-empty 1-D array")
    if grid.size > MAX_EXACT_GRID:
        raise ConfigError(f"exact sampling is limited to {MAX_EXACT_GRID} grid points")
    factor = covariance_factor(gram(kernel, grid), method).matrix
    draws = sample_with_factor(factor, seed, 1 if n_samples is None else n_samples, threads=threads)
    if n_samples is None:
        return PathSample(grid, draws[0], kernel, seed)
    return draws


def sample_Y_euler(t_grid, n_steps: int, seed: SeedSpec, n_samples: int = 1,
                   chunk: int = 2048) -> np.ndarray:
    """Left-point Riemann-Ito sums ``sum_i e^{-u_i t} dB_i`` on ``u_i = i / n_steps``.

    Covariance error is O(1/n_steps).
    """
    if n_steps < 16:
        raise ConfigError("sample_Y_euler needs n_steps >= 16")
    grid = np.asarray(t_grid, dtype=float)
    u = np.arange(n_steps) / n_steps
    basis = np.exp(-np.outer(u, grid))
    scale = 1.0 / math.sqrt(n_steps)
    out = []
    for c, size in enumerate(chunk_sizes(n_samples, chunk)):
        db = generator(_chunk_seed(seed, c)).standard_normal((size, n_steps)) * scale
        out.append(db @ basis)
    return np.vstack(out)


# -- circulant embedding for stationary X -------------------------------------

MAX_EMBEDDING = 1 << 22


def circulant_eigenvalues(step: float, m: int, size: int | None = None) -> np.ndarray:
    if size is None:
        size = 1 << int(math.ceil(math.log2(max(2 * (m - 1), 2))))
    lags = np.minimum(np.arange(size), size - np.arange(size)) * step
    return np.fft.fft(sech_kernel(lags)).real


def sample_X_circulant(step: float, m: int, seed: SeedSpec, n_samples: int) -> np.ndarray:
    """Stationary X on ``m`` equispaced points via circulant embedding.

    The embedding is exact when every circulant eigenvalue is non-negative;
    the period is doubled until that holds (the slow e^{-|t|/2} decay of the
    kernel can need several doublings on long grids).
    """
    lam = circulant_eigenvalues(step, m)
    while lam.min() < -1e-10 * lam.max():
        if 2 * lam.size > MAX_EMBEDDING:
            raise IllConditionedKernelError("circulant embedding has negative eigenvalues")
        lam = circulant_eigenvalues(step, m, 2 * lam.size)
    lam = np.clip(lam, 0.0, None)
    size = lam.size
    scale = np.sqrt(lam / size)
    out = []
    pairs = -(-n_samples // 2)
    for c, count in enumerate(chunk_sizes(pairs, 1024)):
        rng = generator(_chunk_seed(seed, c))
        z = rng.standard_normal((count, size)) + 1j * rng.standard_normal((count, size))
        w = np.fft.fft(z * scale, axis=1)[:, :m]
        out.append(np.concatenate([w.real, w.imag], axis=0))
    return np.vstack(out)[:n_samples]


def sech_spectral_density(xi):
    """Fourier transform of K: pi * sech(pi * xi)."""
    return math.pi / np.cosh(math.pi * np.asarray(xi, dtype=float))


# -- Taylor coefficient variances ---------------------------------------------

def _log_taylor_variance(m: int, variant: str) -> float:
    if variant == "unit-interval":
        return -math.log(2 * m + 1) - 2 * math.lgamma(m + 1)
    return math.lgamma(2 * m + 1) - (2 * m + 1) * math.log(4) - 2 * math.lgamma(m + 1)


def taylor_variance(m: int, variant: str = "unit-interval") -> tuple[float, bool]:
    """``E[a_m^2]`` of the Taylor coefficients; returns ``(value, underflowed)``.

    unit-interval: 1 / ((2m+1) (m!)^2)        (Y expanded at t = 0)
    damped:        (2m)! / (4^{2m+1} (m!)^2)   (Y~ expanded at t = 2)
    """
    if m < 0:
        raise DomainError("m must be non-negative")
    if variant not in ("unit-interval", "damped"):
        raise ConfigError(f"unknown variant {variant!r}")
    if _log_taylor_variance(m, variant) < -745.0:
        return 0.0, True
    if variant == "unit-interval":
        exact = Fraction(1, (2 * m + 1) * math.factorial(m) ** 2)
    else:
        exact = Fraction(math.factorial(2 * m), 4 ** (2 * m + 1) * math.factorial(m) ** 2)
    value = float(exact)
    return value, value == 0.0
