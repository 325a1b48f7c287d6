"""Small-ball probabilities of the Gaussian models.

F(d) = P(sup_{t>=0} |Y_t| <= d)
G(d) = P(sup_{t>=0} e^{-t/2} |X_t| <= d)
I    = int_0^inf e^{-t} X_t^2 dt = sum_k lambda_k xi_k^2   (lambda_k: spectrum of T)

``H`` estimators take the threshold on ``I`` directly: they estimate P(I < level).
The sup-norm convention H(theta) = P(I <= theta^2) is obtained with
``level = theta**2``.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass, field
from functools import cached_property, lru_cache

import numpy as np
from scipy import interpolate, optimize

from .errors import (ConfigError, DomainError, ExtrapolationError, RangeError,
                     RegimeError, UnreliableEstimateError)
from .gaussian import KernelSpec, covariance_factor, gram
from .rng import SeedSpec, chunk_sizes, generator, map_ordered, pairwise_sum
from .spectral import Spectrum, discretize, spectrum

TRACE_T = 0.5
F_MAIN = 2.0 / (3.0 * math.pi ** 2)
H_MAIN = 1.0 / (12.0 * math.pi ** 2)
DIRECT_RANGE = (0.02, 2.0)
WILSON_Z = 1.0


# -- Laplace exponent ---------------------------------------------------------

@lru_cache(maxsize=4)
def t_spectrum(truncation: float = 20.0, n_nodes: int = 400) -> Spectrum:
    """Spectrum of T via the unitarily equivalent T~ (T~ on (0,S) is T on (0,2S))."""
    return spectrum(discretize(KernelSpec("Ttilde"), n_nodes, truncation))


@dataclass(frozen=True, eq=False)
class LaplaceExponent:
    """L(r) = log E e^{-rI} = -1/2 sum log(1 + 2 r lambda_k) for I = sum lambda_k xi_k^2."""

    eigenvalues: np.ndarray
    deficit: float = 0.0

    @classmethod
    def from_spectrum(cls, spec: Spectrum, trace: float = TRACE_T) -> "LaplaceExponent":
        lam = np.sort(spec.resolved)[::-1]
        return cls(lam, max(trace - float(lam.sum()), 0.0))

    @property
    def trace(self) -> float:
        return float(self.eigenvalues.sum())

    def __call__(self, r: float) -> float:
        if r < 0:
            raise DomainError("r must be non-negative")
        return -0.5 * float(np.sum(np.log1p(2.0 * r * self.eigenvalues)))

    def derivative(self, r: float) -> float:
        return -float(np.sum(self.eigenvalues / (1.0 + 2.0 * r * self.eigenvalues)))

    def remainder(self, r: float) -> float:
        """Bound on |L_true(r) - L(r)| from eigenvalues missing from the list."""
        return r * self.deficit

    def counting_form(self, r: float) -> float:
        """-r int_0^{lambda_1} Lambda(tau) / (1 + 2 r tau) d tau, integrated exactly per step."""
        lam = np.sort(self.eigenvalues)[::-1]
        upper = lam
        lower = np.r_[lam[1:], 0.0]
        count = np.arange(1, lam.size + 1, dtype=float)
        pieces = 0.5 * count * (np.log1p(2.0 * r * upper) - np.log1p(2.0 * r * lower))
        return -float(np.sum(pieces))

    def saddle(self, level: float) -> float:
        """r >= 0 with L'(r) = -level (0 when level >= trace)."""
        if level >= self.trace:
            return 0.0
        hi = 1.0
        while self.derivative(hi) < -level:
            hi *= 2.0
        return float(optimize.brentq(lambda r: self.derivative(r) + level, 0.0, hi,
                                     xtol=1e-14 * hi, rtol=1e-15, maxiter=500))


def _laplace(obj) -> LaplaceExponent:
    if isinstance(obj, LaplaceExponent):
        return obj
    if isinstance(obj, Spectrum):
        return LaplaceExponent.from_spectrum(obj)
    return LaplaceExponent(np.asarray(obj, dtype=float))


def laplace_exponent(spec, r: float) -> float:
    return _laplace(spec)(r)


@dataclass(frozen=True)
class ChernoffBound:
    delta: float
    log_bound: float
    r_opt: float
    log_bound_fixed_r: float
    r_fixed: float


def chernoff_log_upper(spec, delta: float) -> ChernoffBound:
    """log P(I < delta) <= min_r L(r) + r delta; also reported at r = log^2(1/delta)/delta."""
    lap = _laplace(spec)
    if delta <= 0:
        raise DomainError("delta must be positive")
    if delta >= lap.trace:
        warnings.warn("delta >= E[I]: the Chernoff bound is vacuous", RuntimeWarning, stacklevel=2)
        return ChernoffBound(delta, 0.0, 0.0, 0.0, 0.0)
    r = lap.saddle(delta)
    r_fixed = math.log(1.0 / delta) ** 2 / delta if delta < 1 else 0.0
    return ChernoffBound(delta, lap(r) + r * delta, r, lap(r_fixed) + r_fixed * delta, r_fixed)


@dataclass(frozen=True)
class LaplaceLower:
    delta: float
    log_bound: float
    r: float
    remainder: float


def _lower_condition(lap: LaplaceExponent, delta: float) -> float:
    r = math.log(1.0 / delta) ** 4 / delta
    return r * delta + (lap(r) - lap.remainder(r)) - math.log(2.0)


def validity_onset(spec, lo: float = 1e-12, hi: float = 0.999) -> float:
    """Largest delta for which e^{-r delta} <= e^{L(r)}/2 at r = log^4(1/delta)/delta."""
    lap = _laplace(spec)
    grid = np.geomspace(lo, hi, 400)
    ok = np.array([_lower_condition(lap, d) >= 0 for d in grid])
    if not ok.any():
        raise RangeError("the Laplace lower bound is never valid on the scanned range")
    i = int(np.flatnonzero(ok)[-1])
    if i == grid.size - 1:
        return float(grid[-1])
    log_d = optimize.brentq(lambda ld: _lower_condition(lap, math.exp(ld)),
                            math.log(grid[i]), math.log(grid[i + 1]), xtol=1e-12)
    return float(math.exp(log_d))


def laplace_log_lower(spec, delta: float) -> LaplaceLower:
    """log P(I < delta) >= L(r) - log 2 at r = log^4(1/delta)/delta, when valid.

    L is lowered by ``r * deficit`` to cover eigenvalues missing from the list.
    """
    lap = _laplace(spec)
    if not 0 < delta < 1:
        raise DomainError("delta must lie in (0, 1)")
    if _lower_condition(lap, delta) < 0:
        raise RangeError(f"Laplace lower bound not valid at delta={delta:g}; "
                         f"largest valid delta is {validity_onset(lap):.4g}")
    r = math.log(1.0 / delta) ** 4 / delta
    rem = lap.remainder(r)
    return LaplaceLower(delta, lap(r) - rem - math.log(2.0), r, rem)


def asymptotic_log_main(quantity: str, delta: float) -> float:
    """Main cubic term only: F -> -(2/(3 pi^2)) log^3(1/d), H -> -(1/(12 pi^2)) log^3(1/d)."""
    if not 0 < delta < 0.25:
        raise DomainError("the main term is only quoted for delta in (0, 1/4)")
    coef = {"F": F_MAIN, "H": H_MAIN}.get(quantity)
    if coef is None:
        raise ConfigError(f"unknown quantity {quantity!r}")
    return -coef * math.log(1.0 / delta) ** 3


# -- estimates ----------------------------------------------------------------

@dataclass(frozen=True)
class SmallBallEstimate:
    delta: float
    log_prob: float
    stderr: float
    method: str
    n_samples: int
    prob: float = math.nan
    prob_stderr: float = math.nan
    extra: dict = field(default_factory=dict)

    def row(self) -> dict:
        out = {"delta": self.delta, "log_prob": self.log_prob, "stderr": self.stderr,
               "method": self.method, "n_samples": self.n_samples,
               "prob": self.prob, "prob_stderr": self.prob_stderr}
        out.update(self.extra)
        return out


def wilson(hits: int, n: int, z: float = WILSON_Z) -> tuple[float, float, float]:
    """Wilson score interval; returns (centre, half_width, point estimate)."""
    p = hits / n
    denom = 1.0 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return centre, half, p


def _binomial_estimate(delta, hits, n, method, extra=None) -> SmallBallEstimate:
    centre, half, p = wilson(hits, n)
    log_p = math.log(p) if hits else -math.inf
    log_se = half / p if hits else math.inf
    return SmallBallEstimate(delta, log_p, log_se, method, n, p, half, dict(extra or {}))


def _stream(seed: SeedSpec, tag: str) -> SeedSpec:
    return SeedSpec(seed.root_seed, f"{seed.stream_label}#{seed.replica_index}/{tag}", 0)


def _chunked(seed: SeedSpec, n: int, chunk: int, fn, threads: int):
    sizes = chunk_sizes(n, chunk)
    return map_ordered(lambda c: fn(generator(seed.replica(c)), sizes[c]), range(len(sizes)), threads)


def tilted_mc_H(spec, level: float, seed: SeedSpec, n_samples: int, r: float | None = None,
                chunk: int = 65536, threads: int = 1) -> SmallBallEstimate:
    """Importance sampling of P(I < level) under the exponentially tilted law.

    Under the tilt xi_k ~ N(0, 1/(1 + 2 r lambda_k)); each draw carries weight
    exp(L(r) + r I) 1{I < level}.  r defaults to the saddle point L'(r) = -level.
    """
    lap = _laplace(spec)
    if level <= 0:
        raise DomainError("level must be positive")
    r = lap.saddle(level) if r is None else float(r)
    lam = lap.eigenvalues
    sd = 1.0 / np.sqrt(1.0 + 2.0 * r * lam)
    log_norm = lap(r)
    stream = _stream(seed, "tilted")

    def one(rng, size):
        xi = rng.standard_normal((size, lam.size)) * sd
        values = (xi * xi) @ lam
        hit = values < level
        w = np.exp(log_norm + r * values[hit])
        return float(w.sum()), float((w * w).sum())

    parts = _chunked(stream, n_samples, chunk, one, threads)
    s1 = pairwise_sum([p[0] for p in parts])
    s2 = pairwise_sum([p[1] for p in parts])
    ess = s1 * s1 / s2 if s2 > 0 else 0.0
    if ess < 50:
        raise UnreliableEstimateError(f"effective sample size {ess:.1f} < 50 at level={level:g}")
    mean = s1 / n_samples
    var = max(s2 / n_samples - mean * mean, 0.0)
    prob_se = math.sqrt(var / n_samples)
    return SmallBallEstimate(level, math.log(mean), prob_se / mean, "mc-tilted", n_samples,
                             mean, prob_se, {"ess": ess, "r": r})


def direct_mc_H(spec, level: float, seed: SeedSpec, n_samples: int, chunk: int = 65536,
                threads: int = 1) -> SmallBallEstimate:
    """Plain Monte Carlo of P(I < level)."""
    lam = _laplace(spec).eigenvalues
    stream = _stream(seed, "direct-H")

    def one(rng, size):
        xi = rng.standard_normal((size, lam.size))
        return int(np.count_nonzero((xi * xi) @ lam < level))

    hits = sum(_chunked(stream, n_samples, chunk, one, threads))
    return _binomial_estimate(level, hits, n_samples, "mc-direct")


# -- sup-norm small balls by direct Monte Carlo ------------------------------

def g_horizon(delta: float) -> float:
    return 4.0 * math.log(1.0 / delta) + 8.0


def f_horizon(delta: float) -> float:
    """Largest t kept for F: t = e^{T} with T the G-horizon (Y_{e^T} = e^{-T/2} Z_T)."""
    return max(50.0, math.exp(g_horizon(min(delta, 1.0))))


def f_grid(t_max: float = 50.0, n_points: int = 512, t_min: float = 1e-4) -> np.ndarray:
    return np.r_[0.0, np.geomspace(t_min, t_max, n_points)]


def g_grid(delta: float, step: float = 0.05) -> np.ndarray:
    n = int(math.ceil(g_horizon(delta) / step))
    return step * np.arange(n + 1)


@dataclass(frozen=True, eq=False)
class SupProblem:
    """Exact-covariance Gaussian vector plus the weights whose sup defines the event."""

    process: str
    grid: np.ndarray
    weights: np.ndarray
    factor: np.ndarray

    @classmethod
    def build(cls, process: str, grid) -> "SupProblem":
        grid = np.asarray(grid, dtype=float)
        if process == "F":
            kernel, weights = KernelSpec("covY"), np.ones_like(grid)
        elif process == "G":
            kernel, weights = KernelSpec("covX"), np.exp(-0.5 * grid)
        else:
            raise ConfigError(f"unknown process {process!r}; expected F or G")
        factor = covariance_factor(gram(kernel, grid)).matrix
        return cls(process, grid, weights, factor)

    def sup_samples(self, rng: np.random.Generator, size: int) -> np.ndarray:
        z = rng.standard_normal((size, self.factor.shape[1]))
        return np.max(np.abs(z @ self.factor.T) * self.weights, axis=1)


def default_grid(process: str, delta: float) -> np.ndarray:
    return f_grid(f_horizon(delta)) if process == "F" else g_grid(delta)


def doubled_grid(process: str, grid: np.ndarray) -> np.ndarray:
    if process == "G":
        step = grid[1] - grid[0]
        return 0.5 * step * np.arange(2 * (grid.size - 1) + 1)
    geo = grid[1:]
    return np.r_[0.0, np.geomspace(geo[0], geo[-1], 2 * geo.size - 1)]


def _check_regime(delta: float):
    lo, hi = DIRECT_RANGE
    if not lo <= delta <= hi:
        raise RegimeError(f"direct Monte Carlo is limited to delta in [{lo}, {hi}]; got {delta:g}")


def count_hits(problem: SupProblem, deltas, seed: SeedSpec, n_samples: int,
               chunk: int = 8192, threads: int = 1) -> np.ndarray:
    """Number of draws with weighted discrete sup <= delta, for every delta (shared draws)."""
    deltas = np.asarray(deltas, dtype=float)

    def one(rng, size):
        sup = problem.sup_samples(rng, size)
        return (sup[:, None] <= deltas[None, :]).sum(axis=0)

    return np.sum(_chunked(seed, n_samples, chunk, one, threads), axis=0)


def grid_bias(problem: SupProblem, delta: float, seed: SeedSpec, n_samples: int,
              chunk: int = 8192) -> float:
    """P_coarse - P_fine on paths drawn on the doubled grid (>= 0 up to noise)."""
    fine = SupProblem.build(problem.process, doubled_grid(problem.process, problem.grid))
    coarse_idx = np.searchsorted(fine.grid, problem.grid)
    coarse_idx = np.clip(coarse_idx, 0, fine.grid.size - 1)
    hits_c = hits_f = 0
    for c, size in enumerate(chunk_sizes(n_samples, chunk)):
        rng = generator(seed.replica(c))
        z = rng.standard_normal((size, fine.factor.shape[1]))
        paths = np.abs(z @ fine.factor.T) * fine.weights
        hits_f += int(np.count_nonzero(paths.max(axis=1) <= delta))
        hits_c += int(np.count_nonzero(paths[:, coarse_idx].max(axis=1) <= delta))
    return (hits_c - hits_f) / n_samples


def mc_sup_smallball(process: str, delta: float, seed: SeedSpec, n_samples: int,
                     grid=None, bias_fraction: float = 0.1, threads: int = 1) -> SmallBallEstimate:
    """Direct Monte Carlo of F(delta) or G(delta) on a discrete grid.

    The discrete sup under-reads the true sup, so the estimate is biased upward;
    the bias is measured by redrawing ``bias_fraction`` of the samples on the
    doubled grid.
    """
    _check_regime(delta)
    grid = default_grid(process, delta) if grid is None else np.asarray(grid, dtype=float)
    problem = SupProblem.build(process, grid)
    stream = _stream(seed, f"sup-{process}")
    hits = int(count_hits(problem, [delta], stream, n_samples, threads=threads)[0])
    bias = math.nan
    if bias_fraction > 0:
        n_bias = max(1000, int(bias_fraction * n_samples))
        bias = grid_bias(problem, delta, _stream(seed, f"bias-{process}"), n_bias)
    return _binomial_estimate(delta, hits, n_samples, "mc-direct",
                              {"grid_bias": bias, "grid_points": int(grid.size)})


def mc_sup_table(process: str, deltas, seed: SeedSpec, n_samples: int, grid=None,
                 bias_fraction: float = 0.0, threads: int = 1) -> list[SmallBallEstimate]:
    """Independent estimates (one stream per delta) on one shared grid."""
    deltas = np.sort(np.asarray(deltas, dtype=float))
    for d in deltas:
        _check_regime(d)
    grid = default_grid(process, float(deltas[0])) if grid is None else np.asarray(grid, dtype=float)
    problem = SupProblem.build(process, grid)
    out = []
    for i, d in enumerate(deltas):
        stream = _stream(seed, f"sup-{process}-{i}")
        hits = int(count_hits(problem, [d], stream, n_samples, threads=threads)[0])
        extra = {"grid_points": int(grid.size)}
        if bias_fraction > 0:
            extra["grid_bias"] = grid_bias(problem, float(d), _stream(seed, f"bias-{process}-{i}"),
                                           max(1000, int(bias_fraction * n_samples)))
        out.append(_binomial_estimate(float(d), hits, n_samples, "mc-direct", extra))
    return out


# -- F inverse ----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FInverseModel:
    """Monotone model of F on [delta_min, delta_max] with an asymptotic lower branch.

    The MC values are isotonic-regressed (weights 1/stderr^2), tied blocks are
    pooled, and a cubic spline runs through (log delta, log F). The spline is
    used only when it is strictly increasing on the whole range; otherwise the
    shape-preserving PCHIP interpolant takes over.
    """

    deltas: np.ndarray
    probs: np.ndarray
    stderrs: np.ndarray
    knots_log_delta: np.ndarray
    knots_log_prob: np.ndarray

    @classmethod
    def fit(cls, table: list[SmallBallEstimate]) -> "FInverseModel":
        if len(table) < 3:
            raise ConfigError("the F table needs at least three points")
        table = sorted(table, key=lambda e: e.delta)
        deltas = np.array([e.delta for e in table])
        probs = np.array([e.prob for e in table])
        ses = np.array([e.prob_stderr for e in table])
        if np.any(probs <= 0):
            raise ConfigError("F table contains zero estimates; increase samples or delta")
        fitted = optimize.isotonic_regression(probs, weights=1.0 / ses ** 2, increasing=True).x
        log_d, log_p = [], []
        for value in np.unique(fitted):
            block = fitted == value
            log_d.append(float(np.mean(np.log(deltas[block]))))
            log_p.append(math.log(value))
        return cls(deltas, probs, ses, np.array(log_d), np.array(log_p))

    @cached_property
    def _interp(self):
        x, y = self.knots_log_delta, self.knots_log_prob
        if len(x) >= 4:
            spline = interpolate.CubicSpline(x, y, extrapolate=False)
            dense = np.linspace(x[0], x[-1], 64 * len(x))
            slope = spline.derivative()
            if np.all(slope(dense) > 0) and not len(slope.roots(extrapolate=False)):
                return spline
        return interpolate.PchipInterpolator(x, y, extrapolate=False)

    @property
    def interpolant(self) -> str:
        return "pchip" if isinstance(self._interp, interpolate.PchipInterpolator) else "cubic"

    @property
    def delta_range(self) -> tuple[float, float]:
        return float(self.deltas[0]), float(self.deltas[-1])

    @property
    def prob_range(self) -> tuple[float, float]:
        return float(math.exp(self.knots_log_prob[0])), float(math.exp(self.knots_log_prob[-1]))

    def F(self, delta) -> float:
        """Fitted F; constant beyond the outer knots (pooled isotonic blocks) up to the table ends."""
        lo, hi = self.delta_range
        if not lo * (1 - 1e-12) <= delta <= hi * (1 + 1e-12):
            raise ExtrapolationError(f"delta={delta:g} outside the fitted range [{lo:g}, {hi:g}]")
        x = min(max(math.log(delta), self.knots_log_delta[0]), self.knots_log_delta[-1])
        if len(self.knots_log_delta) == 1:
            return float(math.exp(self.knots_log_prob[0]))
        return float(math.exp(self._interp(x)))

    def branch(self, p: float) -> str:
        lo, hi = self.prob_range
        if not 0 < p <= hi:
            raise ExtrapolationError(f"p={p:g} outside the achievable range (0, {hi:g}]")
        return "mc" if p >= lo else "asymptotic"

    def inverse(self, p: float) -> float:
        if self.branch(p) == "asymptotic":
            return math.exp(-(math.log(1.0 / p) / F_MAIN) ** (1.0 / 3.0))
        if len(self.knots_log_prob) == 1:
            return math.exp(self.knots_log_delta[0])
        target = math.log(p)
        f = self._interp
        lo, hi = self.knots_log_delta[0], self.knots_log_delta[-1]
        if target >= self.knots_log_prob[-1]:
            return math.exp(hi)
        if target <= self.knots_log_prob[0]:
            return math.exp(lo)
        return float(math.exp(optimize.brentq(lambda x: float(f(x)) - target, lo, hi, xtol=1e-14)))

    __call__ = inverse

    def stderr_at(self, delta: float) -> float:
        """Interpolated MC standard error of F at ``delta`` (for round-trip comparisons)."""
        return float(np.interp(math.log(delta), np.log(self.deltas), self.stderrs))

    def to_json(self) -> str:
        lo, hi = self.delta_range
        return json.dumps({
            "knots_log_delta": self.knots_log_delta.tolist(),
            "knots_log_prob": self.knots_log_prob.tolist(),
            "validity_range": [lo, hi],
            "interpolant": self.interpolant if len(self.knots_log_delta) > 1 else "constant",
            "table": {"delta": self.deltas.tolist(), "prob": self.probs.tolist(),
                      "stderr": self.stderrs.tolist()},
        }, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "FInverseModel":
        data = json.loads(text)
        tab = data["table"]
        return cls(np.array(tab["delta"]), np.array(tab["prob"]), np.array(tab["stderr"]),
                   np.array(data["knots_log_delta"]), np.array(data["knots_log_prob"]))


def f_inverse_model(table: list[SmallBallEstimate]) -> FInverseModel:
    return FInverseModel.fit(table)


# -- diagnostics --------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ConcavityReport:
    x: np.ndarray
    second_differences: np.ndarray
    sigma: np.ndarray
    flags: np.ndarray
    threshold: float

    @property
    def n_flags(self) -> int:
        return int(self.flags.sum())


def psi_concavity_check(table: list[SmallBallEstimate], threshold: float = 3.0) -> ConcavityReport:
    """Second divided differences of Psi(x) = log F(e^{-x}); flag positives beyond threshold * sigma.

    The table points must come from independent streams for the propagated
    sigma to be valid.
    """
    if len(table) < 5:
        raise ConfigError("concavity check needs at least five table points")
    table = sorted(table, key=lambda e: -e.delta)
    x = np.array([-math.log(e.delta) for e in table])
    psi = np.array([e.log_prob for e in table])
    se = np.array([e.stderr for e in table])
    h1 = x[1:-1] - x[:-2]
    h2 = x[2:] - x[1:-1]
    c0 = 2.0 / (h1 * (h1 + h2))
    c1 = -2.0 / (h1 * h2)
    c2 = 2.0 / (h2 * (h1 + h2))
    d2 = c0 * psi[:-2] + c1 * psi[1:-1] + c2 * psi[2:]
    sigma = np.sqrt((c0 * se[:-2]) ** 2 + (c1 * se[1:-1]) ** 2 + (c2 * se[2:]) ** 2)
    flags = d2 > threshold * sigma
    return ConcavityReport(x[1:-1], d2, sigma, flags, threshold)


@dataclass(frozen=True)
class IncrementReport:
    delta: float
    t: float
    observed: float
    main_term: float


def increment_diagnostic(model: FInverseModel, delta: float, t: float) -> IncrementReport:
    """log(F(delta e^t) / F(delta)) next to (2t / pi^2) log^2(1/delta); exploratory only."""
    if t < 0:
        raise DomainError("t must be non-negative")
    observed = math.log(model.F(delta * math.exp(t))) - math.log(model.F(delta))
    return IncrementReport(delta, t, observed, 2.0 * t / math.pi ** 2 * math.log(1.0 / delta) ** 2)


@dataclass(frozen=True)
class CorrelationReport:
    p_a: float
    p_b: float
    p_ab: float
    difference: float
    stderr: float

    @property
    def ok(self) -> bool:
        return self.difference >= -2.0 * self.stderr


def gaussian_correlation_check(samples: np.ndarray, block_a, block_b, level_a: float,
                               level_b: float) -> CorrelationReport:
    """P(A and B) - P(A) P(B) for symmetric slabs on disjoint coordinate blocks."""
    block_a = np.asarray(block_a)
    block_b = np.asarray(block_b)
    if np.intersect1d(block_a, block_b).size:
        raise ConfigError("coordinate blocks must be disjoint")
    a = np.max(np.abs(samples[:, block_a]), axis=1) <= level_a
    b = np.max(np.abs(samples[:, block_b]), axis=1) <= level_b
    pa, pb, pab = a.mean(), b.mean(), (a & b).mean()
    influence = (a & b) - pb * a - pa * b
    se = float(influence.std() / math.sqrt(len(a)))
    return CorrelationReport(float(pa), float(pb), float(pab), float(pab - pa * pb), se)


def estimate_to_dict(est: SmallBallEstimate) -> dict:
    return asdict(est)
