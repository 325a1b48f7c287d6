"""Dyadic meshes, block decompositions and envelope statistics along one sign stream."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import stats

from .errors import ConfigError, DomainError, ExtrapolationError, RangeError
from .littlewood import INNER_RADIUS, SignSequence, polyval_many
from .gaussian import KernelSpec, sample_path_exact
from .rng import SeedSpec, map_ordered, rademacher_stream

LIMINF_CONSTANT = (3.0 * math.pi ** 2 / 4.0) ** (1.0 / 3.0)
MIN_N = 16
_INT64_LIMIT = 2 ** 63


@dataclass(frozen=True, eq=False)
class MeshSpec:
    N: int
    delta: float
    points: np.ndarray

    @property
    def max_gap(self) -> int:
        return int(np.max(np.diff(self.points))) if self.points.size > 1 else 0


def dyadic_mesh(N: int, delta: float) -> MeshSpec:
    """m_0 = N, m_{j+1} = max(m_j + 1, floor((1 + delta) m_j)) while <= 2N; 2N adjoined.

    The ``m_j + 1`` guard only matters when delta * m_j < 1, where the mesh
    becomes every integer.
    """
    if N < 4:
        raise ConfigError("dyadic_mesh needs N >= 4")
    if not 0 < delta <= 0.5:
        raise ConfigError("mesh ratio must lie in (0, 1/2]")
    pts = [N]
    while True:
        nxt = max(pts[-1] + 1, int(math.floor((1.0 + delta) * pts[-1])))
        if nxt > 2 * N:
            break
        pts.append(nxt)
    if pts[-1] != 2 * N:
        pts.append(2 * N)
    return MeshSpec(N, float(delta), np.array(pts, dtype=np.int64))


@dataclass(frozen=True, eq=False)
class BlockCheck:
    residual: float
    block: SignSequence
    block_degree: int


def block_decompose_check(signs: SignSequence, n_j: int, x_grid) -> BlockCheck:
    """Residual of f_{N'}(x) = f_{N_j}(x) + x^{N_j + 1} g_j(x) with N' = degree of ``signs``."""
    n_next = signs.degree
    if not 0 <= n_j < n_next:
        raise ConfigError("need 0 <= N_j < degree")
    x = np.asarray(x_grid, dtype=float)
    c = signs.coeffs.astype(float)
    lhs = polyval_many(c, x)
    g = SignSequence(signs.coeffs[n_j + 1 :])
    rhs = polyval_many(c[: n_j + 1], x) + np.power(x, n_j + 1) * polyval_many(g.coeffs.astype(float), x)
    return BlockCheck(float(np.max(np.abs(lhs - rhs))), g, g.degree)


def sparse_sequence(A: float, j_max: int) -> np.ndarray:
    """N_j = ceil(exp(A j log^{1/3}(j + 1))) for j = 1..j_max."""
    if not A > 0:
        raise DomainError("A must be positive")
    if j_max < 1:
        raise ConfigError("j_max must be at least 1")
    out = []
    limit = math.log(_INT64_LIMIT)
    for j in range(1, j_max + 1):
        expo = A * j * math.log(j + 1) ** (1.0 / 3.0)
        if expo >= limit:
            raise RangeError(f"N_j overflows 64-bit integers at j={j}; largest safe j is {j - 1}")
        val = math.ceil(math.exp(expo))
        if val >= _INT64_LIMIT:
            raise RangeError(f"N_j overflows 64-bit integers at j={j}; largest safe j is {j - 1}")
        out.append(val)
    return np.array(out, dtype=np.int64)


def s_scale(n: int) -> float:
    return math.log(math.log(n)) ** (1.0 / 3.0)


def mesh_ratio(N: int, A: float) -> float:
    return min(0.5, math.exp(-A * s_scale(N)))


def checkpoints(n_max: int, A: float = 4.0) -> np.ndarray:
    """Union of the dyadic meshes of every block [N, 2N], N = 16, 32, ..., below n_max."""
    if n_max < MIN_N:
        raise ConfigError(f"n_max must be at least {MIN_N}")
    pts = {MIN_N}
    N = MIN_N
    while N < n_max:
        mesh = dyadic_mesh(N, mesh_ratio(N, A)).points
        pts.update(int(p) for p in mesh if p <= n_max)
        N *= 2
    return np.array(sorted(pts), dtype=np.int64)


# -- incremental evaluation ---------------------------------------------------

_U_STEP = 0.004
_N_INNER = 129
_BLOCK = 256


@dataclass(frozen=True, eq=False)
class _BlockGrid:
    xs: np.ndarray
    coords: np.ndarray
    segment: np.ndarray
    N: int

    def to_x(self, seg: np.ndarray, coord: np.ndarray) -> np.ndarray:
        branch = np.exp(-np.expm1(coord) / self.N)
        return np.where(seg == 0, branch, np.where(seg == 1, -branch, coord))


def _block_grid(N: int) -> _BlockGrid:
    u_max = math.log1p(6.0 * N)
    u = np.linspace(0.0, u_max, int(math.ceil(u_max / _U_STEP)) + 1)
    x_plus = np.exp(-np.expm1(u) / N)
    inner = np.linspace(-INNER_RADIUS, INNER_RADIUS, _N_INNER)
    xs = np.concatenate([x_plus, -x_plus, inner])
    coords = np.concatenate([u, u, inner])
    seg = np.concatenate([np.zeros(u.size, int), np.ones(u.size, int), np.full(inner.size, 2)])
    return _BlockGrid(xs, coords, seg, N)


def polyval_pointwise(coeffs: np.ndarray, xs: np.ndarray) -> np.ndarray:
    """Row i of ``coeffs`` evaluated at ``xs[i]``."""
    batch, length = coeffs.shape
    nblocks = -(-length // _BLOCK)
    padded = np.zeros((batch, nblocks * _BLOCK))
    padded[:, :length] = coeffs
    inner = np.einsum("scb,sb->sc", padded.reshape(batch, nblocks, _BLOCK),
                      np.power(xs[:, None], np.arange(_BLOCK)[None, :]))
    outer = np.power(xs[:, None], (_BLOCK * np.arange(nblocks))[None, :])
    return np.sum(inner * outer, axis=1)


def _refined_sup(grid: _BlockGrid, values: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
    """Grid maximum of |f| per row, improved by a parabolic step at the best node."""
    mag = np.abs(values)
    best = np.argmax(mag, axis=1)
    rows = np.arange(mag.shape[0])
    seg = grid.segment[best]
    size = grid.coords.size
    lo = np.clip(best - 1, 0, size - 1)
    hi = np.clip(best + 1, 0, size - 1)
    interior = (grid.segment[lo] == seg) & (grid.segment[hi] == seg) & (lo < best) & (best < hi)
    c0, c1, c2 = grid.coords[lo], grid.coords[best], grid.coords[hi]
    v0, v1, v2 = mag[rows, lo], mag[rows, best], mag[rows, hi]
    denom = (c0 - c1) * (c0 - c2) * (c1 - c2)
    safe = np.where(np.abs(denom) > 0, denom, 1.0)
    a = (c2 * (v1 - v0) + c1 * (v0 - v2) + c0 * (v2 - v1)) / safe
    b = (c2 * c2 * (v0 - v1) + c1 * c1 * (v2 - v0) + c0 * c0 * (v1 - v2)) / safe
    vertex = np.where(interior & (a < 0), -b / (2.0 * np.where(a < 0, a, -1.0)), c1)
    vertex = np.clip(vertex, c0, c2)
    x_star = grid.to_x(seg, vertex)
    refined = np.abs(polyval_pointwise(coeffs, x_star))
    return np.maximum(mag[rows, best], refined)


def batch_sup_norms(coeffs: np.ndarray, ns: Sequence[int]) -> np.ndarray:
    """sup-norms of f_n for every row of ``coeffs`` and every n in ``ns`` (ascending).

    Grid values are carried from one n to the next by adding the new terms
    (x^{m+1} times a block power table), and the grid is rebuilt at each dyadic
    scale.
    """
    ns = np.asarray(ns, dtype=np.int64)
    if np.any(np.diff(ns) <= 0) or ns[0] < MIN_N:
        raise ConfigError("checkpoints must be increasing and at least 16")
    if ns[-1] >= coeffs.shape[1]:
        raise ConfigError("not enough coefficients for the requested degrees")
    out = np.empty((coeffs.shape[0], ns.size))
    grid = None
    current = -1
    values = None
    for idx, n in enumerate(ns):
        scale = 1 << (int(n).bit_length() - 1)
        if grid is None or grid.N != scale:
            grid = _block_grid(scale)
            values = polyval_many(coeffs[:, : n + 1], grid.xs)
            in_block = ns[(ns > n) & (ns <= 2 * scale)]
            steps = np.diff(np.concatenate([[n], in_block]))
            k_max = int(steps.max()) if steps.size else 1
            table = np.cumprod(np.vstack([np.ones_like(grid.xs), np.broadcast_to(grid.xs, (k_max - 1, grid.xs.size))]), axis=0)
        else:
            k = n - current
            values = values + (coeffs[:, current + 1 : n + 1] @ table[:k]) * np.power(grid.xs, current + 1)
        current = n
        out[:, idx] = _refined_sup(grid, values, coeffs[:, : n + 1])
    return out


# -- envelope runs ---------------------------------------------------------------

@dataclass(eq=False)
class EnvelopeTrace:
    seed: np.ndarray
    n: np.ndarray
    sup_norm: np.ndarray
    ratio_liminf: np.ndarray
    ratio_limsup: np.ndarray
    normalized_stat: np.ndarray
    b_branch: list
    running_min_liminf: np.ndarray
    running_max_limsup: np.ndarray
    running_min_normalized: np.ndarray
    meta: dict = field(default_factory=dict)

    COLUMNS = ("seed", "n", "sup_norm", "ratio_liminf", "ratio_limsup", "normalized_stat", "b_branch",
               "running_min_liminf", "running_max_limsup", "running_min_normalized")

    def rows(self):
        for i in range(self.n.size):
            yield {c: (self.b_branch[i] if c == "b_branch" else getattr(self, c)[i].item())
                   for c in self.COLUMNS}

    def at(self, n: int) -> np.ndarray:
        return np.flatnonzero(self.n == n)

    def summary(self) -> dict:
        seeds = np.unique(self.seed)
        last = {int(s): int(np.flatnonzero(self.seed == s)[-1]) for s in seeds}
        per_seed = {str(s): {"n_final": int(self.n[i]),
                             "min_ratio_liminf": float(self.running_min_liminf[i]),
                             "max_ratio_limsup": float(self.running_max_limsup[i]),
                             "min_normalized_stat": float(self.running_min_normalized[i])}
                    for s, i in last.items()}
        final = np.array(list(last.values()))
        return {"seeds": int(seeds.size), "n_max": int(self.n.max()),
                "median_min_normalized_stat": float(np.median(self.running_min_normalized[final])),
                "median_max_ratio_limsup": float(np.median(self.running_max_limsup[final])),
                "median_min_ratio_liminf": float(np.median(self.running_min_liminf[final])),
                "liminf_constant": -LIMINF_CONSTANT, "per_seed": per_seed, **self.meta}


def envelope_seed(root_seed: int, index: int) -> SeedSpec:
    return SeedSpec(root_seed, "envelope", index)


def run_envelope(n_max: int, seeds: Sequence[int] | int, root_seed: int,
                 f_inverse: Callable[[float], float], A: float = 4.0, batch: int = 20,
                 threads: int = 1) -> EnvelopeTrace:
    """Track sup-norm statistics of f_n along the checkpoints for each seed.

    Coefficients for seed i are the prefix-consistent sign stream
    (root_seed, "envelope", i), so shorter runs are prefixes of longer ones.
    ``f_inverse`` maps p_n to b_n; if it exposes ``branch(p)`` the branch is recorded.
    """
    if n_max > 2 ** 20:
        raise ConfigError("n_max is limited to 2^20")
    seed_list = list(range(seeds)) if isinstance(seeds, int) else [int(s) for s in seeds]
    if not seed_list:
        raise ConfigError("at least one seed is required")
    ns = checkpoints(n_max, A)
    b_vals, branches = [], []
    for n in ns:
        p = math.log(n) ** -0.5
        try:
            b_vals.append(float(f_inverse(p)))
            branches.append(f_inverse.branch(p) if hasattr(f_inverse, "branch") else "model")
        except ExtrapolationError:
            b_vals.append(math.nan)
            branches.append("extrapolation")
    b_vals = np.array(b_vals)
    groups = [seed_list[i : i + batch] for i in range(0, len(seed_list), batch)]

    def run(group_index):
        group = groups[group_index]
        coeffs = np.vstack([rademacher_stream(envelope_seed(root_seed, s), n_max + 1) for s in group])
        return batch_sup_norms(coeffs.astype(float), ns)

    sups = np.vstack(map_ordered(run, range(len(groups)), threads))
    root_n = np.sqrt(ns.astype(float))
    loglog = np.log(np.log(ns.astype(float)))
    liminf = sups / (root_n * b_vals)
    limsup = sups / np.sqrt(ns * loglog)
    normalized = np.log(sups / root_n) / loglog ** (1.0 / 3.0)
    n_seeds = len(seed_list)
    return EnvelopeTrace(
        seed=np.repeat(np.array(seed_list), ns.size),
        n=np.tile(ns, n_seeds),
        sup_norm=sups.ravel(),
        ratio_liminf=liminf.ravel(),
        ratio_limsup=limsup.ravel(),
        normalized_stat=normalized.ravel(),
        b_branch=branches * n_seeds,
        running_min_liminf=np.fmin.accumulate(liminf, axis=1).ravel(),
        running_max_limsup=np.maximum.accumulate(limsup, axis=1).ravel(),
        running_min_normalized=np.minimum.accumulate(normalized, axis=1).ravel(),
        meta={"A": A, "root_seed": root_seed, "checkpoints": int(ns.size)},
    )


# -- Gaussian bridge ---------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class BridgeResult:
    ks: float
    pvalue: float
    poly_sups: np.ndarray
    gauss_sups: np.ndarray


def bridge_check(n: int = 2 ** 14, n_samples: int = 2000, root_seed: int = 0,
                 t_grid=None, batch: int = 250) -> BridgeResult:
    """Two-sample KS distance between sup_t |f_n(e^{-t/n})|/sqrt(n) and sup_t |Y(t)| on one grid."""
    if t_grid is None:
        t_grid = np.r_[0.0, np.geomspace(1e-4, 50.0, 512)]
    t_grid = np.asarray(t_grid, dtype=float)
    xs = np.exp(-t_grid / n)
    poly = np.empty(n_samples)
    for lo in range(0, n_samples, batch):
        idx = range(lo, min(lo + batch, n_samples))
        c = np.vstack([rademacher_stream(SeedSpec(root_seed, "bridge", i), n + 1) for i in idx])
        poly[lo : lo + len(idx)] = np.abs(polyval_many(c.astype(float), xs)).max(axis=1) / math.sqrt(n)
    paths = sample_path_exact(KernelSpec("covY"), t_grid, SeedSpec(root_seed, "bridge-gauss"), n_samples)
    gauss = np.abs(paths).max(axis=1)
    res = stats.ks_2samp(poly, gauss)
    return BridgeResult(float(res.statistic), float(res.pvalue), poly, gauss)
