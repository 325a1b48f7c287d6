"""Littlewood polynomials: evaluation, sup-norms, endpoint profiles.

Near ``x = +1`` and ``x = -1`` the polynomial is read in the logarithmic
coordinate ``x = +-exp(-t/n)``; the normalized *profiles*
``t -> n**-0.5 * f(+-exp(-t/n))`` together with the value at ``x = 0`` recover
the sup-norm on ``[-1, 1]`` exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable

import numpy as np

from .errors import ConfigError, DomainError, EmptyInputError
from .rng import SeedSpec, rademacher_stream

# the t-grid covers x in [e^-3, 1]; the rest of [-1, 1] is a uniform x-grid
T_SPAN = 3.0
INNER_RADIUS = math.exp(-T_SPAN)
_BLOCK = 256
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True, eq=False)
class SignSequence:
    """Coefficients ``eps_0 .. eps_n`` of a Littlewood polynomial."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs)
        if c.ndim != 1 or c.size == 0:
            raise EmptyInputError("a Littlewood polynomial needs at least one coefficient")
        if not np.all((c == 1) | (c == -1)):
            raise ConfigError("Littlewood coefficients must all be +1 or -1")
        object.__setattr__(self, "coeffs", c.astype(np.int8))

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    def __len__(self):
        return self.coeffs.size

    def __eq__(self, other):
        return isinstance(other, SignSequence) and np.array_equal(self.coeffs, other.coeffs)

    def __hash__(self):
        return hash(self.coeffs.tobytes())

    def negated(self) -> "SignSequence":
        return SignSequence(-self.coeffs)

    def alternated(self) -> "SignSequence":
        """Coefficients ``(-1)**k eps_k``; the polynomial becomes ``f(-x)``."""
        signs = np.where(np.arange(self.coeffs.size) % 2 == 0, 1, -1)
        return SignSequence(self.coeffs * signs)

    def truncated(self, degree: int) -> "SignSequence":
        if not 0 <= degree <= self.degree:
            raise DomainError(f"cannot truncate degree {self.degree} polynomial to degree {degree}")
        return SignSequence(self.coeffs[: degree + 1])

    def to_text(self) -> str:
        return " ".join(str(int(v)) for v in self.coeffs)

    @classmethod
    def from_text(cls, line: str) -> "SignSequence":
        try:
            values = [int(tok) for tok in line.split()]
        except ValueError as exc:
            raise ConfigError(f"malformed polynomial line: {line!r}") from exc
        return cls(np.array(values))

    @classmethod
    def random(cls, seed: SeedSpec, degree: int) -> "SignSequence":
        return cls(rademacher_stream(seed, degree + 1))


def read_polynomials(path) -> list[SignSequence]:
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines:
        raise EmptyInputError(f"no polynomials in {path}")
    return [SignSequence.from_text(ln) for ln in lines]


def write_polynomials(path, polys: Iterable[SignSequence]) -> None:
    Path(path).write_text("".join(p.to_text() + "\n" for p in polys))


@dataclass(frozen=True)
class SupNormResult:
    value: float
    argmax_x: float
    method: str


@dataclass(frozen=True)
class ScaleTriple:
    s_n: float
    p_n: float
    b_n: float


def _coeff_array(poly) -> np.ndarray:
    if isinstance(poly, SignSequence):
        return poly.coeffs.astype(float)
    return np.asarray(poly, dtype=float)


def polyval_many(coeffs, xs) -> np.ndarray:
    """Evaluate one or many coefficient vectors at the points ``xs``.

    ``coeffs`` is ``(n+1,)`` or ``(batch, n+1)``; the result is ``(m,)`` or
    ``(batch, m)``.  Uses ``x**(c*B + j) = x**(c*B) * x**j`` so the work is a
    single matrix product against a ``B``-column power table.
    """
    c = np.atleast_2d(np.asarray(coeffs, dtype=float))
    xs = np.asarray(xs, dtype=float)
    flat = xs.ravel()
    batch, length = c.shape
    block = min(_BLOCK, length)
    nblocks = -(-length // block)
    padded = np.zeros((batch, nblocks * block))
    padded[:, :length] = c
    powers = np.power(flat[:, None], np.arange(block)[None, :])
    outer = np.power(flat[:, None], (block * np.arange(nblocks))[None, :])
    inner = padded.reshape(batch * nblocks, block) @ powers.T
    inner = inner.reshape(batch, nblocks, flat.size)
    out = np.einsum("bcm,mc->bm", inner, outer)
    out = out.reshape((batch,) + xs.shape)
    return out[0] if np.ndim(coeffs) == 1 else out


def evaluate(poly: SignSequence, x: float) -> float:
    """Horner evaluation of ``f_n(x)`` for ``x`` in ``[-1, 1]``."""
    x = float(x)
    if abs(x) > 1.0:
        raise DomainError(f"x={x} lies outside [-1, 1]")
    acc = 0.0
    for c in poly.coeffs[::-1]:
        acc = acc * x + float(c)
    return acc


def _check_profile_degree(poly: SignSequence) -> int:
    if poly.degree < 1:
        raise DomainError("profiles need degree >= 1")
    return poly.degree


def profile(poly: SignSequence, t, sign: int = 1):
    """Normalized endpoint profile ``n**-0.5 * f_n(sign * exp(-t/n))``."""
    n = _check_profile_degree(poly)
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise DomainError("profile is defined for t >= 0 only")
    if sign not in (1, -1):
        raise ConfigError("sign must be +1 or -1")
    xs = sign * np.exp(-t_arr / n)
    vals = polyval_many(_coeff_array(poly), xs) / math.sqrt(n)
    return float(vals) if np.ndim(t) == 0 else vals


def even_odd_split(poly: SignSequence) -> tuple[Callable, Callable]:
    """Even and odd parts of the ``+`` profile as functions of ``t``.

    ``E(t) + O(t)`` is the ``+`` profile and ``E(t) - O(t)`` the ``-`` profile.
    ``E`` only reads even-index coefficients, ``O`` only odd-index ones.
    """
    n = _check_profile_degree(poly)
    c = _coeff_array(poly)
    parity = np.arange(c.size) % 2
    even = np.where(parity == 0, c, 0.0)
    odd = np.where(parity == 1, c, 0.0)
    scale = 1.0 / math.sqrt(n)

    def make(part):
        def fn(t):
            t_arr = np.asarray(t, dtype=float)
            if np.any(t_arr < 0):
                raise DomainError("profile is defined for t >= 0 only")
            vals = polyval_many(part, np.exp(-t_arr / n)) * scale
            return float(vals) if np.ndim(t) == 0 else vals
        return fn

    return make(even), make(odd)


def partial_sums(poly: SignSequence) -> np.ndarray:
    """``S_k = eps_0 + ... + eps_k`` in exact 64-bit integer arithmetic."""
    return np.cumsum(poly.coeffs, dtype=np.int64)


def max_partial_sum_diff(poly: SignSequence, m: int, n: int) -> int:
    """``max_{m <= k <= n} |S_k - S_m|``.

    By summation by parts this bounds ``max_{x in [0,1]} |f_n(x) - f_m(x)|``
    (and, after ``eps_k -> (-1)**k eps_k``, the same on ``[-1, 0]``).
    """
    if not 0 <= m < n <= poly.degree:
        raise ConfigError(f"need 0 <= m < n <= degree, got m={m}, n={n}, degree={poly.degree}")
    s = partial_sums(poly)
    return int(np.max(np.abs(s[m : n + 1] - s[m])))


# -- sup-norm -----------------------------------------------------------------

def profile_grid_size(n: int) -> int:
    return int(min(max(32 * (n + 1), 512), 4096))


def _segments(n: int, n_t: int | None = None, n_inner: int = 129):
    """Grid segments covering [-1, 1] as (coordinate array, coord -> x map)."""
    n_t = profile_grid_size(n) if n_t is None else n_t
    u = np.linspace(0.0, math.log1p(T_SPAN * n), n_t)

    def branch(sign):
        return lambda uu: sign * np.exp(-np.expm1(uu) / n)

    inner = np.linspace(-INNER_RADIUS, INNER_RADIUS, n_inner)
    return [(u, branch(1)), (u, branch(-1)), (inner, lambda xx: xx)]


def _local_max_indices(v: np.ndarray) -> np.ndarray:
    left = np.r_[-np.inf, v[:-1]]
    right = np.r_[v[1:], -np.inf]
    return np.flatnonzero((v >= left) & (v >= right))


def _golden_refine(c, lo, hi, to_x, iters=90):
    """Vectorized golden-section maximization of |f(to_x(u))| on [lo, hi]."""
    lo = lo.copy()
    hi = hi.copy()
    for _ in range(iters):
        span = hi - lo
        a = hi - _GOLDEN * span
        b = lo + _GOLDEN * span
        vals = np.abs(polyval_many(c, to_x(np.concatenate([a, b]))))
        fa, fb = vals[: a.size], vals[a.size :]
        move_up = fa < fb
        lo = np.where(move_up, a, lo)
        hi = np.where(move_up, hi, b)
    mid = 0.5 * (lo + hi)
    pts = np.concatenate([lo, mid, hi])
    vals = np.abs(polyval_many(c, to_x(pts))).reshape(3, -1)
    best = np.argmax(vals, axis=0)
    cols = np.arange(lo.size)
    return vals[best, cols], pts.reshape(3, -1)[best, cols]


def sup_norm(poly: SignSequence, method: str = "grid+refine", *,
             candidate_margin: float = 0.9, max_candidates: int = 32) -> SupNormResult:
    """``max_{x in [-1,1]} |f_n(x)|``.

    ``grid+refine`` scans both endpoint profiles on a grid uniform in
    ``log(1 + t)`` for ``t in [0, 3n]`` plus a uniform grid on
    ``|x| <= e^-3`` (which contains ``x = 0``), then golden-section refines
    every grid local maximum within ``candidate_margin`` of the grid maximum.
    ``brute`` delegates to :func:`brute_sup_norm`.
    """
    if method == "brute":
        return brute_sup_norm(poly)
    if method != "grid+refine":
        raise ConfigError(f"unknown sup-norm method {method!r}")
    c = _coeff_array(poly)
    n = poly.degree
    if n == 0:
        return SupNormResult(1.0, 0.0, method)
    segs = _segments(n)
    grid_vals = [np.abs(polyval_many(c, to_x(coord))) for coord, to_x in segs]
    grid_max = max(float(v.max()) for v in grid_vals)
    best_val, best_x = -1.0, 0.0
    for (coord, to_x), v in zip(segs, grid_vals):
        idx = _local_max_indices(v)
        idx = idx[v[idx] >= candidate_margin * grid_max]
        idx = idx[np.argsort(-v[idx])][:max_candidates]
        if idx.size == 0:
            continue
        lo = coord[np.maximum(idx - 1, 0)]
        hi = coord[np.minimum(idx + 1, coord.size - 1)]
        vals, where = _golden_refine(c, lo, hi, to_x)
        k = int(np.argmax(vals))
        cand = max((float(vals[k]), float(to_x(where[k]))), (float(v[idx[0]]), float(to_x(coord[idx[0]]))))
        if cand[0] > best_val:
            best_val, best_x = cand
    return SupNormResult(best_val, best_x, method)


def _horner(c: np.ndarray, xs: np.ndarray) -> np.ndarray:
    acc = np.zeros_like(xs)
    for coef in c[::-1]:
        acc = acc * xs + coef
    return acc


def brute_sup_norm(poly: SignSequence, n_points: int = 10**6) -> SupNormResult:
    """Oracle: dense equispaced scan of [-1, 1] plus bisection on f'.

    Shares no code with the profile-based path beyond plain Horner evaluation.
    """
    c = _coeff_array(poly)
    if poly.degree == 0:
        return SupNormResult(1.0, 0.0, "brute")
    dc = c[1:] * np.arange(1, c.size)
    xs = np.linspace(-1.0, 1.0, n_points)
    v = np.abs(_horner(c, xs))
    idx = _local_max_indices(v)
    idx = idx[v[idx] >= (1.0 - 1e-4) * v.max()]
    best_val, best_x = float(v.max()), float(xs[np.argmax(v)])
    for i in idx:
        if i == 0 or i == n_points - 1:
            continue
        lo, hi = xs[i - 1], xs[i + 1]
        sgn = np.sign(_horner(c, np.array([xs[i]])))[0]
        g_lo = sgn * _horner(dc, np.array([lo]))[0]
        g_hi = sgn * _horner(dc, np.array([hi]))[0]
        if not (g_lo >= 0 >= g_hi):
            continue
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if sgn * _horner(dc, np.array([mid]))[0] > 0:
                lo = mid
            else:
                hi = mid
        x_star = 0.5 * (lo + hi)
        val = abs(_horner(c, np.array([x_star]))[0])
        if val > best_val:
            best_val, best_x = float(val), float(x_star)
    return SupNormResult(best_val, best_x, "brute")


def scale_sequence(n: int, f_inverse: Callable[[float], float]) -> ScaleTriple:
    """``s_n = (log log n)**(1/3)``, ``p_n = (log n)**-0.5``, ``b_n = F^-1(p_n)``."""
    if n < 16:
        raise DomainError("scale_sequence needs n >= 16")
    log_n = math.log(n)
    s_n = math.log(log_n) ** (1.0 / 3.0)
    p_n = log_n ** -0.5
    return ScaleTriple(s_n, p_n, float(f_inverse(p_n)))
