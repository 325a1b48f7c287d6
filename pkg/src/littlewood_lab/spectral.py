"""Nystrom discretization, spectra and eigenvalue counting for the integral operators.

Families (all kernels live in :mod:`littlewood_lab.gaussian`):

* ``T``      on (0, S):  e^{-(s+t)/2} K(s-t) = 1 / (e^s + e^t)
* ``Ttilde`` on (0, S):  2 / (e^{2s} + e^{2t})
* ``sinc``   on (0, a):  sin(u(x-y)) / (pi (x-y))
* ``sech``   on (0, a):  sech((x-y)/2) / 2 = e^{(x+y)/2} / (e^x + e^y)

Three of the four are symmetric Cauchy matrices d_i d_j / (x_i + x_j) after
quadrature, which admit eigenvalues to high *relative* accuracy: a pivoted
LDL^T computed from the generators (no subtractive cancellation) followed by a
one-sided Jacobi SVD of L D^{1/2}.  Plain ``eigh`` only gets eigenvalues to
~1e-16 * lambda_1 absolute, which is not enough for the small ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import integrate
from scipy.linalg import lapack

from .errors import (ConfigError, DomainError, NumericalError, QuadratureError,
                     ResolutionError)
from .gaussian import KernelSpec, kernel_matrix, sech_kernel

RESOLUTION_FLOOR = 1e-13
DEFAULT_TRUNCATION = 20.0
PANEL_NODES = 20
HALF_LINE = ("T", "Ttilde")


def gauss_legendre_panels(lo: float, hi: float, panels: int, q: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = leggauss(q)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def graded_panels(breaks, q: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = leggauss(q)
    breaks = np.asarray(breaks, dtype=float)
    half = 0.5 * np.diff(breaks)
    mid = 0.5 * (breaks[:-1] + breaks[1:])
    return (mid[:, None] + half[:, None] * x[None, :]).ravel(), (half[:, None] * w[None, :]).ravel()


@dataclass(frozen=True, eq=False)
class Discretization:
    kernel: KernelSpec
    nodes: np.ndarray
    weights: np.ndarray
    matrix: np.ndarray
    domain: tuple[float, float]
    trace_remainder: float = 0.0
    cauchy: tuple[np.ndarray, np.ndarray] | None = None

    @property
    def size(self) -> int:
        return self.nodes.size

    @property
    def quadrature_trace(self) -> float:
        return float(np.trace(self.matrix))

    def metadata(self) -> dict:
        return {"kernel": self.kernel.to_dict(), "n_nodes": self.size,
                "domain": list(self.domain), "trace_remainder": self.trace_remainder}


def _domain(kernel: KernelSpec, truncation: float | None, start: float) -> tuple[float, float]:
    fam = kernel.family
    if fam in HALF_LINE:
        s = DEFAULT_TRUNCATION if truncation is None else float(truncation)
        if s <= 0:
            raise DomainError("half-line kernels need a positive truncation")
        return start, start + s
    if fam in ("sinc", "sech"):
        return start, start + kernel.params["a"]
    raise ConfigError(f"kernel family {fam} has no integral operator here")


def _tail_trace(kernel: KernelSpec, hi: float) -> float:
    """Exact integral of the diagonal beyond the truncation point."""
    if kernel.family == "T":
        return 0.5 * math.exp(-hi)
    if kernel.family == "Ttilde":
        return 0.5 * math.exp(-2.0 * hi)
    return 0.0


def discretize(kernel: KernelSpec, n_nodes: int, truncation: float | None = None,
               panel_nodes: int = PANEL_NODES, start: float = 0.0) -> Discretization:
    """Composite Gauss-Legendre Nystrom matrix W^{1/2} K W^{1/2}.

    ``n_nodes`` is rounded up to a whole number of ``panel_nodes``-point panels.
    ``start`` translates the domain (used for tail-block checks).
    """
    if n_nodes < 16:
        raise ConfigError("discretize needs n_nodes >= 16")
    lo, hi = _domain(kernel, truncation, start)
    q = min(panel_nodes, n_nodes)
    panels = -(-n_nodes // q)
    if kernel.family == "sinc":
        per_osc = q / (kernel.params["u"] * (hi - lo) / panels / math.pi)
        if per_osc < 8:
            raise ResolutionError(f"sinc kernel under-resolved: {per_osc:.1f} nodes per oscillation (< 8)")
    nodes, weights = gauss_legendre_panels(lo, hi, panels, q)
    if np.any(weights <= 0):
        raise QuadratureError("non-positive quadrature weight")
    root = np.sqrt(weights)
    mat = root[:, None] * kernel_matrix(kernel, nodes[:, None], nodes[None, :]) * root[None, :]
    mat = 0.5 * (mat + mat.T)
    cauchy = None
    fam = kernel.family
    if fam == "T":
        cauchy = (np.exp(nodes - lo), root * math.exp(-0.5 * lo))
    elif fam == "Ttilde":
        cauchy = (np.exp(2.0 * (nodes - lo)), root * math.sqrt(2.0) * math.exp(-lo))
    elif fam == "sech":
        shifted = nodes - 0.5 * (lo + hi)
        cauchy = (np.exp(shifted), root * np.exp(0.5 * shifted))
    return Discretization(kernel, nodes, weights, mat, (lo, hi), _tail_trace(kernel, hi), cauchy)


# -- eigen-solvers -----------------------------------------------------------

def cauchy_ldl(x: np.ndarray, d: np.ndarray, drop: float = 1e-34) -> np.ndarray:
    """Factor C_ij = d_i d_j / (x_i + x_j) as G G^T, G = P L D^{1/2}.

    Complete pivoting on the diagonal; every Schur complement is again Cauchy
    with generators d_i <- d_i (x_i - x_k)/(x_i + x_k).  Columns whose pivot is
    below ``drop`` times the first pivot are omitted.
    """
    x = np.array(x, dtype=float)
    d = np.array(d, dtype=float)
    n = x.size
    alive = np.arange(n)
    g = np.zeros((n, n))
    first = None
    rank = 0
    while alive.size:
        diag = d * d / (2.0 * x)
        p = int(np.argmax(diag))
        pivot = diag[p]
        first = pivot if first is None else first
        if not pivot > drop * first:
            break
        dk, xk = d[p], x[p]
        g[alive, rank] = 2.0 * xk * d / (dk * (x + xk)) * math.sqrt(pivot)
        rank += 1
        keep = np.arange(alive.size) != p
        d = d[keep] * (x[keep] - xk) / (x[keep] + xk)
        x = x[keep]
        alive = alive[keep]
    return g[:, :rank]


def _jacobi_singular_values(g: np.ndarray) -> np.ndarray:
    if g.shape[1] == 0:
        return np.zeros(0)
    sva, _, _, work, _, info = lapack.dgejsv(g, joba=0, jobu=3, jobv=3)
    if info != 0:
        raise NumericalError(f"one-sided Jacobi SVD failed (info={info})")
    return sva * (work[0] / work[1])


def cauchy_eigenvalues(x: np.ndarray, d: np.ndarray) -> np.ndarray:
    sv = _jacobi_singular_values(cauchy_ldl(x, d))
    out = np.zeros(x.size)
    vals = np.sort(sv * sv)[::-1]
    out[: vals.size] = vals
    return out


@dataclass(frozen=True, eq=False)
class Spectrum:
    eigenvalues: np.ndarray
    trace: float
    floor: float
    solver: str
    meta: dict = field(default_factory=dict)

    @property
    def family(self) -> str:
        return self.meta.get("kernel", {}).get("family", "")

    @property
    def params(self) -> dict:
        return self.meta.get("kernel", {}).get("params", {})

    @property
    def resolved(self) -> np.ndarray:
        return self.eigenvalues[self.eigenvalues >= self.floor]


def spectrum(disc: Discretization, solver: str = "auto") -> Spectrum:
    """Descending eigenvalues of the Nystrom matrix.

    ``auto`` uses the Cauchy solver whenever the family has Cauchy structure.
    The resolution floor is 1e-13 * lambda_1.
    """
    if solver == "auto":
        solver = "cauchy" if disc.cauchy is not None else "eigh"
    if solver == "cauchy":
        if disc.cauchy is None:
            raise ConfigError(f"{disc.kernel.family} kernel has no Cauchy structure")
        vals = cauchy_eigenvalues(*disc.cauchy)
    elif solver == "eigh":
        try:
            vals = np.linalg.eigvalsh(disc.matrix)[::-1]
        except np.linalg.LinAlgError as exc:
            raise NumericalError("symmetric eigensolver did not converge") from exc
    else:
        raise ConfigError(f"unknown solver {solver!r}")
    meta = disc.metadata()
    return Spectrum(np.asarray(vals, dtype=float), disc.quadrature_trace,
                    RESOLUTION_FLOOR * float(vals[0]), solver, meta)


# -- counting ---------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CountingCurve:
    taus: np.ndarray
    counts: np.ndarray
    predicted: np.ndarray
    resolved: np.ndarray


def predicted_count(family: str, params: dict, taus) -> np.ndarray:
    taus = np.asarray(taus, dtype=float)
    log_inv = np.log(1.0 / taus)
    if family == "sinc":
        return np.full_like(taus, params["a"] * params["u"] / math.pi)
    if family == "sech":
        return params["a"] / math.pi ** 2 * log_inv
    if family in HALF_LINE:
        return log_inv ** 2 / (2.0 * math.pi ** 2)
    return np.full_like(taus, np.nan)


def eig_count(spec: Spectrum, taus) -> CountingCurve:
    """Lambda(tau) = #{k : lambda_k >= tau}; thresholds below the floor are flagged (count -1)."""
    taus = np.sort(np.asarray(taus, dtype=float))[::-1]
    if taus.size == 0:
        raise ConfigError("no thresholds given")
    asc = np.sort(spec.eigenvalues)
    counts = asc.size - np.searchsorted(asc, taus, side="left")
    resolved = taus >= spec.floor
    counts = np.where(resolved, counts, -1).astype(np.int64)
    return CountingCurve(taus, counts, predicted_count(spec.family, spec.params, taus), resolved)


@dataclass(frozen=True)
class CountingFit:
    coefficients: tuple[float, ...]
    terms: tuple[str, ...]
    rms_residual: float
    n_points: int

    @property
    def leading(self) -> float:
        return self.coefficients[0]


_TERMS = {
    "log": lambda L: L,
    "log2": lambda L: L ** 2,
    "one": lambda L: np.ones_like(L),
}


def fit_counting(curve: CountingCurve, terms=("log2", "log", "one"),
                 tau_range: tuple[float, float] | None = None) -> CountingFit:
    """Least-squares fit of Lambda(tau) on functions of L = log(1/tau).

    The first term is the main term; the rest absorb lower-order corrections.
    """
    mask = curve.resolved.copy()
    if tau_range is not None:
        lo, hi = tau_range
        mask &= (curve.taus >= lo) & (curve.taus <= hi)
    if mask.sum() < len(terms) + 2:
        raise ConfigError("too few resolved thresholds for the requested fit")
    L = np.log(1.0 / curve.taus[mask])
    design = np.column_stack([_TERMS[t](L) for t in terms])
    y = curve.counts[mask].astype(float)
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ coef
    return CountingFit(tuple(float(c) for c in coef), tuple(terms),
                       float(np.sqrt(np.mean(resid ** 2))), int(mask.sum()))


# -- certificates -------------------------------------------------------------

@dataclass(frozen=True)
class SandwichReport:
    u: float
    a: float
    lower_min_eig: float
    upper_min_eig: float
    weyl_upper_violation: float
    weyl_lower_violation: float
    tolerance: float

    @property
    def ok(self) -> bool:
        return (self.lower_min_eig >= -self.tolerance and self.upper_min_eig >= -self.tolerance
                and self.weyl_upper_violation <= self.tolerance
                and self.weyl_lower_violation <= self.tolerance)


def sandwich_check(u: float, a: float, n_nodes: int, tolerance: float = 1e-10) -> SandwichReport:
    """pi sech(pi u) G_{u,a} <= K_a <= pi G_{u,a} + pi sech(pi u) Id on a shared quadrature."""
    sinc = discretize(KernelSpec("sinc", {"u": u, "a": a}), n_nodes)
    sech = discretize(KernelSpec("sech", {"a": a}), n_nodes)
    if not np.array_equal(sinc.nodes, sech.nodes):
        raise QuadratureError("sandwich check needs a shared quadrature")
    c = math.pi / math.cosh(math.pi * u)
    g, k = sinc.matrix, sech.matrix
    lower = np.linalg.eigvalsh(k - c * g)[0]
    upper = np.linalg.eigvalsh(math.pi * g + c * np.eye(len(g)) - k)[0]
    lam_g = np.linalg.eigvalsh(g)[::-1]
    lam_k = np.linalg.eigvalsh(k)[::-1]
    weyl_up = float(np.max(lam_k - (math.pi * lam_g + c)))
    weyl_lo = float(np.max(c * lam_g - lam_k))
    return SandwichReport(u, a, float(lower), float(upper), weyl_up, weyl_lo, tolerance)


@dataclass(frozen=True, eq=False)
class OffDiagonalReport:
    j: int
    a: float
    singular_values: np.ndarray
    ratios: np.ndarray
    hs_norm: float
    frobenius: float


def offdiag_singular_values(j: int, a: float, n_nodes: int = 160, k_rank: int = 12,
                            v_levels: int = 48, q: int = 16) -> OffDiagonalReport:
    """Singular values of e^{-2ja} sqrt(2v) / (1 + e^{-2r} v) on (0,a) x (0,1).

    The v-quadrature uses dyadic panels graded toward the sqrt singularity at 0.
    ``ratios[k-1] = s_{k+2} / (sqrt(a) e^{-2ja} 3^{-k})`` for k = 1..k_rank.
    """
    if j < 1 or a <= 0:
        raise DomainError("need j >= 1 and a > 0")
    scale = math.exp(-2.0 * j * a)
    r, wr = gauss_legendre_panels(0.0, a, max(1, -(-n_nodes // q)), q)
    breaks = np.r_[0.0, 2.0 ** -np.arange(v_levels, -1, -1, dtype=float)]
    v, wv = graded_panels(breaks, q)
    kern = scale * np.sqrt(2.0 * v)[None, :] / (1.0 + np.exp(-2.0 * r)[:, None] * v[None, :])
    mat = np.sqrt(wr)[:, None] * kern * np.sqrt(wv)[None, :]
    sv = np.linalg.svd(mat, compute_uv=False)
    k = np.arange(1, k_rank + 1)
    ratios = sv[k + 1] / (math.sqrt(a) * scale * 3.0 ** (-k))

    def inner(vv, rr):
        return scale ** 2 * 2.0 * vv / (1.0 + math.exp(-2.0 * rr) * vv) ** 2

    hs_sq, _ = integrate.dblquad(inner, 0.0, a, 0.0, 1.0, epsabs=0.0, epsrel=1e-12)
    return OffDiagonalReport(j, a, sv, ratios, math.sqrt(hs_sq), float(np.linalg.norm(mat)))


def tail_block_ratio(m: int, a: float, truncation: float = DEFAULT_TRUNCATION,
                     n_nodes: int = 400) -> float:
    """||Q_m T~ Q_m|| / (e^{-2ma} ||T~||) from eigensolves of the translated block."""
    base = discretize(KernelSpec("Ttilde"), n_nodes, truncation)
    moved = discretize(KernelSpec("Ttilde"), n_nodes, truncation, start=m * a)
    top = spectrum(base).eigenvalues[0]
    top_moved = spectrum(moved).eigenvalues[0]
    return float(top_moved / (math.exp(-2.0 * m * a) * top))


def truncation_robustness(taus, s_small: float = 20.0, s_large: float = 30.0,
                          nodes_per_unit: int = 20) -> np.ndarray:
    """Count differences Lambda_{S_large} - Lambda_{S_small} for T~ (T on twice the length)."""
    curves = []
    for s in (s_small, s_large):
        disc = discretize(KernelSpec("Ttilde"), int(round(nodes_per_unit * s)), s)
        curves.append(eig_count(spectrum(disc), taus))
    if not (curves[0].resolved.all() and curves[1].resolved.all()):
        raise ConfigError("thresholds below the resolution floor")
    return curves[1].counts - curves[0].counts


def sech_fourier_transform(xi: float) -> float:
    """int K(t) e^{-i xi t} dt by adaptive quadrature (to compare with pi sech(pi xi))."""
    val, _ = integrate.quad(lambda t: 2.0 * sech_kernel(t) * math.cos(xi * t), 0.0, 80.0,
                            epsabs=1e-13, epsrel=1e-12, limit=400)
    return val
