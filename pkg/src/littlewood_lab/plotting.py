"""Deterministic SVG figures for every CSV kind."""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib
import numpy as np
from matplotlib.figure import Figure

from .errors import SchemaError
from .manifest import read_csv

_STYLE = {
    "svg.hashsalt": "littlewood-lab",
    "svg.fonttype": "path",
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.2,
}


def _col(rows, name):
    return np.array([r[name] for r in rows], dtype=float)


def _supnorm(ax, rows):
    deg = _col(rows, "degree")
    ax.scatter(deg, _col(rows, "sup_norm") / np.sqrt(deg + 1), s=6)
    ax.set_xlabel("degree n")
    ax.set_ylabel(r"$\|f_n\|_\infty / \sqrt{n+1}$")


def _profile(ax, rows):
    sign = _col(rows, "sign")
    for s, label in ((1, "x > 0"), (-1, "x < 0")):
        m = sign == s
        if m.any():
            ax.plot(_col(rows, "t")[m], _col(rows, "value")[m], label=label)
    ax.set_xscale("symlog", linthresh=1e-2)
    ax.set_xlabel("t")
    ax.set_ylabel("profile")
    ax.legend()


def _gaussian(ax, rows):
    sample = _col(rows, "sample")
    for s in np.unique(sample)[:20]:
        m = sample == s
        ax.plot(_col(rows, "t")[m], _col(rows, "value")[m], lw=0.7)
    ax.set_xlabel("t")
    ax.set_ylabel("path")


def _cutoff(ax, rows):
    x = _col(rows, "x")
    ax.plot(x, _col(rows, "w"), label="w")
    g = _col(rows, "g")
    ax.plot(x, g / g.max(), label="g (scaled)", ls="--")
    ax.set_xlabel("x")
    ax.legend()


def _spectrum(ax, rows):
    lam = _col(rows, "lambda")
    keep = lam > 0
    ax.semilogy(_col(rows, "k")[keep], lam[keep], ".", ms=3)
    ax.set_xlabel("k")
    ax.set_ylabel(r"$\lambda_k$")


def _counting(ax, rows):
    tau = _col(rows, "tau")
    count = _col(rows, "count")
    ok = count >= 0
    x = np.log(1.0 / tau)
    ax.step(x[ok], count[ok], where="post", label=r"$\Lambda(\tau)$")
    pred = _col(rows, "predicted")
    if np.isfinite(pred).any():
        ax.plot(x, pred, ls="--", label="leading term")
    ax.set_xlabel(r"$\log(1/\tau)$")
    ax.set_ylabel("count")
    ax.legend()


def _smallball(ax, rows):
    d = _col(rows, "delta")
    ax.errorbar(d, _col(rows, "log_prob"), yerr=2 * _col(rows, "stderr"), fmt="o", ms=3, label="estimate")
    for key, style in (("log_lower", "v"), ("log_upper", "^")):
        v = _col(rows, key)
        if np.isfinite(v).any():
            ax.plot(d, v, style, ms=4, label=key.replace("log_", ""))
    ax.set_xscale("log")
    ax.set_xlabel(r"$\delta$")
    ax.set_ylabel("log probability")
    ax.legend()


def _finverse(ax, rows):
    d = _col(rows, "delta")
    ax.errorbar(d, _col(rows, "prob"), yerr=2 * _col(rows, "prob_stderr"), fmt="o", ms=3, label="MC")
    ax.plot(d, _col(rows, "fitted_prob"), label="monotone fit")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel(r"$\delta$")
    ax.set_ylabel(r"$F(\delta)$")
    ax.legend()


def _envelope(ax, rows):
    n = _col(rows, "n")
    stat = _col(rows, "running_min_normalized")
    ns = np.unique(n)
    med = np.array([np.median(stat[n == v]) for v in ns])
    ax.plot(ns, med, label="median running min")
    ax.axhline(-(3 * math.pi ** 2 / 4) ** (1 / 3), color="k", ls=":", label="limit constant")
    ax.set_xscale("log", base=2)
    ax.set_xlabel("n")
    ax.set_ylabel(r"$\log(\|f_n\|/\sqrt{n}) / (\log\log n)^{1/3}$")
    ax.legend()


RENDERERS = {
    "supnorm": _supnorm,
    "profile": _profile,
    "gaussian-sample": _gaussian,
    "cutoff": _cutoff,
    "spectrum": _spectrum,
    "counting": _counting,
    "smallball": _smallball,
    "finverse": _finverse,
    "envelope": _envelope,
}


def render(csv_path, svg_path, kind: str | None = None) -> Path:
    """Render ``csv_path`` to ``svg_path``; identical input gives an identical file."""
    found, rows = read_csv(csv_path, kind)
    if found not in RENDERERS:
        raise SchemaError(f"no plot for {found} data")
    svg_path = Path(svg_path)
    with matplotlib.rc_context(_STYLE):
        fig = Figure(figsize=(6.0, 4.0))
        ax = fig.add_subplot()
        RENDERERS[found](ax, rows)
        ax.set_title(found)
        fig.tight_layout()
        fig.savefig(svg_path, format="svg", metadata={"Date": None})
    return svg_path
