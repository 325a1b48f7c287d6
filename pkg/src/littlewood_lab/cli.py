"""Command-line front end.

Every subcommand writes a CSV to ``--out``, a ``<out>.manifest.json`` next to
it and, with ``--plot``, a ``<out>.svg``.  Exit codes: 0 ok, 2 configuration
error, 3 numerical error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import tempfile
from pathlib import Path
from typing import Callable

import numpy as np

from . import cutoff as cut
from . import envelope as env
from . import smallball as sb
from . import spectral as sp
from .errors import ConfigError, LabError, NumericalError, SchemaError
from .gaussian import FAMILIES, KernelSpec, sample_path_exact, sample_X_circulant, sample_Y_euler
from .littlewood import SignSequence, profile, read_polynomials, sup_norm
from .manifest import RunManifest, sha256_file, write_csv
from .plotting import render
from .rng import SeedSpec

COMMON = {"seed": 0, "threads": 1, "plot": False}

# (flag, type, default, help) per subcommand; argparse defaults are None so that
# config-file values can be told apart from explicit flags.
OPTIONS: dict[str, list[tuple]] = {
    "supnorm": [("degree", int, 32, "polynomial degree"),
                ("count", int, 50, "number of random polynomials"),
                ("input", str, None, "file of sign polynomials, one per line"),
                ("method", str, "grid+refine", "grid+refine or brute")],
    "profile": [("degree", int, 1024, "polynomial degree"),
                ("replica", int, 0, "replica index of the random polynomial"),
                ("input", str, None, "take the first polynomial of this file"),
                ("t_max", float, 50.0, "largest t"),
                ("points", int, 400, "grid points per sign")],
    "gaussian-sample": [("kernel", str, "covY", "covariance family"),
                        ("u", float, None, "sinc bandwidth"),
                        ("a", float, None, "sinc/sech interval length"),
                        ("method", str, "exact", "exact, euler or circulant"),
                        ("t_max", float, 10.0, "grid end"),
                        ("points", int, 200, "grid points"),
                        ("samples", int, 5, "number of paths"),
                        ("steps", int, 4096, "Euler steps")],
    "cutoff": [("kmax", int, 64, "last box index"),
               ("cstart", int, 3, "first box index"),
               ("scale", float, None, "scale c in a_k = c k log^2 k"),
               ("step", float, cut.DEFAULT_STEP, "grid step"),
               ("stride", int, 64, "write every stride-th grid point")],
    "spectrum": [("kernel", str, "T", "T, Ttilde, sech or sinc"),
                 ("a", float, None, "interval length for sech/sinc"),
                 ("u", float, None, "sinc bandwidth"),
                 ("truncation", float, None, "half-line truncation"),
                 ("nodes", int, 400, "quadrature nodes"),
                 ("solver", str, "auto", "auto, cauchy or eigh")],
    "counting": [("kernel", str, "Ttilde", "T, Ttilde, sech or sinc"),
                 ("a", float, None, "interval length for sech/sinc"),
                 ("u", float, None, "sinc bandwidth"),
                 ("truncation", float, None, "half-line truncation"),
                 ("nodes", int, 400, "quadrature nodes"),
                 ("tau_min", float, 1e-12, "smallest threshold"),
                 ("tau_max", float, 1e-2, "largest threshold"),
                 ("points", int, 60, "number of thresholds")],
    "smallball": [("quantity", str, "H", "H, F or G"),
                  ("delta", float, 1e-3, "threshold (level of the quadratic functional for H)"),
                  ("method", str, "tilted", "tilted or direct for H; mc for F and G"),
                  ("samples", int, 100_000, "Monte Carlo samples")],
    "finverse": [("dmin", float, 0.05, "smallest delta"),
                 ("dmax", float, 1.0, "largest delta"),
                 ("points", int, 10, "table points"),
                 ("samples", int, 200_000, "samples per point")],
    "envelope": [("nmax", int, 65536, "largest degree"),
                 ("seeds", int, 100, "number of sign streams"),
                 ("A", float, 4.0, "mesh constant"),
                 ("finverse", str, None, "F-inverse model JSON (built on the fly if absent)"),
                 ("finverse_samples", int, 200_000, "samples per point when building the model")],
}


def _artifact(out: Path, suffix: str) -> Path:
    return out.with_name(out.stem + suffix)


# -- commands ----------------------------------------------------------------
# Each takes the resolved parameter map and the output path, writes the CSV,
# and returns every file it produced.

def cmd_supnorm(p: dict, out: Path) -> list[Path]:
    if p["input"]:
        polys = [(i, "", q) for i, q in enumerate(read_polynomials(p["input"]))]
    else:
        if p["count"] < 1 or p["degree"] < 0:
            raise ConfigError("count must be positive and degree non-negative")
        base = SeedSpec(p["seed"], "supnorm")
        polys = [(i, i, SignSequence.random(base.replica(i), p["degree"])) for i in range(p["count"])]
    rows = []
    for i, s, poly in polys:
        res = sup_norm(poly, p["method"])
        rows.append({"index": i, "seed": s, "degree": poly.degree, "sup_norm": res.value,
                     "argmax_x": res.argmax_x, "method": res.method})
    return [write_csv(out, "supnorm", rows)]


def cmd_profile(p: dict, out: Path) -> list[Path]:
    if p["input"]:
        poly = read_polynomials(p["input"])[0]
    else:
        poly = SignSequence.random(SeedSpec(p["seed"], "supnorm", p["replica"]), p["degree"])
    if p["points"] < 2:
        raise ConfigError("points must be at least 2")
    t = np.concatenate([[0.0], np.geomspace(1e-3, p["t_max"], p["points"] - 1)])
    rows = [{"t": float(tt), "sign": s, "value": float(v)}
            for s in (1, -1) for tt, v in zip(t, profile(poly, t, s))]
    return [write_csv(out, "profile", rows)]


def _kernel(p: dict) -> KernelSpec:
    params = {k: p[k] for k in ("u", "a") if p.get(k) is not None}
    fam = p["kernel"]
    if fam not in FAMILIES:
        raise ConfigError(f"unknown kernel {fam!r}")
    if fam not in ("sinc", "sech"):
        params = {}
    return KernelSpec(fam, params)


def cmd_gaussian(p: dict, out: Path) -> list[Path]:
    seed = SeedSpec(p["seed"], "gaussian-sample")
    n, m = p["samples"], p["points"]
    if n < 1 or m < 2:
        raise ConfigError("need at least one sample and two grid points")
    if p["method"] == "exact":
        t = np.linspace(0.0, p["t_max"], m)
        if p["kernel"] == "covYtilde":
            t = t[1:]
        paths = sample_path_exact(_kernel(p), t, seed, n, threads=p["threads"])
    elif p["method"] == "euler":
        t = np.linspace(0.0, p["t_max"], m)
        paths = sample_Y_euler(t, p["steps"], seed, n)
    elif p["method"] == "circulant":
        step = p["t_max"] / (m - 1)
        t = step * np.arange(m)
        paths = sample_X_circulant(step, m, seed, n)
    else:
        raise ConfigError(f"unknown sampling method {p['method']!r}")
    rows = [{"sample": i, "t": float(tt), "value": float(v)}
            for i in range(paths.shape[0]) for tt, v in zip(t, paths[i])]
    return [write_csv(out, "gaussian-sample", rows)]


def cmd_cutoff(p: dict, out: Path) -> list[Path]:
    w = cut.build_cutoff(p["kmax"], p["step"], p["cstart"], p["scale"])
    idx = np.arange(0, w.grid.size, max(1, p["stride"]))
    rows = [{"x": float(w.grid[i]), "w": float(w.values[i]), "g": float(w.g_values[i])} for i in idx]
    fit = cut.decay_fit(p["kmax"], c_start=p["cstart"], scale=p["scale"])
    cert = {
        "scale": w.scale, "g_radius": w.g_radius, "plateau_radius": w.plateau_radius,
        "support_radius": w.support_radius, "g_mass": w.g_mass(),
        "decay_fit": {"slope": fit.slope, "intercept": fit.intercept, "r_squared": fit.r_squared},
        "coefficient_variance": {str(k): cut.fourier_coeff_variance(k, w) for k in range(4)},
    }
    side = _artifact(out, ".certificate.json")
    side.write_text(json.dumps(cert, indent=2, sort_keys=True) + "\n")
    return [write_csv(out, "cutoff", rows), side]


def _spectrum(p: dict) -> sp.Spectrum:
    disc = sp.discretize(_kernel(p), p["nodes"], p["truncation"])
    return sp.spectrum(disc, p.get("solver", "auto"))


def cmd_spectrum(p: dict, out: Path) -> list[Path]:
    spec = _spectrum(p)
    rows = [{"k": i + 1, "lambda": float(v)} for i, v in enumerate(spec.eigenvalues)]
    return [write_csv(out, "spectrum", rows)]


def cmd_counting(p: dict, out: Path) -> list[Path]:
    if not 0 < p["tau_min"] < p["tau_max"]:
        raise ConfigError("need 0 < tau_min < tau_max")
    spec = _spectrum(p)
    curve = sp.eig_count(spec, np.geomspace(p["tau_min"], p["tau_max"], p["points"]))
    rows = [{"tau": float(t), "count": int(c), "predicted": float(q), "resolved": bool(r)}
            for t, c, q, r in zip(curve.taus, curve.counts, curve.predicted, curve.resolved)]
    return [write_csv(out, "counting", rows)]


def cmd_smallball(p: dict, out: Path) -> list[Path]:
    q, delta, n = p["quantity"], p["delta"], p["samples"]
    seed = SeedSpec(p["seed"], "smallball")
    lower = upper = math.nan
    if q == "H":
        spec = sb.t_spectrum()
        if p["method"] == "tilted":
            est = sb.tilted_mc_H(spec, delta, seed, n, threads=p["threads"])
        elif p["method"] == "direct":
            est = sb.direct_mc_H(spec, delta, seed, n, threads=p["threads"])
        else:
            raise ConfigError(f"unknown method {p['method']!r} for H")
        upper = sb.chernoff_log_upper(spec, delta).log_bound
        try:
            lower = sb.laplace_log_lower(spec, delta).log_bound
        except LabError:
            lower = math.nan
    elif q in ("F", "G"):
        est = sb.mc_sup_smallball(q, delta, seed, n, threads=p["threads"])
    else:
        raise ConfigError(f"unknown quantity {q!r}")
    row = {"quantity": q, "delta": est.delta, "log_prob": est.log_prob, "stderr": est.stderr,
           "method": est.method, "n_samples": est.n_samples, "prob": est.prob,
           "prob_stderr": est.prob_stderr, "log_lower": lower, "log_upper": upper}
    return [write_csv(out, "smallball", [row])]


def build_f_table(seed: int, dmin: float, dmax: float, points: int, samples: int,
                  threads: int = 1) -> list[sb.SmallBallEstimate]:
    if points < 3 or not 0 < dmin < dmax:
        raise ConfigError("need at least three points and 0 < dmin < dmax")
    deltas = np.geomspace(dmin, dmax, points)
    return sb.mc_sup_table("F", deltas, SeedSpec(seed, "finverse"), samples, threads=threads)


def cmd_finverse(p: dict, out: Path) -> list[Path]:
    table = build_f_table(p["seed"], p["dmin"], p["dmax"], p["points"], p["samples"], p["threads"])
    model = sb.f_inverse_model(table)
    conc = sb.psi_concavity_check(table)
    rows = [{"delta": e.delta, "prob": e.prob, "prob_stderr": e.prob_stderr, "log_prob": e.log_prob,
             "stderr": e.stderr, "fitted_prob": model.F(e.delta)} for e in table]
    side = _artifact(out, ".model.json")
    side.write_text(model.to_json() + "\n")
    report = _artifact(out, ".concavity.json")
    report.write_text(json.dumps({
        "x": conc.x.tolist(), "second_differences": conc.second_differences.tolist(),
        "sigma": conc.sigma.tolist(), "flags": conc.flags.tolist(), "threshold": conc.threshold,
    }, indent=2) + "\n")
    return [write_csv(out, "finverse", rows), side, report]


def cmd_envelope(p: dict, out: Path) -> list[Path]:
    if p["finverse"]:
        model = sb.FInverseModel.from_json(Path(p["finverse"]).read_text())
    else:
        model = sb.f_inverse_model(build_f_table(p["seed"], 0.05, 1.0, 10, p["finverse_samples"],
                                                 p["threads"]))
    trace = env.run_envelope(p["nmax"], p["seeds"], p["seed"], model, p["A"], threads=p["threads"])
    summary = _artifact(out, ".summary.json")
    summary.write_text(json.dumps(trace.summary(), indent=2, sort_keys=True) + "\n")
    return [write_csv(out, "envelope", trace.rows()), summary]


COMMANDS: dict[str, Callable[[dict, Path], list[Path]]] = {
    "supnorm": cmd_supnorm,
    "profile": cmd_profile,
    "gaussian-sample": cmd_gaussian,
    "cutoff": cmd_cutoff,
    "spectrum": cmd_spectrum,
    "counting": cmd_counting,
    "smallball": cmd_smallball,
    "finverse": cmd_finverse,
    "envelope": cmd_envelope,
}


# -- parsing and orchestration -------------------------------------------------

def _flag(name: str) -> str:
    return "--" + name.replace("_", "-")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="littlewood-lab", description=__doc__.split("\n")[0])
    subs = parser.add_subparsers(dest="command", required=True)
    for name, opts in OPTIONS.items():
        sub = subs.add_parser(name)
        sub.add_argument("--seed", type=int, default=None, help="root seed (default 0)")
        sub.add_argument("--out", type=Path, default=None, help=f"output CSV (default {name}.csv)")
        sub.add_argument("--threads", type=int, default=None, help="worker threads (output is unaffected)")
        sub.add_argument("--config", type=Path, default=None, help="key=value file; flags take precedence")
        sub.add_argument("--plot", action="store_true", default=None, help="also render an SVG next to the CSV")
        for key, typ, _default, text in opts:
            sub.add_argument(_flag(key), dest=key, type=typ, default=None, help=text)
    plot = subs.add_parser("plot")
    plot.add_argument("csv", type=Path)
    plot.add_argument("--kind", default=None)
    plot.add_argument("--out", type=Path, default=None)
    replay = subs.add_parser("replay")
    replay.add_argument("manifest", type=Path)
    replay.add_argument("--out", type=Path, default=None, help="directory for the re-run outputs")
    replay.add_argument("--threads", type=int, default=None)
    return parser


def read_config(path: Path) -> dict[str, str]:
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _convert(typ, raw: str):
    if typ is bool:
        return raw.lower() in ("1", "true", "yes", "on")
    if raw.lower() in ("none", ""):
        return None
    try:
        return typ(raw)
    except ValueError as exc:
        raise ConfigError(f"cannot read {raw!r} as {typ.__name__}") from exc


def resolve(command: str, args: argparse.Namespace) -> dict:
    """defaults < config file < explicit flags."""
    types = {k: t for k, t, _, _ in OPTIONS[command]}
    types.update({"seed": int, "threads": int, "plot": bool})
    params = dict(COMMON)
    params.update({k: d for k, _, d, _ in OPTIONS[command]})
    if args.config is not None:
        for key, raw in read_config(args.config).items():
            if key not in types:
                raise ConfigError(f"unknown config key {key!r} for {command}")
            params[key] = _convert(types[key], raw)
    for key in params:
        value = getattr(args, key, None)
        if value is not None:
            params[key] = value
    if params["threads"] < 1:
        raise ConfigError("threads must be at least 1")
    return params


def execute(command: str, params: dict, out: Path) -> list[Path]:
    """Run one command and write its manifest; returns every file written."""
    manifest = RunManifest(command, {k: v for k, v in params.items() if k not in ("threads", "plot")},
                           params["seed"])
    manifest.start()
    out.parent.mkdir(parents=True, exist_ok=True)
    files = COMMANDS[command](params, out)
    if params.get("plot"):
        files.append(render(out, _artifact(out, ".svg")))
    manifest.config["out"] = out.name
    manifest.finish(files, out.parent)
    files.append(manifest.write(_artifact(out, ".manifest.json")))
    return files


def replay(manifest_path: Path, out_dir: Path | None, threads: int | None) -> tuple[bool, list[str]]:
    """Re-run a manifest and compare every recorded output hash."""
    man = RunManifest.load(manifest_path)
    if man.command not in COMMANDS:
        raise SchemaError(f"manifest command {man.command!r} is not replayable")
    params = dict(COMMON)
    params.update({k: d for k, _, d, _ in OPTIONS[man.command]})
    params.update({k: v for k, v in man.config.items() if k != "out"})
    params["threads"] = threads or 1
    params["plot"] = any(f["path"].endswith(".svg") for f in man.output_files)
    tmp = None
    if out_dir is None:
        tmp = tempfile.TemporaryDirectory()
        out_dir = Path(tmp.name)
    out = Path(out_dir) / man.config.get("out", f"{man.command}.csv")
    execute(man.command, params, out)
    report, ok = [], True
    for rec in man.output_files:
        path = out.parent / rec["path"]
        same = path.exists() and sha256_file(path) == rec["sha256"]
        ok &= same
        report.append(f"{'match' if same else 'DIFFER'} {rec['path']}")
    if tmp is not None:
        tmp.cleanup()
    return ok, report


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "plot":
            svg = args.out or args.csv.with_suffix(".svg")
            render(args.csv, svg, args.kind)
            print(svg)
            return 0
        if args.command == "replay":
            ok, report = replay(args.manifest, args.out, args.threads)
            print("\n".join(report))
            return 0 if ok else 3
        params = resolve(args.command, args)
        out = args.out or Path(f"{args.command}.csv")
        for path in execute(args.command, params, out):
            print(path)
        return 0
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3
    except (FileNotFoundError, IsADirectoryError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
