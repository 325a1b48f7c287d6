"""CSV output with fixed schemas and the JSON run manifest."""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Mapping

from .errors import EmptyInputError, SchemaError
from .rng import GAUSSIAN_METHOD, SIGN_METHOD

SCHEMA_VERSION = 1

CSV_SCHEMAS: dict[str, tuple[str, ...]] = {
    "supnorm": ("index", "seed", "degree", "sup_norm", "argmax_x", "method"),
    "profile": ("t", "sign", "value"),
    "gaussian-sample": ("sample", "t", "value"),
    "cutoff": ("x", "w", "g"),
    "spectrum": ("k", "lambda"),
    "counting": ("tau", "count", "predicted", "resolved"),
    "smallball": ("quantity", "delta", "log_prob", "stderr", "method", "n_samples", "prob",
                  "prob_stderr", "log_lower", "log_upper"),
    "finverse": ("delta", "prob", "prob_stderr", "log_prob", "stderr", "fitted_prob"),
    "envelope": ("seed", "n", "sup_norm", "ratio_liminf", "ratio_limsup", "normalized_stat",
                 "b_branch", "running_min_liminf", "running_max_limsup", "running_min_normalized"),
}


def code_version() -> str:
    from . import __version__

    return __version__


def _cell(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return repr(value)
    return str(value)


def write_csv(path, kind: str, rows: Iterable[Mapping]) -> Path:
    """Write rows under the fixed column order of ``kind``; floats use repr (round-trip exact)."""
    columns = CSV_SCHEMAS[kind]
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(row.get(c, "")) for c in columns])
    return path


def detect_kind(header: Iterable[str]) -> str:
    header = tuple(header)
    for kind, cols in CSV_SCHEMAS.items():
        if cols == header:
            return kind
    raise SchemaError(f"unrecognised CSV header {','.join(header)}")


def read_csv(path, kind: str | None = None) -> tuple[str, list[dict]]:
    """Return (kind, rows); numbers are parsed back to float where possible."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise EmptyInputError(f"{path} is empty")
        found = detect_kind(header)
        if kind is not None and found != kind:
            raise SchemaError(f"{path} holds {found} data, expected {kind}")
        rows = []
        for rec in reader:
            row = {}
            for c, v in zip(header, rec):
                try:
                    row[c] = float(v)
                except ValueError:
                    row[c] = v
            rows.append(row)
    if not rows:
        raise EmptyInputError(f"{path} has a header but no rows")
    return found, rows


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass
class RunManifest:
    command: str
    config: dict
    root_seed: int
    code_version: str = field(default_factory=code_version)
    gaussian_method: str = GAUSSIAN_METHOD
    sign_method: str = SIGN_METHOD
    output_files: list = field(default_factory=list)
    timestamps: dict = field(default_factory=dict)
    schema_version: int = SCHEMA_VERSION

    def start(self) -> None:
        self.timestamps["started"] = _now()

    def finish(self, outputs: Iterable[Path], base: Path) -> None:
        self.timestamps["finished"] = _now()
        self.output_files = [{"path": str(Path(p).resolve().relative_to(base.resolve())),
                              "sha256": sha256_file(p)} for p in outputs]

    def to_json(self) -> str:
        return json.dumps({
            "schema_version": self.schema_version,
            "command": self.command,
            "config": self.config,
            "root_seed": self.root_seed,
            "code_version": self.code_version,
            "gaussian_method": self.gaussian_method,
            "sign_method": self.sign_method,
            "output_files": self.output_files,
            "timestamps": self.timestamps,
        }, indent=2, sort_keys=True)

    def write(self, path) -> Path:
        path = Path(path)
        path.write_text(self.to_json() + "\n")
        return path

    @classmethod
    def load(cls, path) -> "RunManifest":
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path} is not valid JSON") from exc
        if data.get("schema_version") != SCHEMA_VERSION:
            raise SchemaError(f"unsupported manifest schema {data.get('schema_version')!r}")
        missing = {"command", "config", "root_seed"} - data.keys()
        if missing:
            raise SchemaError(f"manifest lacks {sorted(missing)}")
        return cls(data["command"], data["config"], data["root_seed"],
                   data.get("code_version", ""), data.get("gaussian_method", GAUSSIAN_METHOD),
                   data.get("sign_method", SIGN_METHOD), data.get("output_files", []),
                   data.get("timestamps", {}), data["schema_version"])
