"""
Dataset ingestion from per-platform CSV files and report persistence.

Manifest (JSON)::

    {
      "response":  {"path": "resp.csv", "id_col": "sample", "columns": ["g1", "g2"]},
      "platforms": [{"path": "expr.csv", "id_col": "sample"},
                    {"path": "meth.csv", "id_col": "sample"}],
      "missing": "drop-sample"
    }

Relative paths resolve against the manifest's directory. Every platform
file has one row per sample and one column per feature; the predictor
tensor keeps the samples present in every file and the features present in
every platform, both in lexicographic order.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError, IngestionError, ParseError, ReportWriteError

MISSING_TOKENS = {"", "na", "nan", "n/a", "null", "none"}
MISSING_POLICIES = ("drop-sample", "drop-feature")


@dataclass(frozen=True)
class FileSpec:
    path: Path
    id_col: str
    columns: tuple = ()


@dataclass(frozen=True)
class DatasetManifest:
    response: FileSpec
    platforms: tuple
    missing: str = "drop-sample"
    source: dict = field(default_factory=dict, compare=False)

    @property
    def d(self) -> int:
        return len(self.platforms)

    @classmethod
    def from_dict(cls, cfg: dict, base_dir=".") -> "DatasetManifest":
        base = Path(base_dir)
        try:
            resp = cfg["response"]
            response = FileSpec(base / resp["path"], resp["id_col"], tuple(resp.get("columns", ())))
            platforms = tuple(FileSpec(base / pl["path"], pl["id_col"]) for pl in cfg["platforms"])
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"malformed manifest: missing {exc}") from exc
        if not platforms:
            raise ConfigError("manifest lists no predictor platforms")
        missing = cfg.get("missing", "drop-sample")
        if missing not in MISSING_POLICIES:
            raise ConfigError(f"missing policy must be one of {MISSING_POLICIES}, got {missing!r}")
        return cls(response, platforms, missing, source=cfg)

    @classmethod
    def from_json(cls, path) -> "DatasetManifest":
        path = Path(path)
        try:
            with open(path, encoding="utf-8") as fh:
                cfg = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read manifest {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"manifest {path} is not valid JSON: {exc}") from exc
        return cls.from_dict(cfg, base_dir=path.parent)


def _read_table(spec: FileSpec, columns=None):
    """Return ``(ids, column_names, values)`` with NaN for missing cells."""
    try:
        fh = open(spec.path, newline="", encoding="utf-8")
    except OSError as exc:
        raise IngestionError(f"cannot open {spec.path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{spec.path}: file is empty") from None
        header = [h.strip() for h in header]
        if spec.id_col not in header:
            raise IngestionError(f"{spec.path}: sample-ID column {spec.id_col!r} not found")
        id_pos = header.index(spec.id_col)
        if columns:
            absent = [c for c in columns if c not in header]
            if absent:
                raise IngestionError(f"{spec.path}: columns not found: {absent}")
            names = list(columns)
        else:
            names = [h for k, h in enumerate(header) if k != id_pos]
        if len(set(names)) != len(names):
            raise IngestionError(f"{spec.path}: duplicate column names")
        col_pos = [header.index(c) for c in names]

        ids, rows = [], []
        seen = set()
        for lineno, rec in enumerate(reader, start=2):
            if not rec or all(not c.strip() for c in rec):
                continue
            if len(rec) != len(header):
                raise ParseError(
                    f"{spec.path}: row {lineno} has {len(rec)} fields, expected {len(header)}"
                )
            sid = rec[id_pos].strip()
            if sid in seen:
                raise IngestionError(f"{spec.path}: duplicate sample ID {sid!r} (row {lineno})")
            seen.add(sid)
            vals = []
            for name, k in zip(names, col_pos):
                cell = rec[k].strip()
                if cell.lower() in MISSING_TOKENS:
                    vals.append(np.nan)
                    continue
                try:
                    vals.append(float(cell))
                except ValueError:
                    raise ParseError(
                        f"{spec.path}: row {lineno}, column {name!r}: non-numeric value {cell!r}"
                    ) from None
            ids.append(sid)
            rows.append(vals)
    values = np.array(rows, dtype=np.float64).reshape(len(rows), len(names))
    return ids, names, values


def load_dataset(manifest: DatasetManifest):
    """Align the manifest's files into ``(X, Y, feature_names)``.

    ``X`` is ``n x p x d`` (d = number of platforms), ``Y`` is ``n x q``.
    """
    r_ids, r_cols, r_vals = _read_table(manifest.response, manifest.response.columns)
    tables = [_read_table(pl) for pl in manifest.platforms]

    samples = set(r_ids)
    for ids, _, _ in tables:
        samples &= set(ids)
    features = set(tables[0][1])
    for _, names, _ in tables[1:]:
        features &= set(names)
    if not samples:
        raise IngestionError("no sample IDs are shared by all files")
    if not features:
        raise IngestionError("no feature names are shared by all platforms")
    samples = sorted(samples)
    features = sorted(features)

    def take(ids, names, vals, cols):
        row_of = {s: k for k, s in enumerate(ids)}
        col_of = {c: k for k, c in enumerate(names)}
        return vals[np.ix_([row_of[s] for s in samples], [col_of[c] for c in cols])]

    y = take(r_ids, r_cols, r_vals, r_cols)
    x = np.stack([take(ids, names, vals, features) for ids, names, vals in tables], axis=2)

    if manifest.missing == "drop-feature":
        keep_f = ~np.isnan(x).any(axis=(0, 2))
        x = x[:, keep_f, :]
        features = [f for f, k in zip(features, keep_f) if k]
        keep_s = ~np.isnan(y).any(axis=1)
    else:
        keep_s = ~(np.isnan(y).any(axis=1) | np.isnan(x).any(axis=(1, 2)))
    x, y = x[keep_s], y[keep_s]
    if x.shape[0] == 0:
        raise IngestionError("no complete samples remain after applying the missing-value policy")
    if x.shape[1] == 0:
        raise IngestionError("no complete features remain after applying the missing-value policy")
    return np.ascontiguousarray(x), np.ascontiguousarray(y), features


# -- reports --------------------------------------------------------------------


def config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def atomic_write_text(path, text: str) -> None:
    """Write ``text`` to a sibling temp file, then rename over ``path``."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    except OSError as exc:
        raise ReportWriteError(f"cannot write {path}: {exc}") from exc


def report_paths(path) -> tuple[Path, Path]:
    path = Path(path)
    base = path.with_suffix("") if path.suffix.lower() in (".json", ".csv") else path
    return base.with_name(base.name + ".json"), base.with_name(base.name + ".csv")


def ranking_csv(report) -> str:
    lines = ["rank,index,feature,score"]
    names = report.feature_names
    for pos, j in enumerate(report.ranking, start=1):
        j = int(j)
        name = names[j] if names is not None else f"X{j + 1}"
        lines.append(f"{pos},{j},{name},{float(report.scores[j])!r}")
    return "\n".join(lines) + "\n"


def write_report(report, path, config: dict | None = None) -> tuple[Path, Path]:
    """Write ``<base>.json`` and ``<base>.csv`` (ranking) atomically.

    The JSON carries the package version and a SHA-256 over ``config`` (or
    over the report's method/rule/shape when no config is given).
    """
    json_path, csv_path = report_paths(path)
    if config is None:
        config = {"method": report.method, "rule": report.rule.describe(),
                  "n": report.n, "p": report.p, "d": report.d, "q": report.q}
    payload = report.to_dict()
    payload["version"] = __version__
    payload["config"] = config
    payload["config_hash"] = config_hash(config)
    atomic_write_text(json_path, json.dumps(payload, indent=2, sort_keys=True) + "\n")
    atomic_write_text(csv_path, ranking_csv(report))
    return json_path, csv_path


def read_report(path) -> dict:
    json_path, _ = report_paths(path)
    with open(json_path, encoding="utf-8") as fh:
        return json.load(fh)
