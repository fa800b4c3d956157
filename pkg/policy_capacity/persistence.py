"""
On-disk formats

Return matrices are long-format CSV (`particle,episode,return`) next to a
JSON sidecar holding env spec, policy specs, plan and extrema. Floats are
written with repr() so a reload is bit-exact.
"""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path
from typing import Any

import numpy as np
from loguru import logger

from policy_capacity.envs import EnvSpec
from policy_capacity.errors import ConfigError
from policy_capacity.evolution import TRACE_COLUMNS, EsTrace
from policy_capacity.policies import PolicySpec
from policy_capacity.rollout import ReturnMatrix, SamplingPlan

MATRIX_COLUMNS = ("particle", "episode", "return")


def _stem(path: str | Path) -> Path:
    path = Path(path)
    return path.with_suffix("") if path.suffix == ".csv" else path


def json_digest(data: Any) -> str:
    """SHA-256 of canonical JSON (sorted keys, no whitespace)"""
    canonical = json.dumps(data, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canonical.encode()).hexdigest()


def write_json(path: str | Path, data: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2, sort_keys=True, default=str) + "\n")
    return path


def read_json(path: str | Path) -> Any:
    return json.loads(Path(path).read_text())


def write_rows_csv(
    path: str | Path, columns: tuple[str, ...] | list[str], rows: list[dict[str, Any]]
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in (row[c] for c in columns)])
    return path


def save_return_matrix(m: ReturnMatrix, path: str | Path, save_params: bool = False) -> Path:
    """Write <stem>.csv, <stem>.json and optionally <stem>.params.csv; returns the CSV path"""
    stem = _stem(path)
    stem.parent.mkdir(parents=True, exist_ok=True)
    csv_path = stem.with_name(f"{stem.name}.csv")
    with csv_path.open("w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(MATRIX_COLUMNS)
        for i, row in enumerate(m.returns.tolist()):
            for j, value in enumerate(row):
                writer.writerow((i, j, repr(value)))
    write_json(stem.with_name(f"{stem.name}.json"), m.provenance())

    if save_params:
        if m.params is None:
            logger.warning("No parameters attached to {}; skipping params CSV", csv_path.name)
        else:
            params_path = stem.parent / f"{stem.name}.params.csv"
            with params_path.open("w", newline="") as f:
                writer = csv.writer(f)
                writer.writerow(["particle", *(f"theta_{k}" for k in range(m.params.shape[1]))])
                for i, theta in enumerate(m.params.tolist()):
                    writer.writerow([i, *(repr(v) for v in theta)])
    logger.debug("Saved return matrix to {}", csv_path)
    return csv_path


def load_return_matrix(path: str | Path) -> ReturnMatrix:
    """Reload a matrix and its sidecar (and params CSV when present)"""
    stem = _stem(path)
    csv_path = stem.with_name(f"{stem.name}.csv")
    sidecar = stem.with_name(f"{stem.name}.json")
    if not csv_path.exists():
        raise FileNotFoundError(f"return matrix not found: {csv_path}")
    if not sidecar.exists():
        raise ConfigError(f"missing sidecar {sidecar}; cannot restore provenance")
    meta = read_json(sidecar)
    n, m = meta["shape"]

    returns = np.empty((n, m))
    seen = 0
    with csv_path.open(newline="") as f:
        reader = csv.reader(f)
        if tuple(next(reader)) != MATRIX_COLUMNS:
            raise ConfigError(f"{csv_path}: header must be {','.join(MATRIX_COLUMNS)}")
        for particle, episode, value in reader:
            returns[int(particle), int(episode)] = float(value)
            seen += 1
    if seen != n * m:
        raise ConfigError(f"{csv_path}: expected {n * m} entries, found {seen}")

    params = None
    params_path = stem.parent / f"{stem.name}.params.csv"
    if params_path.exists():
        with params_path.open(newline="") as f:
            reader = csv.reader(f)
            next(reader)
            params = np.asarray([[float(v) for v in row[1:]] for row in reader])

    plan = SamplingPlan.from_dict(meta["plan"]) if meta.get("plan") else None
    return ReturnMatrix(
        returns,
        EnvSpec.from_dict(meta["env_spec"]),
        tuple(PolicySpec.from_dict(p) for p in meta["policy_specs"]),
        plan,
        params=params,
    )


def write_trace_csv(trace: EsTrace, path: str | Path) -> Path:
    """`epoch,mean_return,pic,poic,eta_star`; header only for a zero-epoch run"""
    return write_rows_csv(path, TRACE_COLUMNS, [r.row() for r in trace.records])


def read_rows_csv(path: str | Path) -> list[dict[str, str]]:
    with Path(path).open(newline="") as f:
        return list(csv.DictReader(f))
