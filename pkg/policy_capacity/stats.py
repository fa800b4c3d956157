"""
Pearson correlation and published metric tables

The p-value is the two-sided Student-t test with n - 2 degrees of freedom,
evaluated through the regularized incomplete beta function:
p = I_{1 - r^2}((n - 2) / 2, 1 / 2).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np
from scipy.special import betainc

from policy_capacity.errors import ConfigError, EstimationError

KEY_COLUMN = "env"
SCORE_A = "score_a"
SCORE_R = "score_r"
DEFAULT_TARGETS = (SCORE_A, SCORE_R)

# published fixtures shipped inside the package
FIXTURES = {
    "table5": "table5.csv",
    "table18": "table18.csv",
    "table9": "table9.csv",
}

# outliers of POIC dropped in the robustness check
POIC_OUTLIERS = ("CartPole", "Acrobot", "MountainCarContinuous")


@dataclass(frozen=True)
class CorrelationResult:
    r: float
    p_value: float
    n: int

    def to_dict(self) -> dict[str, Any]:
        return {"r": self.r, "p_value": self.p_value, "n": self.n}


@dataclass(frozen=True)
class MetricTable:
    """Rows keyed by environment; every row has a value for every column"""

    columns: tuple[str, ...]
    rows: dict[str, dict[str, float]]

    def column(self, name: str, keys: list[str] | None = None) -> np.ndarray:
        if name not in self.columns:
            raise ConfigError(f"column {name!r} not in table ({', '.join(self.columns)})")
        keys = list(self.rows) if keys is None else keys
        return np.asarray([self.rows[k][name] for k in keys])

    def without(self, exclude: list[str] | tuple[str, ...]) -> MetricTable:
        missing = [k for k in exclude if k not in self.rows]
        if missing:
            raise ConfigError(f"cannot exclude unknown rows: {missing}")
        kept = {k: v for k, v in self.rows.items() if k not in exclude}
        return MetricTable(self.columns, kept)


def pearson(xs: Any, ys: Any) -> CorrelationResult:
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise EstimationError(f"pearson needs equal-length 1-D inputs, got {x.shape} and {y.shape}")
    n = x.size
    if n < 3:
        raise EstimationError(f"pearson needs n >= 3, got {n}")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = math.fsum((dx * dx).tolist())
    syy = math.fsum((dy * dy).tolist())
    if sxx == 0 or syy == 0:
        raise EstimationError("pearson is undefined for a constant input")

    r = math.fsum((dx * dy).tolist()) / math.sqrt(sxx * syy)
    r = min(1.0, max(-1.0, r))
    df = n - 2
    p = float(betainc(df / 2.0, 0.5, 1.0 - r * r))
    return CorrelationResult(r=r, p_value=min(1.0, max(0.0, p)), n=n)


def _parse_float(value: str, where: str) -> float:
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{where}: {value!r} is not a number") from None


def ingest_table(path: str | Path) -> MetricTable:
    """Load a metric CSV; the `env` column is the row key, all others numeric"""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"metric table not found: {path}")
    with path.open(newline="") as f:
        reader = csv.DictReader(f)
        header = reader.fieldnames or []
        if KEY_COLUMN not in header:
            raise ConfigError(f"{path}: missing '{KEY_COLUMN}' column")
        columns = tuple(c for c in header if c != KEY_COLUMN)
        if not columns:
            raise ConfigError(f"{path}: no metric columns")
        rows: dict[str, dict[str, float]] = {}
        for lineno, record in enumerate(reader, start=2):
            key = (record.get(KEY_COLUMN) or "").strip()
            if not key:
                raise ConfigError(f"{path}:{lineno}: empty '{KEY_COLUMN}'")
            if key in rows:
                raise ConfigError(f"{path}:{lineno}: duplicate row {key!r}")
            if None in record or any(record.get(c) in (None, "") for c in columns):
                raise ConfigError(f"{path}:{lineno}: row {key!r} is incomplete")
            rows[key] = {c: _parse_float(record[c], f"{path}:{lineno}:{c}") for c in columns}
    return MetricTable(columns, rows)


def fixture_path(name: str) -> Path:
    """Path of a shipped table: table5, table18 or table9"""
    try:
        filename = FIXTURES[name]
    except KeyError:
        raise ConfigError(f"Unknown fixture {name!r}; choose from {sorted(FIXTURES)}") from None
    return Path(str(resources.files("policy_capacity") / "data" / filename))


def correlate_all(
    table: MetricTable,
    targets: tuple[str, ...] | list[str] | None = None,
    exclude: tuple[str, ...] | list[str] = (),
) -> dict[str, dict[str, CorrelationResult]]:
    """Correlate every column against each target column, after dropping `exclude` rows"""
    if targets is None:
        targets = [t for t in DEFAULT_TARGETS if t in table.columns]
    if not targets:
        raise ConfigError("no target columns to correlate against")
    table = table.without(list(exclude)) if exclude else table
    if len(table.rows) < 3:
        raise EstimationError(f"need at least 3 rows to correlate, got {len(table.rows)}")

    out: dict[str, dict[str, CorrelationResult]] = {}
    for target in targets:
        y = table.column(target)
        out[target] = {
            col: pearson(table.column(col), y) for col in table.columns if col != target
        }
    return out


def correlation_matrix_json(results: dict[str, dict[str, CorrelationResult]]) -> dict[str, Any]:
    return {
        target: {col: res.to_dict() for col, res in by_col.items()}
        for target, by_col in results.items()
    }
