"""
Run configuration

YAML run files are parsed into frozen dataclasses. Process-wide defaults come
from environment variables, loaded from the project .env when present.
Precedence is command-line flag > config file > environment variable.
"""

from __future__ import annotations

import os
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

import yaml
from dotenv import load_dotenv
from loguru import logger

from policy_capacity.envs import EnvSpec, RewardFamily, standard_sweep
from policy_capacity.errors import ConfigError
from policy_capacity.evolution import EsConfig
from policy_capacity.infometrics import DEFAULT_BINS
from policy_capacity.persistence import json_digest
from policy_capacity.policies import (
    BAG_HIDDEN_LAYERS,
    PRIOR_FAMILIES,
    PolicySpec,
    PriorSpec,
    architecture_bag,
)
from policy_capacity.rollout import SamplingPlan
from policy_capacity.scoring import BagConfig

# Load .env file if it exists
ENV_PATH = Path(__file__).parent.parent / ".env"
if ENV_PATH.exists():
    load_dotenv(ENV_PATH)

# Configuration
DEFAULT_WORKERS = int(os.getenv("POLICY_CAPACITY_WORKERS", "1"))
DEFAULT_LOG_LEVEL = os.getenv("POLICY_CAPACITY_LOG_LEVEL", "INFO")
DEFAULT_OUTPUT_DIR = os.getenv("POLICY_CAPACITY_OUTPUT_DIR", "results")

LOG_FORMAT = "<green>{time:HH:mm:ss}</green> | <level>{level: <8}</level> | {name}:{line} - {message}"

DEFAULT_NOISE_GRID = {
    "u_init": (0.05, 0.1, 0.15),
    "u_dyn": (0.0, 0.03, 0.05, 0.1),
}


def configure_logging(level: str | None = None) -> None:
    """Single stderr sink at the given level"""
    logger.remove()
    logger.add(sys.stderr, level=(level or DEFAULT_LOG_LEVEL).upper(), format=LOG_FORMAT)


@dataclass(frozen=True)
class MetricsOptions:
    bins: int = DEFAULT_BINS
    strict_bins: bool = True
    r_max_ref: float | None = None
    eta: float | None = None

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> MetricsOptions:
        r_max_ref = data.get("r_max_ref")
        eta = data.get("eta")
        opts = cls(
            bins=int(data.get("bins", DEFAULT_BINS)),
            strict_bins=bool(data.get("strict_bins", True)),
            r_max_ref=None if r_max_ref is None else float(r_max_ref),
            eta=None if eta is None else float(eta),
        )
        if opts.eta is not None and opts.eta <= 0:
            raise ConfigError(f"metrics.eta must be > 0, got {opts.eta}")
        return opts


@dataclass(frozen=True)
class OutputOptions:
    dir: Path = Path(DEFAULT_OUTPUT_DIR)
    stem: str = "run"
    save_params: bool = False
    svg: bool = False

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> OutputOptions:
        return cls(
            dir=Path(data.get("dir", DEFAULT_OUTPUT_DIR)),
            stem=str(data.get("stem", "run")),
            save_params=bool(data.get("save_params", False)),
            svg=bool(data.get("svg", False)),
        )

    def path(self, suffix: str) -> Path:
        return self.dir / f"{self.stem}{suffix}"


@dataclass(frozen=True)
class BagSection:
    """Subset of the architecture bag; omitted axes default to the full bag"""

    hidden_layers: tuple[tuple[int, ...], ...] = BAG_HIDDEN_LAYERS
    priors: tuple[PriorSpec, ...] = tuple(PriorSpec(f) for f in PRIOR_FAMILIES)
    biases: tuple[bool, ...] = (True, False)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> BagSection:
        out = cls()
        if "hidden_layers" in data:
            out = replace(out, hidden_layers=tuple(tuple(int(w) for w in h) for h in data["hidden_layers"]))
        if "priors" in data:
            priors = []
            for p in data["priors"]:
                if isinstance(p, str):
                    priors.append(PriorSpec(p.lower()))
                else:
                    priors.append(PriorSpec(str(p["family"]).lower(), float(p.get("mu", 0.0)), float(p.get("sigma", 1.0))))
            out = replace(out, priors=tuple(priors))
        if "biases" in data:
            out = replace(out, biases=tuple(bool(b) for b in data["biases"]))
        return out

    def specs(self) -> list[PolicySpec]:
        return architecture_bag(list(self.hidden_layers), list(self.priors), list(self.biases))


@dataclass(frozen=True)
class ScoreOptions:
    r_max_algo: float | None = None
    r_ave_algo: float | None = None
    run_bag: bool = False


@dataclass(frozen=True)
class RunConfig:
    env: EnvSpec | None = None
    policy: PolicySpec | None = None
    bag: BagSection | None = None
    plan: SamplingPlan | None = None
    metrics: MetricsOptions = field(default_factory=MetricsOptions)
    output: OutputOptions = field(default_factory=OutputOptions)
    es: EsConfig | None = None
    mu0_sweep: tuple[Any, ...] = ()
    algorithms: BagConfig | None = None
    shaping: tuple[RewardFamily, ...] = ()
    noise_grid: dict[str, tuple[float, ...]] = field(default_factory=lambda: dict(DEFAULT_NOISE_GRID))
    score: ScoreOptions = field(default_factory=ScoreOptions)
    workers: int = DEFAULT_WORKERS
    raw: dict[str, Any] = field(default_factory=dict)

    @property
    def digest(self) -> str:
        return json_digest(self.raw)

    def require_env(self) -> EnvSpec:
        if self.env is None:
            raise ConfigError("config has no env section")
        return self.env

    def require_plan(self) -> SamplingPlan:
        if self.plan is None:
            raise ConfigError("config has no plan section (n, m, seed)")
        return self.plan

    def require_es(self) -> EsConfig:
        if self.es is None:
            raise ConfigError("config has no es section")
        return self.es

    def policy_specs(self, fallback: PolicySpec | None = None) -> list[PolicySpec]:
        """The bag when present, else the single policy, else the fallback"""
        if self.bag is not None:
            return self.bag.specs()
        policy = self.policy or fallback
        if policy is None:
            raise ConfigError("config has no policy or bag section")
        return [policy]


def _section(data: dict[str, Any], name: str) -> dict[str, Any] | None:
    value = data.get(name)
    if value is None:
        return None
    if not isinstance(value, dict):
        raise ConfigError(f"section '{name}' must be a mapping")
    return value


def parse_config(data: dict[str, Any] | None) -> RunConfig:
    """Build a RunConfig from the parsed YAML mapping"""
    data = data or {}
    if not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")
    try:
        env = _section(data, "env")
        policy = _section(data, "policy")
        bag = data.get("bag")
        plan = _section(data, "plan")
        es = _section(data, "es")
        algorithms = _section(data, "algorithms")
        shaping = _section(data, "shaping")
        noise = _section(data, "noise")
        score = _section(data, "score") or {}

        mu0_sweep: tuple[Any, ...] = ()
        if es is not None and "mu0_sweep" in es:
            mu0_sweep = tuple(
                tuple(float(v) for v in mu) if isinstance(mu, list) else float(mu)
                for mu in es["mu0_sweep"]
            )
            es = {k: v for k, v in es.items() if k != "mu0_sweep"}

        variants: tuple[RewardFamily, ...] = ()
        if shaping is not None:
            entries = shaping.get("variants")
            variants = (
                tuple(RewardFamily.from_dict(v) for v in entries) if entries else tuple(standard_sweep())
            )

        noise_grid = dict(DEFAULT_NOISE_GRID)
        if noise is not None:
            for key in ("u_init", "u_dyn"):
                if key in noise:
                    noise_grid[key] = tuple(float(v) for v in noise[key])

        r_max_algo = score.get("r_max_algo")
        r_ave_algo = score.get("r_ave_algo")
        return RunConfig(
            env=EnvSpec.from_dict(env) if env is not None else None,
            policy=PolicySpec.from_dict(policy) if policy is not None else None,
            bag=BagSection.from_dict(bag if isinstance(bag, dict) else {}) if bag is not None else None,
            plan=SamplingPlan.from_dict(plan) if plan is not None else None,
            metrics=MetricsOptions.from_dict(_section(data, "metrics") or {}),
            output=OutputOptions.from_dict(_section(data, "output") or {}),
            es=EsConfig.from_dict(es) if es is not None else None,
            mu0_sweep=mu0_sweep,
            algorithms=BagConfig.from_dict(algorithms) if algorithms is not None else None,
            shaping=variants,
            noise_grid=noise_grid,
            score=ScoreOptions(
                r_max_algo=None if r_max_algo is None else float(r_max_algo),
                r_ave_algo=None if r_ave_algo is None else float(r_ave_algo),
                run_bag=bool(score.get("run_bag", algorithms is not None)),
            ),
            workers=int(data.get("workers", DEFAULT_WORKERS)),
            raw=data,
        )
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"invalid config: {e}") from e


def load_config(path: str | Path | None) -> RunConfig:
    """Read a YAML run file; None gives an empty config"""
    if path is None:
        return parse_config({})
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = yaml.safe_load(path.read_text())
    except yaml.YAMLError as e:
        raise ConfigError(f"{path}: not valid YAML: {e}") from e
    logger.debug("Loaded config {}", path)
    return parse_config(data)


def with_overrides(
    cfg: RunConfig,
    workers: int | None = None,
    seed: int | None = None,
    out: str | Path | None = None,
) -> RunConfig:
    """Apply command-line flags on top of the file; the digest follows the overrides"""
    raw = dict(cfg.raw)
    if workers is not None:
        if workers < 1:
            raise ConfigError(f"--workers must be >= 1, got {workers}")
        cfg = replace(cfg, workers=workers)
        raw["workers"] = workers
    if seed is not None:
        if cfg.plan is not None:
            cfg = replace(cfg, plan=cfg.plan.with_seed(seed))
        if cfg.es is not None:
            cfg = replace(cfg, es=replace(cfg.es, master_seed=seed))
        raw["seed"] = seed
    if out is not None:
        cfg = replace(cfg, output=replace(cfg.output, dir=Path(out)))
        raw["out"] = str(out)
    return replace(cfg, raw=raw)
