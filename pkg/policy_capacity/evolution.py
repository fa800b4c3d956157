"""
Evolution strategies over the prior mean

Each epoch samples theta_i = mu + sigma * eps_i, rolls every particle out
through the rollout module and updates

    mu' = mu + lr / (population * sigma) * sum_i F_i * eps_i

where F is the baseline-subtracted mean return or, with rank_normalize on,
the centered rank (ties share a rank, so a flat population does not move
mu). The same epoch matrix feeds PIC and POIC, so the trace costs no extra
rollouts.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from loguru import logger
from scipy.stats import rankdata

from policy_capacity.envs import EnvSpec
from policy_capacity.errors import ConfigError, SpecMismatchError
from policy_capacity.infometrics import DEFAULT_BINS, estimate_pic, optimize_temperature
from policy_capacity.policies import PolicySpec, check_compatible, spec_param_count
from policy_capacity.rollout import ReturnMatrix, SamplingPlan, derive_seed, evaluate_params

MIN_SIGMA = 1e-8

TRACE_COLUMNS = ("epoch", "mean_return", "pic", "poic", "eta_star")


@dataclass(frozen=True)
class EsConfig:
    mu0: float | tuple[float, ...] = 0.0
    sigma: float = 0.1
    population: int = 100
    episodes_per_particle: int = 100
    # sized for returns in [0, 1]; raw returns on a wider scale need a smaller rate
    # or rank_normalize
    learning_rate: float = 2.0
    epochs: int = 200
    rank_normalize: bool = False
    antithetic: bool = False
    master_seed: int = 0
    bins: int = DEFAULT_BINS

    def __post_init__(self) -> None:
        if not self.sigma > MIN_SIGMA:
            raise ConfigError(f"sigma must be > {MIN_SIGMA}: no exploration with sigma={self.sigma}")
        if self.population < 2:
            raise ConfigError(f"population must be >= 2, got {self.population}")
        if self.antithetic and self.population % 2:
            raise ConfigError(f"antithetic sampling needs an even population, got {self.population}")
        if self.episodes_per_particle < 1:
            raise ConfigError("episodes_per_particle must be >= 1")
        if self.learning_rate <= 0:
            raise ConfigError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.epochs < 0:
            raise ConfigError(f"epochs must be >= 0, got {self.epochs}")

    def initial_mean(self, d: int) -> np.ndarray:
        mu = np.asarray(self.mu0, dtype=np.float64)
        if mu.ndim == 0:
            return np.full(d, float(mu))
        if mu.shape != (d,):
            raise SpecMismatchError(f"mu0 has {mu.shape[0]} entries, policy has {d}")
        return mu.copy()

    def with_mu0(self, mu0: float | tuple[float, ...]) -> EsConfig:
        data = self.to_dict()
        data["mu0"] = mu0
        return EsConfig.from_dict(data)

    def to_dict(self) -> dict[str, Any]:
        return {
            "mu0": list(self.mu0) if isinstance(self.mu0, tuple) else self.mu0,
            "sigma": self.sigma,
            "population": self.population,
            "episodes_per_particle": self.episodes_per_particle,
            "learning_rate": self.learning_rate,
            "epochs": self.epochs,
            "rank_normalize": self.rank_normalize,
            "antithetic": self.antithetic,
            "master_seed": self.master_seed,
            "bins": self.bins,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> EsConfig:
        mu0 = data.get("mu0", 0.0)
        mu0 = tuple(float(v) for v in mu0) if isinstance(mu0, (list, tuple)) else float(mu0)
        return cls(
            mu0=mu0,
            sigma=float(data.get("sigma", 0.1)),
            population=int(data.get("population", 100)),
            episodes_per_particle=int(data.get("episodes_per_particle", 100)),
            learning_rate=float(data.get("learning_rate", 2.0)),
            epochs=int(data.get("epochs", 200)),
            rank_normalize=bool(data.get("rank_normalize", False)),
            antithetic=bool(data.get("antithetic", False)),
            master_seed=int(data.get("master_seed", 0)),
            bins=int(data.get("bins", DEFAULT_BINS)),
        )


@dataclass(frozen=True)
class EsRecord:
    epoch: int
    mu: tuple[float, ...]
    mean_return: float
    pic: float
    poic: float
    eta_star: float

    def row(self) -> dict[str, Any]:
        return {
            "epoch": self.epoch,
            "mean_return": self.mean_return,
            "pic": self.pic,
            "poic": self.poic,
            "eta_star": self.eta_star,
        }


@dataclass
class EsTrace:
    config: EsConfig
    env_label: str
    records: list[EsRecord] = field(default_factory=list)

    @property
    def final_mu(self) -> np.ndarray | None:
        return np.asarray(self.records[-1].mu) if self.records else None

    def column(self, name: str) -> np.ndarray:
        return np.asarray([getattr(r, name) for r in self.records])


def centered_ranks(fitness: np.ndarray) -> np.ndarray:
    """Ranks mapped to [-0.5, 0.5]; tied values share their average rank"""
    n = len(fitness)
    return (rankdata(fitness) - 1.0) / (n - 1) - 0.5


def es_step(
    mu: np.ndarray,
    cfg: EsConfig,
    fitness: Any,
    perturbations: Any,
) -> np.ndarray:
    """One ES update of the prior mean from per-particle fitness"""
    mu = np.asarray(mu, dtype=np.float64)
    fitness = np.asarray(fitness, dtype=np.float64)
    eps = np.asarray(perturbations, dtype=np.float64)
    if fitness.shape != (cfg.population,):
        raise SpecMismatchError(f"expected {cfg.population} fitness values, got {fitness.shape}")
    if eps.shape != (cfg.population, mu.shape[0]):
        raise SpecMismatchError(
            f"perturbations shape {eps.shape} does not match ({cfg.population}, {mu.shape[0]})"
        )
    if cfg.rank_normalize:
        shaped = centered_ranks(fitness)
    else:
        shaped = fitness - fitness.mean()
    return mu + cfg.learning_rate / (cfg.population * cfg.sigma) * (shaped @ eps)


def sample_perturbations(cfg: EsConfig, d: int, rng: np.random.Generator) -> np.ndarray:
    if cfg.antithetic:
        half = rng.standard_normal((cfg.population // 2, d))
        return np.concatenate([half, -half])
    return rng.standard_normal((cfg.population, d))


def train_es(
    env_spec: EnvSpec,
    policy_spec: PolicySpec,
    cfg: EsConfig,
    workers: int = 1,
    strict_bins: bool = True,
    on_epoch: Callable[[int, ReturnMatrix], None] | None = None,
) -> EsTrace:
    """Run ES for cfg.epochs epochs, recording return and metrics per epoch

    on_epoch(epoch, matrix) is called with each epoch's return matrix before
    the update; the CLI uses it to dump matrices for recomputation.
    """
    check_compatible(env_spec, policy_spec)
    d = spec_param_count(policy_spec, env_spec.state_dim, env_spec.action_space)
    mu = cfg.initial_mean(d)
    trace = EsTrace(config=cfg, env_label=env_spec.label())

    for epoch in range(cfg.epochs):
        rng = np.random.default_rng([cfg.master_seed, epoch])
        eps = sample_perturbations(cfg, d, rng)
        plan = SamplingPlan(
            cfg.population, cfg.episodes_per_particle, derive_seed(cfg.master_seed, epoch, 1)
        )
        matrix = evaluate_params(env_spec, policy_spec, mu + cfg.sigma * eps, plan, workers)
        if on_epoch is not None:
            on_epoch(epoch, matrix)

        fitness = matrix.returns.mean(axis=1)
        pic = estimate_pic(matrix, cfg.bins, strict_bins)
        search = optimize_temperature(matrix)
        record = EsRecord(
            epoch=epoch,
            mu=tuple(mu.tolist()),
            mean_return=float(matrix.returns.mean()),
            pic=pic.pic,
            poic=search.poic_star,
            eta_star=search.eta_star,
        )
        trace.records.append(record)
        logger.info(
            "epoch {} | mean return {:.4f} | pic {:.4f} | poic {:.4f}",
            epoch, record.mean_return, record.pic, record.poic,
        )
        mu = es_step(mu, cfg, fitness, eps)

    return trace


def epochs_to_threshold(trace: EsTrace, threshold: float) -> int | None:
    """First epoch whose mean return reaches the threshold, or None"""
    for record in trace.records:
        if record.mean_return >= threshold:
            return record.epoch
    return None
