"""
Normalized scores and the desk-scale algorithm bag

    score = (r_ave - r_min_rand) / (max(r_max_rand, r_max_algo) - r_min_rand)

r_ave is either the average final return of a bag of optimizers or the
average return of random policy sampling. The bag holds random search, the
cross-entropy method and evolution-strategy variants; each optimizes the
parameters of a deterministic policy under its own budget and is scored on
fresh evaluation episodes of its final solution.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from loguru import logger

from policy_capacity.envs import EnvSpec, make_env
from policy_capacity.errors import ConfigError, EstimationError
from policy_capacity.evolution import EsConfig, es_step, sample_perturbations
from policy_capacity.policies import (
    PolicySpec,
    build_policy,
    check_compatible,
    sample_params,
    spec_param_count,
)
from policy_capacity.rollout import (
    ReturnMatrix,
    SamplingPlan,
    derive_seed,
    episode_rng,
    evaluate_params,
    run_episode,
)

RANDOM_SEARCH = "random_search"
CEM = "cem"
ES = "es"
ALGORITHMS = (RANDOM_SEARCH, CEM, ES)

EVAL_EPISODES = 100
BAG_CSV_COLUMNS = ("algorithm", "hyperparams", "env", "mean_return")

# stream tags within one run seed; non-zero so no two roles share a stream
SEARCH_STREAM = 1
CEM_STREAM = 2
ES_NOISE_STREAM = 3
ES_INIT_STREAM = 4

DEFAULT_HYPERPARAMS: dict[str, dict[str, Any]] = {
    RANDOM_SEARCH: {"k": 100, "episodes": 5},
    CEM: {"population": 50, "elite_frac": 0.2, "iters": 20, "episodes": 5, "init_sigma": 1.0},
    ES: {
        "population": 50,
        "sigma": 0.1,
        "learning_rate": 0.05,
        "iters": 20,
        "episodes": 5,
        "rand_init": False,
        "rank_normalize": True,
    },
}


@dataclass(frozen=True)
class ScoreInputs:
    r_ave: float
    r_min_rand: float
    r_max_rand: float
    r_max_algo: float | None = None


def normalized_score(inputs: ScoreInputs) -> float:
    """Not clamped: an r_ave below r_min_rand gives a negative score"""
    r_max_algo = inputs.r_max_rand if inputs.r_max_algo is None else inputs.r_max_algo
    denominator = max(inputs.r_max_rand, r_max_algo) - inputs.r_min_rand
    if not denominator > 0:
        raise EstimationError(
            f"normalized score needs max(r_max) > r_min_rand, got denominator {denominator}"
        )
    return (inputs.r_ave - inputs.r_min_rand) / denominator


def random_sampling_score(m: ReturnMatrix, r_max_algo: float | None = None) -> float:
    if m.r_max == m.r_min:
        raise EstimationError("random-sampling score of a constant-return matrix is undefined")
    r_ave = math.fsum(m.returns.ravel().tolist()) / m.returns.size
    return normalized_score(ScoreInputs(r_ave, m.r_min, m.r_max, r_max_algo))


# ===== BAG =====


@dataclass(frozen=True)
class AlgorithmSpec:
    name: str
    hyperparams: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.name not in ALGORITHMS:
            raise ConfigError(f"Unknown algorithm: {self.name}")
        unknown = set(self.hyperparams) - set(DEFAULT_HYPERPARAMS[self.name])
        if unknown:
            raise ConfigError(f"{self.name} does not take {sorted(unknown)}")

    def param(self, key: str) -> Any:
        return self.hyperparams.get(key, DEFAULT_HYPERPARAMS[self.name][key])

    def label(self) -> str:
        merged = {**DEFAULT_HYPERPARAMS[self.name], **self.hyperparams}
        return json.dumps(merged, sort_keys=True, separators=(",", ":"))


@dataclass(frozen=True)
class BagConfig:
    algorithms: tuple[AlgorithmSpec, ...]
    seeds: tuple[int, ...] = (0,)
    eval_episodes: int = EVAL_EPISODES

    def __post_init__(self) -> None:
        if not self.algorithms:
            raise ConfigError("the algorithm bag needs at least one algorithm")
        if not self.seeds:
            raise ConfigError("the algorithm bag needs at least one seed")
        if self.eval_episodes < 1:
            raise ConfigError("eval_episodes must be >= 1")

    @classmethod
    def default(cls, seeds: tuple[int, ...] = (0,)) -> BagConfig:
        """Random search, CEM and three ES variants (sigma 0.1, 0.3, 0.1 from a random start)"""
        return cls(
            algorithms=(
                AlgorithmSpec(RANDOM_SEARCH),
                AlgorithmSpec(CEM),
                AlgorithmSpec(ES, {"sigma": 0.1}),
                AlgorithmSpec(ES, {"sigma": 0.3}),
                AlgorithmSpec(ES, {"sigma": 0.1, "rand_init": True}),
            ),
            seeds=seeds,
        )

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> BagConfig:
        """Parse the `algorithms` config section"""
        entries = data.get("bag", [])
        if not entries:
            base = cls.default()
            algorithms = base.algorithms
        else:
            algorithms = tuple(
                AlgorithmSpec(str(e["name"]).lower(), dict(e.get("hyperparams", {})))
                for e in entries
            )
        return cls(
            algorithms=algorithms,
            seeds=tuple(int(s) for s in data.get("seeds", (0,))),
            eval_episodes=int(data.get("eval_episodes", EVAL_EPISODES)),
        )


@dataclass(frozen=True)
class AlgorithmResult:
    algorithm: str
    hyperparams: str
    seed: int
    mean_return: float


@dataclass
class BagResult:
    env_label: str
    results: list[AlgorithmResult]

    @property
    def r_ave_algo(self) -> float:
        return math.fsum(r.mean_return for r in self.results) / len(self.results)

    @property
    def r_max_algo(self) -> float:
        return max(r.mean_return for r in self.results)

    def per_algorithm(self) -> dict[str, float]:
        """Mean over seeds, keyed by 'name hyperparams'"""
        groups: dict[str, list[float]] = {}
        for r in self.results:
            groups.setdefault(f"{r.algorithm} {r.hyperparams}", []).append(r.mean_return)
        return {k: math.fsum(v) / len(v) for k, v in groups.items()}


def evaluate_solution(
    env_spec: EnvSpec,
    policy_spec: PolicySpec,
    theta: np.ndarray,
    episodes: int,
    seed: int,
) -> float:
    """Mean return of one parameter vector over fresh episodes"""
    env = make_env(env_spec)
    policy = build_policy(policy_spec, theta, env_spec.state_dim, env_spec.action_space)
    total = math.fsum(
        run_episode(env, policy, episode_rng(seed, 0, j)) for j in range(episodes)
    )
    return total / episodes


def _rng(seed: int, tag: int, *index: int) -> np.random.Generator:
    return np.random.default_rng([seed, tag, *index])


def _fitness(
    env_spec: EnvSpec,
    policy_spec: PolicySpec,
    params: np.ndarray,
    episodes: int,
    seed: int,
    workers: int,
) -> np.ndarray:
    plan = SamplingPlan(params.shape[0], episodes, seed)
    return evaluate_params(env_spec, policy_spec, params, plan, workers).returns.mean(axis=1)


def _random_search(env_spec, policy_spec, algo, seed, workers) -> np.ndarray:
    k = int(algo.param("k"))
    if k < 2:
        raise ConfigError(f"random_search needs k >= 2, got {k}")
    params = np.stack([
        sample_params(policy_spec, _rng(seed, SEARCH_STREAM, i), env_spec.state_dim, env_spec.action_space)
        for i in range(k)
    ])
    fitness = _fitness(env_spec, policy_spec, params, int(algo.param("episodes")), derive_seed(seed, 1), workers)
    return params[int(np.argmax(fitness))]


def _cem(env_spec, policy_spec, algo, seed, workers) -> np.ndarray:
    d = spec_param_count(policy_spec, env_spec.state_dim, env_spec.action_space)
    population = int(algo.param("population"))
    n_elite = max(1, int(round(population * float(algo.param("elite_frac")))))
    if population < 2:
        raise ConfigError(f"cem needs population >= 2, got {population}")
    mean = np.zeros(d)
    std = np.full(d, float(algo.param("init_sigma")))
    rng = _rng(seed, CEM_STREAM)
    for it in range(int(algo.param("iters"))):
        params = mean + std * rng.standard_normal((population, d))
        fitness = _fitness(
            env_spec, policy_spec, params, int(algo.param("episodes")), derive_seed(seed, it, 1), workers
        )
        # stable sort keeps tied candidates in sampling order
        elite = params[np.argsort(-fitness, kind="stable")[:n_elite]]
        mean = elite.mean(axis=0)
        std = elite.std(axis=0) + 1e-3
    return mean


def _es(env_spec, policy_spec, algo, seed, workers) -> np.ndarray:
    d = spec_param_count(policy_spec, env_spec.state_dim, env_spec.action_space)
    cfg = EsConfig(
        sigma=float(algo.param("sigma")),
        population=int(algo.param("population")),
        episodes_per_particle=int(algo.param("episodes")),
        learning_rate=float(algo.param("learning_rate")),
        epochs=int(algo.param("iters")),
        rank_normalize=bool(algo.param("rank_normalize")),
        master_seed=seed,
    )
    if algo.param("rand_init"):
        mu = sample_params(policy_spec, _rng(seed, ES_INIT_STREAM), env_spec.state_dim, env_spec.action_space)
    else:
        mu = np.zeros(d)
    for it in range(cfg.epochs):
        eps = sample_perturbations(cfg, d, _rng(seed, ES_NOISE_STREAM, it))
        fitness = _fitness(
            env_spec, policy_spec, mu + cfg.sigma * eps, cfg.episodes_per_particle,
            derive_seed(seed, it, 1), workers,
        )
        mu = es_step(mu, cfg, fitness, eps)
    return mu


_RUNNERS = {RANDOM_SEARCH: _random_search, CEM: _cem, ES: _es}


def run_bag(
    env_spec: EnvSpec, policy_spec: PolicySpec, bag: BagConfig, workers: int = 1
) -> BagResult:
    """Run every (algorithm, seed) and score its final solution on fresh episodes"""
    check_compatible(env_spec, policy_spec)
    results = []
    for a_index, algo in enumerate(bag.algorithms):
        for seed in bag.seeds:
            run_seed = derive_seed(seed, a_index)
            theta = _RUNNERS[algo.name](env_spec, policy_spec, algo, run_seed, workers)
            score = evaluate_solution(
                env_spec, policy_spec, theta, bag.eval_episodes, derive_seed(run_seed, 2)
            )
            logger.info("{} {} seed {} -> {:.3f}", algo.name, algo.label(), seed, score)
            results.append(AlgorithmResult(algo.name, algo.label(), seed, score))
    return BagResult(env_label=env_spec.label(), results=results)


def bag_results_csv(result: BagResult, path: str | Path) -> Path:
    """Write `algorithm,hyperparams,env,mean_return`, one row per (algorithm, seed)"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(BAG_CSV_COLUMNS)
        for r in result.results:
            writer.writerow([r.algorithm, r.hyperparams, result.env_label, repr(r.mean_return)])
    return path
