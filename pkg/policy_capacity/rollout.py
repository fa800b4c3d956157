"""
Return-matrix collection

Draw N parameter particles from the policy prior, run M episodes each and
assemble the N x M matrix of undiscounted episodic returns. Particle i draws
its parameters from the stream keyed (master_seed, i, PARAMS_STREAM); episode
j of that particle uses (master_seed, i, EPISODE_STREAM, j) for the
environment reset, environment noise and stochastic policy draws. Rows are computed in a worker
pool and placed by particle id, so the worker count never changes a result.
"""

from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass, field
from multiprocessing import Pool
from typing import Any

import numpy as np
from loguru import logger

from policy_capacity.envs import Env, EnvSpec, make_env
from policy_capacity.errors import ConfigError, SpecMismatchError
from policy_capacity.policies import (
    Policy,
    PolicySpec,
    build_policy,
    check_compatible,
    sample_params,
    spec_param_count,
)

CHUNKS_PER_WORKER = 4

# SeedSequence pads its entropy with zeros, so [s, i] and [s, i, 0] are the
# same stream; every role gets its own non-zero tag
PARAMS_STREAM = 1
EPISODE_STREAM = 2


@dataclass(frozen=True)
class SamplingPlan:
    n_particles: int
    episodes_per_particle: int
    master_seed: int = 0

    def __post_init__(self) -> None:
        if self.n_particles < 2:
            raise ConfigError(f"n_particles must be >= 2, got {self.n_particles}")
        if self.episodes_per_particle < 1:
            raise ConfigError(f"episodes_per_particle must be >= 1, got {self.episodes_per_particle}")
        if not 0 <= self.master_seed < 2**64:
            raise ConfigError(f"master_seed must be a non-negative 64-bit integer, got {self.master_seed}")

    def with_seed(self, master_seed: int) -> SamplingPlan:
        return SamplingPlan(self.n_particles, self.episodes_per_particle, master_seed)

    def to_dict(self) -> dict[str, int]:
        return {
            "n_particles": self.n_particles,
            "episodes_per_particle": self.episodes_per_particle,
            "master_seed": self.master_seed,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> SamplingPlan:
        try:
            return cls(
                n_particles=int(data.get("n_particles", data.get("n"))),
                episodes_per_particle=int(data.get("episodes_per_particle", data.get("m"))),
                master_seed=int(data.get("master_seed", data.get("seed", 0))),
            )
        except TypeError:
            raise ConfigError("plan section needs n_particles (n) and episodes_per_particle (m)") from None


def param_rng(master_seed: int, particle: int) -> np.random.Generator:
    return np.random.default_rng([master_seed, particle, PARAMS_STREAM])


def episode_rng(master_seed: int, particle: int, episode: int) -> np.random.Generator:
    return np.random.default_rng([master_seed, particle, EPISODE_STREAM, episode])


def derive_seed(master_seed: int, *keys: int) -> int:
    """Independent 64-bit seed for a sub-experiment (one prior, one epoch, ...)"""
    state = np.random.SeedSequence([master_seed, *keys]).generate_state(1, dtype=np.uint64)
    return int(state[0])


@dataclass(frozen=True, eq=False)
class ReturnMatrix:
    """N x M returns with provenance; immutable once built

    plan is None for matrices built by hand or loaded without a sidecar.
    """

    returns: np.ndarray
    env_spec: EnvSpec
    policy_specs: tuple[PolicySpec, ...] = ()
    plan: SamplingPlan | None = None
    params: np.ndarray | None = None
    r_min: float = field(init=False)
    r_max: float = field(init=False)

    def __post_init__(self) -> None:
        returns = np.array(self.returns, dtype=np.float64)
        if returns.ndim != 2 or returns.size == 0:
            raise SpecMismatchError(f"returns must be a non-empty 2-D matrix, got shape {returns.shape}")
        if not np.all(np.isfinite(returns)):
            raise SpecMismatchError("returns must be finite")
        if self.plan is not None and (self.plan.n_particles, self.plan.episodes_per_particle) != returns.shape:
            raise SpecMismatchError(f"plan does not match returns of shape {returns.shape}")
        returns.setflags(write=False)
        object.__setattr__(self, "returns", returns)
        object.__setattr__(self, "policy_specs", tuple(self.policy_specs))
        object.__setattr__(self, "r_min", float(returns.min()))
        object.__setattr__(self, "r_max", float(returns.max()))
        if self.params is not None:
            params = np.array(self.params, dtype=np.float64)
            if params.ndim != 2 or params.shape[0] != returns.shape[0]:
                raise SpecMismatchError(
                    f"params shape {params.shape} does not match {returns.shape[0]} particles"
                )
            params.setflags(write=False)
            object.__setattr__(self, "params", params)

    @property
    def n(self) -> int:
        return self.returns.shape[0]

    @property
    def m(self) -> int:
        return self.returns.shape[1]

    @property
    def policy_spec(self) -> PolicySpec:
        """The single contributing policy spec; merged matrices have several"""
        if len(self.policy_specs) != 1:
            raise SpecMismatchError(f"matrix merges {len(self.policy_specs)} policy specs")
        return self.policy_specs[0]

    def digest(self) -> str:
        return hashlib.sha256(np.ascontiguousarray(self.returns).tobytes()).hexdigest()

    def provenance(self) -> dict[str, Any]:
        return {
            "env_spec": self.env_spec.to_dict(),
            "policy_specs": [p.to_dict() for p in self.policy_specs],
            "plan": None if self.plan is None else self.plan.to_dict(),
            "shape": [self.n, self.m],
            "r_min": self.r_min,
            "r_max": self.r_max,
            "returns_sha256": self.digest(),
        }


def run_episode(env: Env, policy: Policy, rng: np.random.Generator) -> float:
    """Roll one episode to termination or horizon; returns the undiscounted sum"""
    state = env.reset(rng)
    total = 0.0
    while True:
        transition = env.step(policy.act(state, rng))
        total += transition.reward
        if transition.done:
            return total
        state = transition.next_state


def _rollout_rows(task: tuple) -> tuple[list[int], np.ndarray, np.ndarray]:
    """Worker body: rows for a chunk of particle ids

    When params is None the particles are drawn from the prior here, on
    param_rng(master_seed, i).
    """
    env_spec, policy_spec, row_ids, params, m, master_seed = task
    env = make_env(env_spec)
    returns = np.empty((len(row_ids), m))
    thetas = []
    for k, i in enumerate(row_ids):
        if params is None:
            theta = sample_params(
                policy_spec,
                param_rng(master_seed, i),
                env_spec.state_dim,
                env_spec.action_space,
            )
        else:
            theta = params[k]
        thetas.append(theta)
        policy = build_policy(policy_spec, theta, env_spec.state_dim, env_spec.action_space)
        for j in range(m):
            returns[k, j] = run_episode(env, policy, episode_rng(master_seed, i, j))
    return list(row_ids), returns, np.asarray(thetas, dtype=np.float64)


def _chunks(n: int, workers: int) -> list[list[int]]:
    size = max(1, -(-n // (workers * CHUNKS_PER_WORKER)))
    return [list(range(start, min(n, start + size))) for start in range(0, n, size)]


def _run(
    env_spec: EnvSpec,
    policy_spec: PolicySpec,
    plan: SamplingPlan,
    params: np.ndarray | None,
    workers: int,
) -> ReturnMatrix:
    check_compatible(env_spec, policy_spec)
    n, m = plan.n_particles, plan.episodes_per_particle
    d = spec_param_count(policy_spec, env_spec.state_dim, env_spec.action_space)
    if workers < 1:
        raise ConfigError(f"workers must be >= 1, got {workers}")

    tasks = [
        (
            env_spec,
            policy_spec,
            rows,
            None if params is None else params[rows[0] : rows[-1] + 1],
            m,
            plan.master_seed,
        )
        for rows in _chunks(n, workers)
    ]
    logger.info(
        "Rolling out {} x {} episodes on {} with {} ({} workers)",
        n, m, env_spec.label(), policy_spec.label(), workers,
    )
    started = time.perf_counter()
    if workers == 1:
        results = [_rollout_rows(t) for t in tasks]
    else:
        with Pool(workers) as pool:
            results = pool.map(_rollout_rows, tasks)

    returns = np.empty((n, m))
    thetas = np.empty((n, d))
    for rows, block, theta_block in results:
        returns[rows] = block
        thetas[rows] = theta_block
    logger.debug("Rollout finished in {:.2f}s", time.perf_counter() - started)
    return ReturnMatrix(returns, env_spec, (policy_spec,), plan, params=thetas)


def collect_returns(
    env_spec: EnvSpec, policy_spec: PolicySpec, plan: SamplingPlan, workers: int = 1
) -> ReturnMatrix:
    """Sample N particles from the prior and roll each out M times"""
    return _run(env_spec, policy_spec, plan, None, workers)


def evaluate_params(
    env_spec: EnvSpec,
    policy_spec: PolicySpec,
    params: np.ndarray,
    plan: SamplingPlan,
    workers: int = 1,
) -> ReturnMatrix:
    """Roll out explicitly given parameter rows; plan.n_particles must match"""
    params = np.asarray(params, dtype=np.float64)
    d = spec_param_count(policy_spec, env_spec.state_dim, env_spec.action_space)
    if params.shape != (plan.n_particles, d):
        raise SpecMismatchError(
            f"params shape {params.shape} does not match ({plan.n_particles}, {d})"
        )
    return _run(env_spec, policy_spec, plan, params, workers)


def merge(matrices: list[ReturnMatrix]) -> ReturnMatrix:
    """Row-concatenate matrices that share env and M"""
    if not matrices:
        raise ConfigError("merge needs at least one matrix")
    if len(matrices) == 1:
        return matrices[0]
    first = matrices[0]
    for other in matrices[1:]:
        if other.env_spec != first.env_spec:
            raise SpecMismatchError(
                f"cannot merge {other.env_spec.label()} into {first.env_spec.label()}"
            )
        if other.m != first.m:
            raise SpecMismatchError(f"cannot merge M={other.m} into M={first.m}")

    returns = np.concatenate([mat.returns for mat in matrices], axis=0)
    specs = tuple(spec for mat in matrices for spec in mat.policy_specs)
    seed = first.plan.master_seed if first.plan is not None else 0
    plan = SamplingPlan(returns.shape[0], first.m, seed)
    return ReturnMatrix(returns, first.env_spec, specs, plan)
