"""
Environments

Every MDP sits behind the same episodic interface: make_env(spec) returns a
fresh instance with reset(seed) -> state and step(action) -> Transition.
"""

from __future__ import annotations

from typing import Any

from policy_capacity.envs.base import (
    ACROBOT,
    CARTPOLE,
    CONSTANT,
    ENV_TABLE,
    MOUNTAIN_CAR,
    MOUNTAIN_CAR_CONTINUOUS,
    PENDULUM,
    POINTMAZE,
    SYNTHETIC,
    Env,
    EnvSpec,
    NoiseConfig,
    Transition,
)
from policy_capacity.envs.classic_control import (
    Acrobot,
    CartPole,
    MountainCar,
    MountainCarContinuous,
    Pendulum,
)
from policy_capacity.envs.layout import MazeLayout
from policy_capacity.envs.pointmaze import Pointmaze
from policy_capacity.envs.rewards import RewardFamily, shaped_reward, standard_sweep
from policy_capacity.envs.spaces import ActionSpace
from policy_capacity.envs.synthetic import ConstantEnv, SyntheticEnv, synthetic_step
from policy_capacity.errors import ConfigError

__all__ = [
    "ActionSpace",
    "Env",
    "EnvSpec",
    "MazeLayout",
    "NoiseConfig",
    "RewardFamily",
    "Transition",
    "available_envs",
    "make_env",
    "return_bounds",
    "shaped_reward",
    "standard_sweep",
    "synthetic_step",
]

ENV_CLASSES: dict[str, type[Env]] = {
    SYNTHETIC: SyntheticEnv,
    CONSTANT: ConstantEnv,
    CARTPOLE: CartPole,
    PENDULUM: Pendulum,
    MOUNTAIN_CAR: MountainCar,
    MOUNTAIN_CAR_CONTINUOUS: MountainCarContinuous,
    ACROBOT: Acrobot,
    POINTMAZE: Pointmaze,
}


def make_env(spec: EnvSpec) -> Env:
    """Build an independent environment instance from a spec"""
    if not isinstance(spec, EnvSpec):
        raise ConfigError(f"make_env expects an EnvSpec, got {type(spec).__name__}")
    try:
        env_cls = ENV_CLASSES[spec.env_id]
    except KeyError:
        raise ConfigError(f"Unknown env_id: {spec.env_id}") from None
    return env_cls(spec)


def available_envs() -> list[dict[str, Any]]:
    """List environment ids with their horizon, state_dim and action space"""
    rows = [
        {
            "env_id": SYNTHETIC,
            "horizon": "T in {1,2,3}",
            "state_dim": 3,
            "action_space": ActionSpace.discrete(2).to_dict(),
        },
        {
            "env_id": CONSTANT,
            "horizon": "any",
            "state_dim": 1,
            "action_space": ActionSpace.discrete(2).to_dict(),
        },
    ]
    for env_id, (horizon, state_dim, space) in ENV_TABLE.items():
        rows.append(
            {
                "env_id": env_id,
                "horizon": horizon,
                "state_dim": state_dim,
                "action_space": space.to_dict(),
            }
        )
    return rows


def return_bounds(spec: EnvSpec) -> tuple[float, float] | None:
    """Analytic episodic return bounds, or None when the family is unbounded"""
    if spec.env_id == SYNTHETIC:
        return (0.0, 1.0)
    if spec.env_id == CONSTANT:
        total = spec.constant_reward * spec.horizon
        return (total, total)
    if spec.env_id == CARTPOLE:
        return (1.0, float(spec.horizon))
    if spec.env_id in (MOUNTAIN_CAR, ACROBOT):
        return (-float(spec.horizon), 0.0)
    return None
