"""
Episodic environment interface and environment specs

An EnvSpec is a pure description; make_env() turns it into an independent
instance with reset(seed) -> state and step(action) -> Transition.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any

import numpy as np

from policy_capacity.envs.layout import MazeLayout
from policy_capacity.envs.rewards import RewardFamily
from policy_capacity.envs.spaces import ActionSpace
from policy_capacity.errors import ConfigError, PolicyCapacityError

SYNTHETIC = "synthetic"
CARTPOLE = "cartpole"
PENDULUM = "pendulum"
MOUNTAIN_CAR = "mountain_car"
MOUNTAIN_CAR_CONTINUOUS = "mountain_car_continuous"
ACROBOT = "acrobot"
POINTMAZE = "pointmaze"
CONSTANT = "constant"

# env_id -> (horizon, state_dim, action space)
ENV_TABLE: dict[str, tuple[int, int, ActionSpace]] = {
    CARTPOLE: (200, 4, ActionSpace.discrete(2)),
    PENDULUM: (200, 3, ActionSpace.continuous([-2.0], [2.0])),
    MOUNTAIN_CAR: (200, 2, ActionSpace.discrete(3)),
    MOUNTAIN_CAR_CONTINUOUS: (999, 2, ActionSpace.continuous([-1.0], [1.0])),
    ACROBOT: (500, 6, ActionSpace.discrete(3)),
    POINTMAZE: (150, 4, ActionSpace.continuous([-1.0, -1.0], [1.0, 1.0])),
}

SYNTHETIC_HORIZONS = (1, 2, 3)


@dataclass(frozen=True)
class NoiseConfig:
    """CartPole noise: reset half-width on all 4 dims, per-step angular-velocity half-width"""

    u_init: float = 0.05
    u_dyn: float = 0.0

    def __post_init__(self) -> None:
        if self.u_init < 0 or self.u_dyn < 0:
            raise ConfigError(f"noise half-widths must be >= 0, got {self.u_init}, {self.u_dyn}")


@dataclass(frozen=True)
class Transition:
    next_state: np.ndarray
    reward: float
    done: bool


@dataclass(frozen=True)
class EnvSpec:
    """Serializable description of one episodic MDP"""

    env_id: str
    horizon: int
    state_dim: int
    action_space: ActionSpace
    noise: NoiseConfig | None = None
    reward: RewardFamily | None = None
    constant_reward: float = 0.0
    maze: MazeLayout | None = None

    def __post_init__(self) -> None:
        if self.horizon < 1:
            raise ConfigError(f"horizon must be >= 1, got {self.horizon}")
        if self.env_id == SYNTHETIC:
            if self.horizon not in SYNTHETIC_HORIZONS:
                raise ConfigError(f"synthetic horizon must be one of {SYNTHETIC_HORIZONS}")
            expected = (3, ActionSpace.discrete(2))
        elif self.env_id == CONSTANT:
            expected = (1, ActionSpace.discrete(2))
        elif self.env_id in ENV_TABLE:
            horizon, state_dim, space = ENV_TABLE[self.env_id]
            if self.horizon != horizon:
                raise ConfigError(f"{self.env_id} horizon is {horizon}, got {self.horizon}")
            expected = (state_dim, space)
        else:
            raise ConfigError(f"Unknown env_id: {self.env_id}")

        if (self.state_dim, self.action_space) != expected:
            raise ConfigError(
                f"{self.env_id} expects state_dim={expected[0]} and {expected[1]}, "
                f"got state_dim={self.state_dim} and {self.action_space}"
            )
        if self.env_id == POINTMAZE and self.reward is None:
            raise ConfigError("pointmaze needs a reward family")
        if self.noise is not None and self.env_id != CARTPOLE:
            raise ConfigError(f"noise injection is only defined for cartpole, not {self.env_id}")
        if self.reward is not None and self.env_id != POINTMAZE:
            raise ConfigError(f"reward families only apply to pointmaze, not {self.env_id}")
        if self.maze is not None and self.env_id != POINTMAZE:
            raise ConfigError(f"a maze layout only applies to pointmaze, not {self.env_id}")

    @classmethod
    def make(cls, env_id: str, **options: Any) -> EnvSpec:
        """Fill horizon/dims from the environment table"""
        env_id = env_id.lower()
        if env_id == SYNTHETIC:
            horizon = int(options.get("horizon", 3))
            return cls(SYNTHETIC, horizon, 3, ActionSpace.discrete(2))
        if env_id == CONSTANT:
            return cls(
                CONSTANT,
                int(options.get("horizon", 1)),
                1,
                ActionSpace.discrete(2),
                constant_reward=float(options.get("constant_reward", 0.0)),
            )
        if env_id not in ENV_TABLE:
            raise ConfigError(f"Unknown env_id: {env_id}")
        horizon, state_dim, space = ENV_TABLE[env_id]
        noise = options.get("noise")
        if env_id == CARTPOLE and noise is None:
            noise = NoiseConfig()
        maze = options.get("maze")
        if env_id == POINTMAZE and maze is None:
            maze = MazeLayout()
        return cls(
            env_id,
            int(options.get("horizon", horizon)),
            state_dim,
            space,
            noise=noise,
            reward=options.get("reward"),
            maze=maze,
        )

    def label(self) -> str:
        if self.env_id == SYNTHETIC:
            return f"synthetic(T={self.horizon})"
        if self.env_id == CARTPOLE and self.noise is not None:
            return f"cartpole(u_init={self.noise.u_init:g},u_dyn={self.noise.u_dyn:g})"
        if self.env_id == POINTMAZE and self.reward is not None:
            return f"pointmaze[{self.reward.label()}]"
        return self.env_id

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "env_id": self.env_id,
            "horizon": self.horizon,
            "state_dim": self.state_dim,
            "action_space": self.action_space.to_dict(),
        }
        if self.noise is not None:
            out["noise"] = {"u_init": self.noise.u_init, "u_dyn": self.noise.u_dyn}
        if self.reward is not None:
            out["reward"] = self.reward.to_dict()
        if self.maze is not None:
            out["maze"] = self.maze.to_dict()
        if self.env_id == CONSTANT:
            out["constant_reward"] = self.constant_reward
        return out

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> EnvSpec:
        """Parse the `env` config section; dims may be omitted"""
        if "env_id" not in data:
            raise ConfigError("env section needs an env_id")
        options = dict(data)
        env_id = str(options.pop("env_id"))
        if isinstance(options.get("noise"), dict):
            options["noise"] = NoiseConfig(**{k: float(v) for k, v in options["noise"].items()})
        if isinstance(options.get("reward"), dict):
            options["reward"] = RewardFamily.from_dict(options["reward"])
        if isinstance(options.get("maze"), dict):
            options["maze"] = MazeLayout.from_dict(options["maze"])
        spec = cls.make(env_id, **options)
        for key in ("state_dim", "action_space"):
            if key in data:
                given = data[key]
                if key == "action_space":
                    given = ActionSpace.from_dict(given)
                if given != getattr(spec, key):
                    raise ConfigError(f"{env_id}: {key} {given} does not match {getattr(spec, key)}")
        return spec


class Env(ABC):
    """Horizon-bounded episodic environment

    Subclasses implement _reset(rng) and _step(action); this class counts
    steps and forces done at the horizon.
    """

    def __init__(self, spec: EnvSpec):
        self.spec = spec
        self.horizon = spec.horizon
        self.state_dim = spec.state_dim
        self.action_space = spec.action_space
        self.rng: np.random.Generator = np.random.default_rng(0)
        self.t = 0
        self.done = True

    def reset(self, seed: int | np.random.Generator | None = None) -> np.ndarray:
        if isinstance(seed, np.random.Generator):
            self.rng = seed
        else:
            self.rng = np.random.default_rng(seed)
        self.t = 0
        self.done = False
        return self._reset(self.rng)

    def step(self, action: Any) -> Transition:
        if self.done:
            raise PolicyCapacityError("step() called on a finished episode; call reset() first")
        state, reward, terminated = self._step(action)
        self.t += 1
        self.done = bool(terminated) or self.t >= self.horizon
        return Transition(next_state=state, reward=float(reward), done=self.done)

    @abstractmethod
    def _reset(self, rng: np.random.Generator) -> np.ndarray:
        ...

    @abstractmethod
    def _step(self, action: Any) -> tuple[np.ndarray, float, bool]:
        ...
