"""
Point-mass maze with shaped goal rewards

Velocity-damped double integrator: v <- damping*v + gain*a*dt, p <- p + v*dt.
A move into a wall cell is undone along that axis and the matching velocity
component is zeroed. The reward is the configured family evaluated on the
(x, y) position against the goal.
"""

from __future__ import annotations

import numpy as np

from policy_capacity.envs.base import Env, EnvSpec
from policy_capacity.envs.layout import MazeLayout
from policy_capacity.envs.rewards import shaped_reward


class Pointmaze(Env):
    def __init__(self, spec: EnvSpec):
        super().__init__(spec)
        self.layout = spec.maze or MazeLayout()
        self.reward_family = spec.reward
        goal = spec.reward.goal if spec.reward is not None and spec.reward.goal else None
        self.goal = np.asarray(goal if goal is not None else self.layout.goal, dtype=np.float64)
        self.pos = np.zeros(2)
        self.vel = np.zeros(2)

    def _obs(self) -> np.ndarray:
        return np.concatenate([self.pos, self.vel])

    def _reset(self, rng: np.random.Generator) -> np.ndarray:
        j = self.layout.start_jitter
        self.pos = np.asarray(self.layout.start) + rng.uniform(-j, j, size=2)
        self.vel = rng.uniform(-j, j, size=2)
        return self._obs()

    def _step(self, action) -> tuple[np.ndarray, float, bool]:
        a = np.clip(np.asarray(action, dtype=np.float64).ravel(), -1.0, 1.0)
        lay = self.layout
        self.vel = lay.damping * self.vel + lay.gain * a * lay.dt

        for axis in (0, 1):
            moved = self.pos.copy()
            moved[axis] += self.vel[axis] * lay.dt
            if lay.is_wall(moved[0], moved[1]):
                self.vel[axis] = 0.0
            else:
                self.pos = moved

        reward = shaped_reward(self.reward_family, self.pos, self.goal)
        return self._obs(), reward, False
