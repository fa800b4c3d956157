"""
Synthetic multi-step MDP and the constant-reward test environment

Five states with deterministic transitions. s3 and s5 absorb. The rewarded
state depends on the horizon T: s2 for T=1, s4 for T=2, s5 for T=3. Reward
is granted on arrival, so every episode returns 0 or 1.
"""

from __future__ import annotations

import numpy as np

from policy_capacity.envs.base import Env, EnvSpec

A1, A2 = 1, 2

STATE_VECTORS: dict[int, tuple[float, float, float]] = {
    1: (1.0, 0.0, 0.0),
    2: (0.0, 1.0, 0.0),
    3: (0.0, 0.0, 1.0),
    4: (1.0, 1.0, 1.0),
    5: (0.0, 0.0, 0.0),
}

# (state, action) -> next state
EDGES: dict[tuple[int, int], int] = {
    (1, A1): 2,
    (1, A2): 3,
    (2, A1): 2,
    (2, A2): 4,
    (3, A1): 3,
    (3, A2): 3,
    (4, A1): 5,
    (4, A2): 4,
    (5, A1): 5,
    (5, A2): 5,
}

REWARDED_STATE = {1: 2, 2: 4, 3: 5}


def synthetic_step(state_id: int, action_id: int, T: int) -> tuple[int, float]:
    """One deterministic transition; actions are 1-based (a1, a2)"""
    next_state = EDGES[(state_id, action_id)]
    reward = 1.0 if next_state == REWARDED_STATE[T] and next_state != state_id else 0.0
    return next_state, reward


class SyntheticEnv(Env):
    """Episodic wrapper around synthetic_step; actions are 0-based indices"""

    def __init__(self, spec: EnvSpec):
        super().__init__(spec)
        self.state_id = 1

    def _reset(self, rng: np.random.Generator) -> np.ndarray:
        self.state_id = 1
        return np.array(STATE_VECTORS[1])

    def _step(self, action) -> tuple[np.ndarray, float, bool]:
        self.state_id, reward = synthetic_step(self.state_id, int(action) + 1, self.horizon)
        return np.array(STATE_VECTORS[self.state_id]), reward, False


class ConstantEnv(Env):
    """Pays the same reward whatever the action; used for degenerate-matrix checks"""

    def _reset(self, rng: np.random.Generator) -> np.ndarray:
        return np.zeros(1)

    def _step(self, action) -> tuple[np.ndarray, float, bool]:
        return np.zeros(1), self.spec.constant_reward, False
