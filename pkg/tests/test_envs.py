"""Environment dynamics, reward families and spec validation"""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from policy_capacity.envs import (
    ActionSpace,
    EnvSpec,
    MazeLayout,
    NoiseConfig,
    RewardFamily,
    available_envs,
    make_env,
    return_bounds,
    shaped_reward,
    standard_sweep,
    synthetic_step,
)
from policy_capacity.errors import ConfigError, PolicyCapacityError, SpecMismatchError


def rollout(spec: EnvSpec, action, seed: int = 0) -> tuple[float, int]:
    env = make_env(spec)
    env.reset(seed)
    total, steps = 0.0, 0
    while True:
        t = env.step(action)
        total += t.reward
        steps += 1
        if t.done:
            return total, steps


# ===== SYNTHETIC =====


def test_synthetic_rewarded_path_per_horizon():
    assert synthetic_step(1, 1, 1) == (2, 1.0)
    assert synthetic_step(1, 2, 1) == (3, 0.0)

    assert synthetic_step(1, 1, 2) == (2, 0.0)
    assert synthetic_step(2, 2, 2) == (4, 1.0)

    assert synthetic_step(2, 2, 3) == (4, 0.0)
    assert synthetic_step(4, 1, 3) == (5, 1.0)


def test_synthetic_absorbing_states_pay_nothing():
    assert synthetic_step(5, 1, 3) == (5, 0.0)
    assert synthetic_step(3, 2, 3) == (3, 0.0)
    # staying in the rewarded state is not an arrival
    assert synthetic_step(2, 1, 1) == (2, 0.0)


@pytest.mark.parametrize("horizon, actions", [(1, [0]), (2, [0, 1]), (3, [0, 1, 0])])
def test_synthetic_env_optimal_sequence_returns_one(synthetic_spec, horizon, actions):
    env = make_env(synthetic_spec(horizon))
    env.reset(0)
    total = 0.0
    for a in actions:
        t = env.step(a)
        total += t.reward
    assert total == 1.0
    assert t.done


@given(st.lists(st.integers(0, 1), min_size=3, max_size=3))
def test_synthetic_returns_are_binary(actions):
    env = make_env(EnvSpec.make("synthetic", horizon=3))
    env.reset(0)
    total = sum(env.step(a).reward for a in actions)
    assert total in (0.0, 1.0)


def test_synthetic_horizon_is_validated():
    with pytest.raises(ConfigError):
        EnvSpec.make("synthetic", horizon=4)


# ===== EPISODE PROTOCOL =====


def test_step_after_done_raises(synthetic_spec):
    env = make_env(synthetic_spec(1))
    env.reset(0)
    assert env.step(0).done
    with pytest.raises(PolicyCapacityError):
        env.step(0)


def test_constant_env_pays_per_step():
    spec = EnvSpec.make("constant", horizon=5, constant_reward=2.0)
    assert rollout(spec, 0) == (10.0, 5)
    assert return_bounds(spec) == (10.0, 10.0)


def test_unknown_env_id():
    with pytest.raises(ConfigError):
        EnvSpec.make("humanoid")


def test_option_sections_only_apply_to_their_env():
    with pytest.raises(ConfigError):
        EnvSpec.make("pendulum", noise=NoiseConfig())
    with pytest.raises(ConfigError):
        EnvSpec.make("cartpole", reward=RewardFamily("l2"))
    with pytest.raises(ConfigError):
        EnvSpec.make("pointmaze")


def test_env_spec_from_dict_restores_cartpole_noise():
    spec = EnvSpec.make("cartpole", noise=NoiseConfig(0.1, 0.03))
    assert EnvSpec.from_dict(spec.to_dict()) == spec
    assert spec.label() == "cartpole(u_init=0.1,u_dyn=0.03)"


def test_from_dict_rejects_wrong_dims():
    with pytest.raises(ConfigError):
        EnvSpec.from_dict({"env_id": "cartpole", "state_dim": 5})


def test_available_envs_lists_every_id():
    ids = {row["env_id"] for row in available_envs()}
    assert ids == {
        "synthetic",
        "constant",
        "cartpole",
        "pendulum",
        "mountain_car",
        "mountain_car_continuous",
        "acrobot",
        "pointmaze",
    }


def test_return_bounds():
    assert return_bounds(EnvSpec.make("synthetic", horizon=2)) == (0.0, 1.0)
    assert return_bounds(EnvSpec.make("cartpole")) == (1.0, 200.0)
    assert return_bounds(EnvSpec.make("mountain_car")) == (-200.0, 0.0)
    assert return_bounds(EnvSpec.make("acrobot")) == (-500.0, 0.0)
    assert return_bounds(EnvSpec.make("pendulum")) is None


# ===== CLASSIC CONTROL =====


def test_cartpole_reset_within_init_noise():
    env = make_env(EnvSpec.make("cartpole", noise=NoiseConfig(u_init=0.1)))
    for seed in range(20):
        state = env.reset(seed)
        assert np.all(np.abs(state) <= 0.1)


def test_cartpole_constant_push_fails_early():
    total, steps = rollout(EnvSpec.make("cartpole"), 1)
    assert total == steps
    assert 1 <= steps < 50


def test_cartpole_same_seed_same_trajectory():
    spec = EnvSpec.make("cartpole", noise=NoiseConfig(0.05, 0.1))
    assert rollout(spec, 0, seed=3) == rollout(spec, 0, seed=3)


def test_pendulum_reward_bounded():
    env = make_env(EnvSpec.make("pendulum"))
    env.reset(1)
    worst = -(math.pi**2 + 0.1 * 8.0**2 + 0.001 * 2.0**2)
    for _ in range(200):
        t = env.step(np.array([5.0]))
        assert worst - 1e-9 <= t.reward <= 0.0
    assert t.done


def test_mountain_car_idle_never_reaches_goal():
    assert rollout(EnvSpec.make("mountain_car"), 1) == (-200.0, 200)


def test_mountain_car_continuous_charges_action_cost():
    env = make_env(EnvSpec.make("mountain_car_continuous"))
    env.reset(0)
    assert env.step(np.array([0.5])).reward == pytest.approx(-0.025)


def test_acrobot_without_torque_hangs():
    assert rollout(EnvSpec.make("acrobot"), 1) == (-500.0, 500)


# ===== POINTMAZE =====


def test_maze_geometry():
    layout = MazeLayout()
    assert layout.start == (1.5, 1.5)
    assert layout.goal == (1.5, 3.5)
    assert layout.is_wall(0.5, 1.5)
    assert layout.is_wall(1.5, 2.5)
    assert not layout.is_wall(3.5, 2.5)
    assert layout.is_wall(-0.1, 1.5)


def test_maze_layout_validation():
    with pytest.raises(ConfigError):
        MazeLayout(rows=("###", "#S#", "###"))


@pytest.mark.parametrize("action, axis, bound", [((-1.0, 0.0), 0, 1.0), ((0.0, 1.0), 1, 2.0)])
def test_pointmaze_walls_stop_motion(action, axis, bound):
    env = make_env(EnvSpec.make("pointmaze", reward=RewardFamily("l2")))
    env.reset(0)
    for _ in range(150):
        state = env.step(np.array(action)).next_state
        if axis == 0:
            assert state[0] >= bound
        else:
            assert state[1] < bound


def test_pointmaze_reward_matches_family():
    family = RewardFamily("l2", alpha=2.0)
    env = make_env(EnvSpec.make("pointmaze", reward=family))
    env.reset(0)
    t = env.step(np.array([0.3, -0.2]))
    assert t.reward == pytest.approx(shaped_reward(family, t.next_state[:2], (1.5, 3.5)))


# ===== REWARD FAMILIES =====


def test_shaped_reward_values():
    assert shaped_reward(RewardFamily("l2", alpha=1.0), (0, 0), (3, 4)) == pytest.approx(-5.0)
    assert shaped_reward(RewardFamily("l1", alpha=0.5), (0, 0), (3, 4)) == pytest.approx(-3.5)
    assert shaped_reward(RewardFamily("fraction", beta=0.1, gamma=0.1), (3, 4), (3, 4)) == pytest.approx(1.0)
    assert shaped_reward(RewardFamily("sparse", eps=0.5), (0, 0), (3, 4)) == -1.0
    assert shaped_reward(RewardFamily("sparse", eps=0.5), (3, 4), (3, 4)) == 0.0


def test_shaped_reward_dimension_mismatch():
    with pytest.raises(SpecMismatchError):
        shaped_reward(RewardFamily("l2"), (0, 0), (1, 2, 3))


def test_reward_family_validation():
    with pytest.raises(ConfigError):
        RewardFamily("l2", alpha=0.0)
    with pytest.raises(ConfigError):
        RewardFamily("cosine")


def test_standard_sweep_has_four_variants_per_family():
    variants = standard_sweep()
    assert len(variants) == 16
    assert len({v.label() for v in variants}) == 16
    for family in ("l1", "l2", "fraction", "sparse"):
        assert sum(v.family == family for v in variants) == 4


# ===== ACTION SPACES =====


def test_action_space_contains():
    d = ActionSpace.discrete(3)
    assert d.contains(2) and not d.contains(3)
    c = ActionSpace.continuous([-1, -1], [1, 1])
    assert c.dim == 2
    assert c.contains(np.array([0.5, -1.0]))
    assert not c.contains(np.array([1.5, 0.0]))


def test_action_space_rejects_empty_box():
    with pytest.raises(SpecMismatchError):
        ActionSpace.continuous([1.0], [1.0])


def test_reward_family_parse():
    assert RewardFamily.parse("sparse:eps=0.1") == RewardFamily("sparse", eps=0.1)
    assert RewardFamily.parse("fraction:beta=0.05,gamma=0.1") == RewardFamily("fraction", beta=0.05, gamma=0.1)
    assert RewardFamily.parse("L2") == RewardFamily("l2")
    for bad in ("l1:alpha", "l1:delta=1", "l1:alpha=x", "cubic", "l2:alpha=0"):
        with pytest.raises(ConfigError):
            RewardFamily.parse(bad)
