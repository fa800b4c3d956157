"""Policy parameter layout, priors and action readout"""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from policy_capacity.envs import ActionSpace, EnvSpec
from policy_capacity.errors import ConfigError, SpecMismatchError
from policy_capacity.policies import (
    BAG_HIDDEN_LAYERS,
    ArchitectureSpec,
    PolicySpec,
    PriorSpec,
    act,
    architecture_bag,
    build_policy,
    check_compatible,
    param_count,
    sample_params,
    unflatten,
)

DISCRETE = ActionSpace.discrete(2)
BOX = ActionSpace.continuous([-2.0], [2.0])


def test_param_count_with_and_without_bias():
    assert param_count(ArchitectureSpec(()), 4, DISCRETE) == 4 * 2 + 2
    assert param_count(ArchitectureSpec((), use_bias=False), 4, DISCRETE) == 8
    assert param_count(ArchitectureSpec((32, 32)), 4, DISCRETE) == (4 * 32 + 32) + (32 * 32 + 32) + (32 * 2 + 2)


def test_unflatten_layout_is_weights_then_bias():
    arch = ArchitectureSpec((3,))
    theta = np.arange(param_count(arch, 2, DISCRETE), dtype=float)
    (w1, b1), (w2, b2) = unflatten(theta, arch, 2, DISCRETE)
    assert w1.shape == (2, 3) and w1[0, 0] == 0 and w1[1, 2] == 5
    np.testing.assert_array_equal(b1, [6, 7, 8])
    assert w2.shape == (3, 2) and w2[0, 0] == 9
    np.testing.assert_array_equal(b2, [15, 16])


def test_unflatten_rejects_wrong_length():
    with pytest.raises(SpecMismatchError):
        unflatten(np.zeros(5), ArchitectureSpec(()), 4, DISCRETE)


def test_linear_policy_picks_argmax():
    spec = PolicySpec.mlp(())
    # W = [[1, 0], [0, 1]], b = [0, 0.5]
    theta = np.array([1.0, 0.0, 0.0, 1.0, 0.0, 0.5])
    assert act(spec, theta, np.array([2.0, 0.0]), DISCRETE) == 0
    assert act(spec, theta, np.array([0.0, 0.0]), DISCRETE) == 1


def test_argmax_ties_go_to_first_action():
    spec = PolicySpec.mlp((), use_bias=False)
    assert act(spec, np.zeros(4), np.array([1.0, 1.0]), DISCRETE) == 0


@given(st.lists(st.floats(-50, 50), min_size=6, max_size=6), st.floats(-10, 10), st.floats(-10, 10))
def test_continuous_actions_stay_in_bounds(theta, s0, s1):
    spec = PolicySpec.mlp((2,), use_bias=False)
    theta = np.asarray(theta)
    a = act(spec, theta, np.array([s0, s1]), BOX)
    assert a.shape == (1,)
    assert -2.0 <= a[0] <= 2.0


def test_state_dim_mismatch():
    policy = build_policy(PolicySpec.mlp(()), np.zeros(10), 4, DISCRETE)
    with pytest.raises(SpecMismatchError):
        policy.act(np.zeros(3))


def test_sigmoid_policy_follows_probability():
    spec = PolicySpec.tabular_sigmoid()
    theta = np.array([50.0, -50.0, 0.0])
    rng = np.random.default_rng(0)
    assert act(spec, theta, np.array([1.0, 0.0, 0.0]), DISCRETE, rng) == 0
    assert act(spec, theta, np.array([0.0, 1.0, 0.0]), DISCRETE, rng) == 1
    draws = [act(spec, theta, np.array([0.0, 0.0, 1.0]), DISCRETE, rng) for _ in range(2000)]
    assert 0.45 < 1 - np.mean(draws) < 0.55


def test_sigmoid_policy_needs_rng():
    with pytest.raises(SpecMismatchError):
        act(PolicySpec.tabular_sigmoid(), np.zeros(3), np.ones(3), DISCRETE)


def test_gaussian_prior_moments():
    spec = PolicySpec.tabular_sigmoid(mu=-5.0, sigma=0.5)
    rng = np.random.default_rng(0)
    draws = np.stack([sample_params(spec, rng, 3, DISCRETE) for _ in range(4000)])
    assert draws.mean() == pytest.approx(-5.0, abs=0.03)
    assert draws.std() == pytest.approx(0.5, abs=0.03)


def test_uniform_prior_support():
    spec = PolicySpec.mlp((4,), prior=PriorSpec("uniform"))
    theta = sample_params(spec, np.random.default_rng(1), 4, DISCRETE)
    assert np.all(np.abs(theta) <= 1.0)


def test_xavier_uniform_respects_layer_limits():
    spec = PolicySpec.mlp((64,), prior=PriorSpec("xavier_uniform"))
    theta = sample_params(spec, np.random.default_rng(2), 4, DISCRETE)
    (w1, b1), (w2, b2) = unflatten(theta, spec.arch, 4, DISCRETE)
    limit1 = np.sqrt(6.0 / (4 + 64))
    limit2 = np.sqrt(6.0 / (64 + 2))
    assert np.all(np.abs(w1) <= limit1) and np.all(np.abs(b1) <= limit1)
    assert np.all(np.abs(w2) <= limit2) and np.all(np.abs(b2) <= limit2)


def test_xavier_normal_variance_follows_fan_in_and_out():
    # 4 inputs, 2 outputs: variance 2 / (4 + 2)
    spec = PolicySpec.mlp((), use_bias=False, prior=PriorSpec("xavier_normal"))
    rng = np.random.default_rng(3)
    draws = np.stack([sample_params(spec, rng, 4, DISCRETE) for _ in range(5000)])
    assert draws.shape == (5000, 8)
    assert draws.mean() == pytest.approx(0.0, abs=0.01)
    assert draws.var() == pytest.approx(1.0 / 3.0, abs=0.01)


def test_vector_prior_mean_length_checked():
    env = EnvSpec.make("cartpole")
    spec = PolicySpec.mlp((), prior=PriorSpec("gaussian", mu=(0.0, 1.0)))
    with pytest.raises(SpecMismatchError):
        check_compatible(env, spec)


def test_sigmoid_policy_only_drives_synthetic():
    with pytest.raises(SpecMismatchError):
        check_compatible(EnvSpec.make("cartpole"), PolicySpec.tabular_sigmoid())


def test_spec_validation():
    with pytest.raises(ConfigError):
        PriorSpec("laplace")
    with pytest.raises(ConfigError):
        PolicySpec(kind="tabular_sigmoid", prior=PriorSpec("uniform"))
    with pytest.raises(ConfigError):
        ArchitectureSpec((0,))


def test_default_bag_is_56_distinct_specs():
    bag = architecture_bag()
    assert len(bag) == len(BAG_HIDDEN_LAYERS) * 4 * 2 == 56
    assert len({spec.label() for spec in bag}) == 56


def test_bag_subset():
    bag = architecture_bag([(4,)], [PriorSpec("uniform")], [False])
    assert [spec.label() for spec in bag] == ["mlp[4]-nobias-uniform"]


def test_policy_spec_from_dict_accepts_prior_name():
    spec = PolicySpec.from_dict({"hidden_layers": [32, 32], "use_bias": False, "prior": "xavier_normal"})
    assert spec == PolicySpec.mlp((32, 32), False, PriorSpec("xavier_normal"))


quarters = st.integers(-20, 20).map(lambda k: k / 4.0)


@given(
    st.lists(quarters, min_size=21, max_size=21),
    st.lists(quarters, min_size=2, max_size=2),
    st.sampled_from([0.25, 0.5, 2.0, 8.0]),
)
def test_argmax_readout_ignores_positive_output_scale(theta, state, scale):
    spec = PolicySpec.mlp((3,))
    three = ActionSpace.discrete(3)
    theta = np.array(theta)
    scaled = theta.copy()
    # the output layer is the last 3 * 3 weights and 3 biases
    scaled[-12:] *= scale
    s = np.array(state)
    assert act(spec, scaled, s, three) == act(spec, theta, s, three)
