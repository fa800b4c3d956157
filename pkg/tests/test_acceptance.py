"""Desk-scale reproductions of the classic-control, noise and shaping experiments

All slow; run with `pytest -m slow`.
"""

import os

import pytest

from policy_capacity.envs import EnvSpec, NoiseConfig, standard_sweep
from policy_capacity.infometrics import estimate_pic, optimize_temperature
from policy_capacity.policies import PolicySpec, PriorSpec, architecture_bag
from policy_capacity.rollout import SamplingPlan, collect_returns, derive_seed, merge

pytestmark = pytest.mark.slow

WORKERS = os.cpu_count() or 1
SEEDS = range(5)


def pooled_poic(env: EnvSpec, seed: int, n: int = 100, m: int = 16) -> float:
    matrices = [
        collect_returns(env, spec, SamplingPlan(n, m, derive_seed(seed, i)), WORKERS)
        for i, spec in enumerate(architecture_bag())
    ]
    return optimize_temperature(merge(matrices)).poic_star


def test_classic_control_poic_ordering():
    passed = 0
    for seed in SEEDS:
        poic = {
            env_id: pooled_poic(EnvSpec.make(env_id), seed)
            for env_id in ("cartpole", "acrobot", "mountain_car_continuous", "pendulum", "mountain_car")
        }
        easy = min(poic["cartpole"], poic["acrobot"])
        hard = max(poic["mountain_car_continuous"], poic["pendulum"], poic["mountain_car"])
        if easy > hard and poic["mountain_car"] == min(poic.values()):
            passed += 1
    assert passed >= 4


def test_cartpole_poic_falls_with_initial_noise():
    passed = 0
    for seed in SEEDS:
        values = [
            pooled_poic(EnvSpec.make("cartpole", noise=NoiseConfig(u_init, 0.0)), seed)
            for u_init in (0.05, 0.1, 0.15)
        ]
        if values[0] > values[1] > values[2]:
            passed += 1
    assert passed >= 4


def test_shaping_sweep_clusters_by_family():
    policy = PolicySpec.mlp((32, 32), prior=PriorSpec("xavier_normal"))
    plan = SamplingPlan(200, 16, 0)
    pic = {}
    for variant in standard_sweep():
        m = collect_returns(EnvSpec.make("pointmaze", reward=variant), policy, plan, WORKERS)
        pic[variant] = estimate_pic(m, 100_000).pic

    dense = []
    for family in ("l1", "l2"):
        values = [v for k, v in pic.items() if k.family == family]
        assert (max(values) - min(values)) / max(values) < 0.10
        dense += values

    sparse_small = min((k for k in pic if k.family == "sparse"), key=lambda k: k.eps)
    assert pic[sparse_small] < min(dense)
