"""Shared fixtures"""

import pytest
from hypothesis import settings

from policy_capacity.envs import EnvSpec

settings.register_profile("default", max_examples=50, deadline=None)
settings.load_profile("default")


@pytest.fixture
def synthetic_spec():
    def make(horizon: int = 3) -> EnvSpec:
        return EnvSpec.make("synthetic", horizon=horizon)

    return make
