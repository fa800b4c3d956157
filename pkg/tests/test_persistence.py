"""On-disk matrix, trace and report formats"""

import json

import numpy as np
import pytest

from policy_capacity.envs import EnvSpec
from policy_capacity.errors import ConfigError
from policy_capacity.evolution import TRACE_COLUMNS, EsConfig, EsTrace
from policy_capacity.infometrics import compute_report
from policy_capacity.persistence import (
    json_digest,
    load_return_matrix,
    read_rows_csv,
    save_return_matrix,
    write_trace_csv,
)
from policy_capacity.policies import PolicySpec
from policy_capacity.rollout import SamplingPlan, collect_returns


@pytest.fixture
def cartpole_matrix():
    return collect_returns(EnvSpec.make("cartpole"), PolicySpec.mlp((4,)), SamplingPlan(4, 3, 1))


def test_matrix_reload_is_bit_exact(tmp_path, cartpole_matrix):
    path = save_return_matrix(cartpole_matrix, tmp_path / "run", save_params=True)
    assert path.name == "run.csv"
    assert (tmp_path / "run.json").exists()
    assert (tmp_path / "run.params.csv").exists()

    loaded = load_return_matrix(path)
    assert loaded.digest() == cartpole_matrix.digest()
    assert loaded.env_spec == cartpole_matrix.env_spec
    assert loaded.policy_specs == cartpole_matrix.policy_specs
    assert loaded.plan == cartpole_matrix.plan
    np.testing.assert_array_equal(loaded.params, cartpole_matrix.params)


def test_metrics_recompute_identically_from_disk(tmp_path, synthetic_spec):
    m = collect_returns(synthetic_spec(3), PolicySpec.tabular_sigmoid(), SamplingPlan(10, 6, 0))
    loaded = load_return_matrix(save_return_matrix(m, tmp_path / "m.csv"))
    assert compute_report(loaded, bins=64).to_dict() == compute_report(m, bins=64).to_dict()


def test_long_format_header(tmp_path, cartpole_matrix):
    path = save_return_matrix(cartpole_matrix, tmp_path / "run")
    rows = read_rows_csv(path)
    assert list(rows[0]) == ["particle", "episode", "return"]
    assert len(rows) == 12


def test_missing_sidecar(tmp_path, cartpole_matrix):
    path = save_return_matrix(cartpole_matrix, tmp_path / "run")
    (tmp_path / "run.json").unlink()
    with pytest.raises(ConfigError):
        load_return_matrix(path)


def test_missing_matrix(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_return_matrix(tmp_path / "absent.csv")


def test_truncated_matrix(tmp_path, cartpole_matrix):
    path = save_return_matrix(cartpole_matrix, tmp_path / "run")
    lines = path.read_text().splitlines()
    path.write_text("\n".join(lines[:-1]) + "\n")
    with pytest.raises(ConfigError):
        load_return_matrix(path)


def test_sidecar_records_extrema(tmp_path, cartpole_matrix):
    save_return_matrix(cartpole_matrix, tmp_path / "run")
    meta = json.loads((tmp_path / "run.json").read_text())
    assert meta["r_min"] == cartpole_matrix.r_min
    assert meta["r_max"] == cartpole_matrix.r_max
    assert meta["env_spec"]["env_id"] == "cartpole"


def test_empty_trace_writes_header_only(tmp_path):
    path = write_trace_csv(EsTrace(EsConfig(epochs=0), "synthetic(T=3)"), tmp_path / "t.csv")
    assert path.read_text().strip() == ",".join(TRACE_COLUMNS)


def test_json_digest_ignores_key_order():
    assert json_digest({"a": 1, "b": [1, 2]}) == json_digest({"b": [1, 2], "a": 1})
    assert json_digest({"a": 1}) != json_digest({"a": 2})
