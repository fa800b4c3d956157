"""Pearson correlation and metric-table ingestion"""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats as scipy_stats
from scipy.integrate import quad

from policy_capacity.errors import ConfigError, EstimationError
from policy_capacity.stats import (
    POIC_OUTLIERS,
    correlate_all,
    correlation_matrix_json,
    fixture_path,
    ingest_table,
    pearson,
)


def test_perfect_correlation():
    res = pearson([1, 2, 3, 4], [2, 4, 6, 8])
    assert res.r == pytest.approx(1.0)
    assert res.p_value == pytest.approx(0.0, abs=1e-12)
    assert res.n == 4


def test_matches_scipy():
    rng = np.random.default_rng(3)
    x = rng.normal(size=15)
    y = 0.4 * x + rng.normal(size=15)
    ours = pearson(x, y)
    ref = scipy_stats.pearsonr(x, y)
    assert ours.r == pytest.approx(ref[0], abs=1e-12)
    assert ours.p_value == pytest.approx(ref[1], rel=1e-9)



def student_t_two_sided(t: float, df: int) -> float:
    """Two-sided tail mass of Student's t, integrated numerically"""
    log_norm = math.lgamma((df + 1) / 2) - math.lgamma(df / 2) - 0.5 * math.log(df * math.pi)

    def density(u: float) -> float:
        return math.exp(log_norm - (df + 1) / 2 * math.log1p(u * u / df))

    tail, _ = quad(density, abs(t), math.inf, epsabs=1e-12, epsrel=1e-12)
    return 2.0 * tail


@pytest.mark.parametrize("n, seed", [(4, 0), (6, 1), (12, 2), (30, 3), (80, 4)])
def test_p_value_matches_integrated_t_density(n, seed):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=n)
    y = 0.3 * x + rng.normal(size=n)
    res = pearson(x, y)
    df = n - 2
    t = res.r * math.sqrt(df / (1.0 - res.r**2))
    assert res.p_value == pytest.approx(student_t_two_sided(t, df), abs=1e-6)


@given(
    st.lists(st.integers(-1000, 1000), min_size=3, max_size=20),
    st.randoms(use_true_random=False),
)
def test_pearson_is_symmetric(xs, random):
    ys = list(xs)
    random.shuffle(ys)
    ys = [y + i for i, y in enumerate(ys)]
    try:
        forward = pearson(xs, ys)
    except EstimationError:
        return
    assert pearson(ys, xs) == forward


@given(
    st.lists(st.integers(-100, 100), min_size=5, max_size=5, unique=True),
    st.floats(0.5, 20),
    st.floats(-100, 100),
)
def test_correlation_is_affine_invariant(xs, scale, shift):
    ys = [x**2 + i for i, x in enumerate(xs)]
    base = pearson(xs, ys)
    moved = pearson([scale * x + shift for x in xs], ys)
    assert moved.r == pytest.approx(base.r, abs=1e-9)


def test_pearson_preconditions():
    with pytest.raises(EstimationError):
        pearson([1, 2], [3, 4])
    with pytest.raises(EstimationError):
        pearson([1, 1, 1], [1, 2, 3])
    with pytest.raises(EstimationError):
        pearson([1, 2, 3], [1, 2])


def test_published_table_correlations():
    table = ingest_table(fixture_path("table5"))
    assert len(table.rows) == 13
    results = correlate_all(table)["score_a"]
    assert results["poic"].r == pytest.approx(0.807, abs=1e-3)
    assert results["poic"].p_value <= 0.01
    assert results["variance"].r == pytest.approx(0.372, abs=1e-3)
    assert results["h_r"].r == pytest.approx(-0.349, abs=1e-3)


def test_published_table_without_outliers():
    table = ingest_table(fixture_path("table5"))
    results = correlate_all(table, ["score_a"], exclude=POIC_OUTLIERS)
    assert results["score_a"]["poic"].r == pytest.approx(0.780, abs=1e-3)
    assert results["score_a"]["poic"].n == 10


def test_all_fixtures_load():
    assert "poic" in ingest_table(fixture_path("table18")).columns
    noise = ingest_table(fixture_path("table9"))
    assert len(noise.rows) == 12
    assert set(noise.column("u_init")) == {0.05, 0.1, 0.15}


def test_unknown_fixture():
    with pytest.raises(ConfigError):
        fixture_path("table99")


def test_ingest_rejects_incomplete_rows(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("env,poic,score_a\nA,0.1,0.5\nB,,0.4\n")
    with pytest.raises(ConfigError):
        ingest_table(path)


def test_ingest_rejects_text_cells(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("env,poic,score_a\nA,high,0.5\n")
    with pytest.raises(ConfigError):
        ingest_table(path)


def test_ingest_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        ingest_table(tmp_path / "absent.csv")


def test_exclude_unknown_row():
    table = ingest_table(fixture_path("table5"))
    with pytest.raises(ConfigError):
        table.without(["Atari"])


def test_correlation_matrix_json():
    table = ingest_table(fixture_path("table5"))
    out = correlation_matrix_json(correlate_all(table, ["score_a"]))
    assert set(out) == {"score_a"}
    assert out["score_a"]["poic"]["n"] == 13
    assert "score_a" not in out["score_a"]
