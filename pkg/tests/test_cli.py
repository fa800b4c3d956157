"""policy-capacity command line"""

import json

import pytest
import yaml

from policy_capacity.cli import EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME, build_parser, main
from policy_capacity.persistence import read_rows_csv


def run(tmp_path, *argv):
    return main([*argv, "--out", str(tmp_path), "--log-level", "WARNING"])


def write_config(tmp_path, data, name="run.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(data))
    return str(path)


TINY_SYNTHETIC = ("--env", "synthetic", "--horizon", "2", "--n", "20", "--m", "10", "--bins", "64")


def test_global_flags_before_the_subcommand(tmp_path):
    args = build_parser().parse_args(["--workers", "3", "estimate", "--n", "4"])
    assert args.workers == 3
    args = build_parser().parse_args(["estimate", "--workers", "2"])
    assert args.workers == 2


def test_estimate_writes_matrix_and_report(tmp_path, capsys):
    assert run(tmp_path, "estimate", *TINY_SYNTHETIC, "--stem", "t") == EXIT_OK
    for name in ("t.matrix.csv", "t.matrix.json", "t.report.json"):
        assert (tmp_path / name).exists()
    report = json.loads((tmp_path / "t.report.json").read_text())
    assert report["n"] == 20 and report["m"] == 10 and report["bins"] == 64
    assert "config_digest" in report["provenance"]
    assert capsys.readouterr().out.startswith("synthetic(T=2): pic=")


def test_constant_env_gives_zero_metrics(tmp_path):
    argv = ("--env", "constant", "--horizon", "3", "--n", "5", "--m", "4", "--bins", "8", "--stem", "c")
    assert run(tmp_path, "estimate", *argv) == EXIT_OK
    report = json.loads((tmp_path / "c.report.json").read_text())
    assert report["pic"] == report["poic"] == report["normalized_variance"] == 0.0


def test_missing_env_section(tmp_path, capsys):
    assert run(tmp_path, "estimate", "--n", "5", "--m", "2") == EXIT_CONFIG
    assert "env" in capsys.readouterr().err


def test_missing_config_file(tmp_path):
    assert run(tmp_path, "estimate", "--config", str(tmp_path / "absent.yaml")) == EXIT_CONFIG


def test_malformed_config_file(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("env: [unclosed\n")
    assert run(tmp_path, "estimate", "--config", str(path)) == EXIT_CONFIG


def test_bins_not_above_episodes(tmp_path, capsys):
    argv = ("--env", "synthetic", "--horizon", "1", "--n", "4", "--m", "10", "--bins", "10")
    assert run(tmp_path, "estimate", *argv) == EXIT_CONFIG
    assert "--lenient-bins" in capsys.readouterr().err
    assert run(tmp_path, "estimate", *argv, "--lenient-bins") == EXIT_OK


def test_runtime_failure_exit_code(tmp_path, capsys):
    # a constant matrix has no score range
    argv = ("--env", "constant", "--horizon", "2", "--n", "3", "--m", "2")
    assert run(tmp_path, "score", *argv) == EXIT_RUNTIME
    assert "EstimationError" in capsys.readouterr().err


def test_reruns_are_byte_identical_across_workers(tmp_path):
    one, two, eight = tmp_path / "one", tmp_path / "two", tmp_path / "eight"
    again = tmp_path / "again"
    argv = ("estimate", *TINY_SYNTHETIC, "--seed", "5")
    assert main([*argv, "--workers", "1", "--out", str(one)]) == EXIT_OK
    assert main([*argv, "--workers", "2", "--out", str(two)]) == EXIT_OK
    assert main([*argv, "--workers", "8", "--out", str(eight)]) == EXIT_OK
    assert main([*argv, "--workers", "1", "--out", str(again)]) == EXIT_OK

    matrix = (one / "run.matrix.csv").read_bytes()
    assert (two / "run.matrix.csv").read_bytes() == matrix
    assert (eight / "run.matrix.csv").read_bytes() == matrix
    a = json.loads((one / "run.report.json").read_text())
    b = json.loads((two / "run.report.json").read_text())
    assert (a["pic"], a["poic"], a["eta_star"]) == (b["pic"], b["poic"], b["eta_star"])
    e = json.loads((eight / "run.report.json").read_text())
    assert (a["pic"], a["poic"], a["eta_star"]) == (e["pic"], e["poic"], e["eta_star"])
    assert (one / "run.matrix.json").read_bytes() == (again / "run.matrix.json").read_bytes()
    # the digest differs with --out; everything else matches
    a.pop("provenance")
    c = json.loads((again / "run.report.json").read_text())
    c.pop("provenance")
    assert a == c


def test_single_policy_sweep_matches_estimate(tmp_path):
    assert run(tmp_path, "estimate", *TINY_SYNTHETIC, "--stem", "e") == EXIT_OK
    assert run(tmp_path, "sweep", *TINY_SYNTHETIC, "--stem", "s") == EXIT_OK
    assert (tmp_path / "e.matrix.csv").read_bytes() == (tmp_path / "s.matrix.csv").read_bytes()
    report = json.loads((tmp_path / "e.report.json").read_text())
    pooled = json.loads((tmp_path / "s.sweep.json").read_text())["pooled"]
    assert (pooled["pic"], pooled["poic"]) == (report["pic"], report["poic"])


def test_sweep_over_a_small_bag(tmp_path):
    cfg = write_config(
        tmp_path,
        {
            "env": {"env_id": "cartpole"},
            "plan": {"n": 3, "m": 2, "seed": 0},
            "bag": {"hidden_layers": [[], [4]], "priors": ["gaussian", "uniform"], "biases": [True]},
            "metrics": {"bins": 16},
        },
    )
    assert run(tmp_path, "sweep", "--config", cfg) == EXIT_OK
    out = json.loads((tmp_path / "run.sweep.json").read_text())
    assert out["pooled"]["n"] == 12
    assert set(out["per_prior"]) == {"gaussian(0,1)", "uniform"}
    assert len(out["per_spec"]) == 4
    assert out["channel_capacity"]["pic"] >= max(r["pic"] for r in out["per_prior"].values())


def test_noise_sweep_single_cell(tmp_path):
    cfg = write_config(
        tmp_path,
        {
            "env": {"env_id": "cartpole"},
            "plan": {"n": 3, "m": 2, "seed": 0},
            "noise": {"u_init": [0.05], "u_dyn": [0.0, 0.01]},
            "metrics": {"bins": 16},
        },
    )
    assert run(tmp_path, "noise-sweep", "--config", cfg) == EXIT_OK
    rows = read_rows_csv(tmp_path / "run.noise.csv")
    assert [(r["u_init"], r["u_dyn"]) for r in rows] == [("0.05", "0.0"), ("0.05", "0.01")]


def test_noise_sweep_needs_cartpole(tmp_path):
    assert run(tmp_path, "noise-sweep", "--env", "acrobot", "--n", "3", "--m", "2") == EXIT_CONFIG


def test_shaping_sweep_two_variants(tmp_path):
    cfg = write_config(
        tmp_path,
        {
            "plan": {"n": 3, "m": 2, "seed": 0},
            "shaping": {"variants": [{"family": "l1", "alpha": 1.0}, {"family": "sparse", "eps": 0.5}]},
            "metrics": {"bins": 16},
        },
    )
    assert run(tmp_path, "shaping-sweep", "--config", cfg) == EXIT_OK
    rows = read_rows_csv(tmp_path / "run.shaping.csv")
    assert [r["family"] for r in rows] == ["l1", "sparse"]


def test_train_es_zero_epochs(tmp_path):
    cfg = write_config(
        tmp_path,
        {
            "env": {"env_id": "synthetic", "horizon": 3},
            "policy": {"kind": "tabular_sigmoid"},
            "es": {"sigma": 1.0, "population": 4, "episodes_per_particle": 4, "epochs": 5},
        },
    )
    assert run(tmp_path, "train-es", "--config", cfg, "--epochs", "0") == EXIT_OK
    trace = tmp_path / "run.mu0_0.trace.csv"
    assert len(trace.read_text().strip().splitlines()) == 1
    summary = json.loads((tmp_path / "run.es.json").read_text())
    assert summary["runs"]["0"]["epochs_to_threshold"] is None


def test_train_es_mu0_sweep(tmp_path):
    cfg = write_config(
        tmp_path,
        {
            "env": {"env_id": "synthetic", "horizon": 1},
            "policy": {"kind": "tabular_sigmoid"},
            "es": {"sigma": 1.0, "population": 4, "episodes_per_particle": 4, "epochs": 2, "bins": 16,
                   "mu0_sweep": [-5, 0]},
        },
    )
    assert run(tmp_path, "train-es", "--config", cfg) == EXIT_OK
    for label in ("-5", "0"):
        rows = read_rows_csv(tmp_path / f"run.mu0_{label}.trace.csv")
        assert [r["epoch"] for r in rows] == ["0", "1"]


def test_train_es_needs_es_section(tmp_path):
    assert run(tmp_path, "train-es", "--env", "synthetic", "--horizon", "1") == EXIT_CONFIG


def test_correlate_shipped_table(tmp_path, capsys):
    assert run(tmp_path, "correlate", "--target", "score_a") == EXIT_OK
    assert "poic vs score_a: R=0.807" in capsys.readouterr().out
    out = json.loads((tmp_path / "run.correlation.json").read_text())
    assert out["score_a"]["poic"]["n"] == 13


def test_correlate_without_outliers(tmp_path, capsys):
    assert run(tmp_path, "correlate", "--target", "score_a", "--drop-poic-outliers") == EXIT_OK
    assert "poic vs score_a: R=0.780" in capsys.readouterr().out


def test_correlate_unknown_exclusion(tmp_path):
    assert run(tmp_path, "correlate", "--exclude", "Atari") == EXIT_CONFIG


def test_prop1_equal_means(tmp_path, capsys):
    argv = ("--mu1", "0", "--mu2", "0", "--trials", "1000")
    assert run(tmp_path, "prop1", *argv) == EXIT_OK
    assert capsys.readouterr().out.startswith("bound=1.000000")
    out = json.loads((tmp_path / "run.prop1.json").read_text())
    assert out["bound"] == 1.0 and out["holds"]


def test_prop1_worked_case(tmp_path):
    assert run(tmp_path, "prop1", "--trials", "20000") == EXIT_OK
    out = json.loads((tmp_path / "run.prop1.json").read_text())
    assert out["bound"] == pytest.approx(0.2865, abs=1e-4)
    assert out["holds"]


def test_envs_lists_every_task(capsys):
    assert main(["envs"]) == EXIT_OK
    ids = {row["env_id"] for row in json.loads(capsys.readouterr().out)}
    assert {"synthetic", "constant", "cartpole", "pendulum", "acrobot", "pointmaze"} <= ids


def test_plot_correlation(tmp_path):
    pytest.importorskip("matplotlib")
    assert run(tmp_path, "plot", "correlation") == EXIT_OK
    svg = tmp_path / "run.poic_vs_score_a.svg"
    first = svg.read_bytes()
    assert run(tmp_path, "plot", "correlation") == EXIT_OK
    assert svg.read_bytes() == first


def test_channel_capacity_is_the_best_single_architecture(tmp_path):
    cfg = write_config(
        tmp_path,
        {
            "env": {"env_id": "cartpole"},
            "plan": {"n": 20, "m": 4, "seed": 0},
            "bag": {
                "hidden_layers": [[], [4], [32], [4, 4], [32, 32], [64]],
                "priors": ["gaussian"],
                "biases": [True],
            },
            "metrics": {"bins": 1000},
        },
    )
    assert run(tmp_path, "sweep", "--config", cfg) == EXIT_OK
    out = json.loads((tmp_path / "run.sweep.json").read_text())
    per_spec = out["per_spec"]
    cc = out["channel_capacity"]
    assert len(per_spec) == 6
    assert cc["poic"] == max(r["poic"] for r in per_spec.values())
    assert cc["pic"] == max(r["pic"] for r in per_spec.values())
    assert cc["poic"] == per_spec[cc["poic_policy"]]["poic"]


def test_pointmaze_needs_a_reward_family(tmp_path, capsys):
    argv = ("--env", "pointmaze", "--n", "3", "--m", "2", "--bins", "16")
    assert run(tmp_path, "estimate", *argv) == EXIT_CONFIG
    assert "--reward" in capsys.readouterr().err
    assert run(tmp_path, "estimate", *argv, "--reward", "sparse:eps=0.5", "--stem", "p") == EXIT_OK
    report = json.loads((tmp_path / "p.report.json").read_text())
    assert report["provenance"]["env_spec"]["reward"] == {"family": "sparse", "eps": 0.5}


def test_reward_flag_is_validated(tmp_path):
    tiny = ("--n", "3", "--m", "2", "--bins", "16")
    assert run(tmp_path, "estimate", "--env", "cartpole", "--reward", "l1", *tiny) == EXIT_CONFIG
    assert run(tmp_path, "estimate", "--env", "pointmaze", "--reward", "l1:alpha", *tiny) == EXIT_CONFIG
    assert run(tmp_path, "estimate", "--env", "pointmaze", "--reward", "cubic", *tiny) == EXIT_CONFIG
