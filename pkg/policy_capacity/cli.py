"""
policy-capacity command line

Every subcommand reads an optional YAML run file (--config), applies the
command-line flags on top and writes JSON/CSV outputs under --out. Exit codes:
0 on success, 2 on configuration errors, 3 on runtime failures.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path
from typing import Any

import yaml
from loguru import logger

from policy_capacity import __version__
from policy_capacity.config import (
    RunConfig,
    configure_logging,
    load_config,
    with_overrides,
)
from policy_capacity.envs import (
    CARTPOLE,
    POINTMAZE,
    SYNTHETIC,
    EnvSpec,
    NoiseConfig,
    RewardFamily,
    available_envs,
    standard_sweep,
)
from policy_capacity.errors import ConfigError
from policy_capacity.evolution import epochs_to_threshold, train_es
from policy_capacity.infometrics import (
    MetricsReport,
    channel_capacity_table,
    compute_report,
    optimize_temperature,
    verify_prop1,
)
from policy_capacity.persistence import (
    load_return_matrix,
    save_return_matrix,
    write_json,
    write_rows_csv,
    write_trace_csv,
)
from policy_capacity.policies import PolicySpec
from policy_capacity.rollout import ReturnMatrix, SamplingPlan, collect_returns, derive_seed, merge
from policy_capacity.scoring import (
    ScoreInputs,
    bag_results_csv,
    normalized_score,
    random_sampling_score,
    run_bag,
)
from policy_capacity.stats import (
    POIC_OUTLIERS,
    correlate_all,
    correlation_matrix_json,
    fixture_path,
    ingest_table,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

NOISE_COLUMNS = ("env", "u_init", "u_dyn", "pic", "poic", "eta_star", "pic_cc", "poic_cc")
SHAPING_COLUMNS = ("family", "params", "pic", "h_r", "h_r_given_theta", "poic", "eta_star")


# ===== CONFIG RESOLUTION =====


def _flag(args: argparse.Namespace, name: str) -> Any:
    return getattr(args, name, None)


def _pointmaze_reward(cfg: RunConfig, args: argparse.Namespace) -> RewardFamily:
    """--reward, else the file's pointmaze reward; shaping-sweep starts from its first variant"""
    if _flag(args, "reward") is not None:
        return RewardFamily.parse(args.reward)
    if cfg.env is not None and cfg.env.reward is not None:
        return cfg.env.reward
    if args.command == "shaping-sweep":
        return (cfg.shaping or tuple(standard_sweep()))[0]
    raise ConfigError("--env pointmaze needs a reward family: pass --reward (e.g. l2:alpha=1) or set env.reward")


def _check_bins(cfg: RunConfig) -> None:
    """B <= M is a configuration mistake unless bins are lenient"""
    if not cfg.metrics.strict_bins:
        return
    if cfg.plan is not None and cfg.metrics.bins <= cfg.plan.episodes_per_particle:
        raise ConfigError(
            f"bins={cfg.metrics.bins} must exceed M={cfg.plan.episodes_per_particle}; "
            "raise --bins or pass --lenient-bins"
        )
    if cfg.es is not None and cfg.es.bins <= cfg.es.episodes_per_particle:
        raise ConfigError(
            f"es.bins={cfg.es.bins} must exceed es.episodes_per_particle={cfg.es.episodes_per_particle}"
        )


def _apply_flags(cfg: RunConfig, args: argparse.Namespace) -> RunConfig:
    """Layer env/plan/metric flags over the file; recorded in raw for the digest"""
    cli: dict[str, Any] = {}

    env = cfg.env
    env_id, horizon = _flag(args, "env"), _flag(args, "horizon")
    if env_id is not None:
        options: dict[str, Any] = {}
        if horizon is not None:
            options["horizon"] = horizon
        if _flag(args, "constant_reward") is not None:
            options["constant_reward"] = args.constant_reward
        if env_id.lower() == POINTMAZE:
            options["reward"] = _pointmaze_reward(cfg, args)
        elif _flag(args, "reward") is not None:
            raise ConfigError(f"--reward only applies to pointmaze, not {env_id}")
        env = EnvSpec.make(env_id, **options)
        cli.update(env=env_id, horizon=horizon, reward=_flag(args, "reward"))
    else:
        if horizon is not None:
            if env is None:
                raise ConfigError("--horizon needs --env or an env section")
            env = EnvSpec.from_dict({**env.to_dict(), "horizon": horizon})
            cli["horizon"] = horizon
        if _flag(args, "reward") is not None:
            if env is None or env.env_id != POINTMAZE:
                raise ConfigError("--reward only applies to pointmaze")
            env = replace(env, reward=RewardFamily.parse(args.reward))
            cli["reward"] = args.reward

    plan = cfg.plan
    n, m = _flag(args, "n"), _flag(args, "m")
    if n is not None or m is not None:
        if plan is None and (n is None or m is None):
            raise ConfigError("--n and --m are both needed without a plan section")
        seed = _flag(args, "seed")
        plan = SamplingPlan(
            n if n is not None else plan.n_particles,
            m if m is not None else plan.episodes_per_particle,
            seed if seed is not None else (plan.master_seed if plan is not None else 0),
        )
        cli.update(n=n, m=m)

    metrics = cfg.metrics
    for name in ("bins", "eta", "r_max_ref"):
        value = _flag(args, name)
        if value is not None:
            metrics = replace(metrics, **{name: value})
            cli[name] = value
    if _flag(args, "lenient_bins"):
        metrics = replace(metrics, strict_bins=False)
        cli["lenient_bins"] = True
    if metrics.eta is not None and metrics.eta <= 0:
        raise ConfigError(f"--eta must be > 0, got {metrics.eta}")

    output = cfg.output
    if _flag(args, "stem"):
        output = replace(output, stem=args.stem)
    if _flag(args, "save_params"):
        output = replace(output, save_params=True)
    if _flag(args, "svg"):
        output = replace(output, svg=True)

    es = cfg.es
    if es is not None and _flag(args, "epochs") is not None:
        es = replace(es, epochs=args.epochs)
        cli["epochs"] = args.epochs
    if es is not None and _flag(args, "bins") is not None:
        es = replace(es, bins=args.bins)

    raw = dict(cfg.raw)
    cli = {k: v for k, v in cli.items() if v is not None}
    if cli:
        raw["cli"] = cli
    return replace(cfg, env=env, plan=plan, metrics=metrics, output=output, es=es, raw=raw)


def resolve_config(args: argparse.Namespace) -> RunConfig:
    cfg = load_config(args.config)
    cfg = _apply_flags(cfg, args)
    _check_bins(cfg)
    return with_overrides(cfg, workers=args.workers, seed=args.seed, out=args.out)


def _policy(cfg: RunConfig, env: EnvSpec) -> PolicySpec:
    """Configured policy, else the sigmoid table on synthetic and a linear MLP elsewhere"""
    if cfg.policy is not None:
        return cfg.policy
    if env.env_id == SYNTHETIC:
        return PolicySpec.tabular_sigmoid()
    return PolicySpec.mlp()


def _report(m: ReturnMatrix, cfg: RunConfig) -> MetricsReport:
    opts = cfg.metrics
    report = compute_report(m, opts.bins, opts.strict_bins, opts.r_max_ref, opts.eta)
    report.provenance["config_digest"] = cfg.digest
    return report


def _summary(label: str, report: MetricsReport) -> str:
    return (
        f"{label}: pic={report.pic:.6f} poic={report.poic:.6f} "
        f"eta*={report.eta_star:.6g} variance={report.normalized_variance:.6g}"
    )


# ===== SUBCOMMANDS =====


def cmd_estimate(args: argparse.Namespace, cfg: RunConfig) -> int:
    env = cfg.require_env()
    plan = cfg.require_plan()
    m = collect_returns(env, _policy(cfg, env), plan, cfg.workers)
    report = _report(m, cfg)

    save_return_matrix(m, cfg.output.path(".matrix"), cfg.output.save_params)
    write_json(cfg.output.path(".report.json"), report.to_dict())
    if cfg.output.svg and m.r_max > m.r_min:
        from policy_capacity.plotting import plot_poic_curve

        search = optimize_temperature(m, report.r_max_ref)
        points = sorted(search.evaluated)
        plot_poic_curve(
            [eta for eta, _ in points], [v for _, v in points], cfg.output.path(".poic"),
            search.eta_star,
        )
    print(_summary(env.label(), report))
    return EXIT_OK


def sweep_reports(env: EnvSpec, specs: list[PolicySpec], cfg: RunConfig) -> dict[str, Any]:
    """Pooled, per-spec, per-prior-family and channel-capacity reports

    Every bag entry (architecture x prior x bias) is one input distribution,
    so the channel capacity is the maximum over the per-spec reports. The
    per-prior-family reports pool the architectures of one family.

    Each spec gets its own seed derived from the plan seed; a single spec uses
    the plan as given, so a one-spec sweep matches `estimate`.
    """
    plan = cfg.require_plan()
    matrices = []
    per_spec: dict[str, MetricsReport] = {}
    by_prior: dict[str, list[ReturnMatrix]] = {}
    for i, spec in enumerate(specs):
        spec_plan = plan if len(specs) == 1 else plan.with_seed(derive_seed(plan.master_seed, i))
        logger.info("Sweep {}/{}: {}", i + 1, len(specs), spec.label())
        m = collect_returns(env, spec, spec_plan, cfg.workers)
        matrices.append(m)
        per_spec[spec.label()] = _report(m, cfg)
        by_prior.setdefault(spec.prior.label(), []).append(m)

    pooled_matrix = merge(matrices)
    pooled = _report(pooled_matrix, cfg)
    per_prior = {label: _report(merge(ms), cfg) for label, ms in by_prior.items()}
    return {
        "matrix": pooled_matrix,
        "pooled": pooled,
        "per_spec": per_spec,
        "per_prior": per_prior,
        "channel_capacity": channel_capacity_table(list(per_spec.values()), list(per_spec)),
    }


def _sweep_json(result: dict[str, Any], cfg: RunConfig) -> dict[str, Any]:
    return {
        "pooled": result["pooled"].to_dict(),
        "per_spec": {k: r.to_dict() for k, r in result["per_spec"].items()},
        "per_prior": {k: r.to_dict() for k, r in result["per_prior"].items()},
        "channel_capacity": result["channel_capacity"],
        "config_digest": cfg.digest,
    }


def cmd_sweep(args: argparse.Namespace, cfg: RunConfig) -> int:
    env = cfg.require_env()
    specs = cfg.policy_specs(fallback=_policy(cfg, env))
    result = sweep_reports(env, specs, cfg)

    save_return_matrix(result["matrix"], cfg.output.path(".matrix"))
    write_json(cfg.output.path(".sweep.json"), _sweep_json(result, cfg))
    print(_summary(f"{env.label()} pooled over {len(specs)} policies", result["pooled"]))
    cc = result["channel_capacity"]
    print(f"channel capacity: pic={cc['pic']:.6f} ({cc['pic_policy']}) poic={cc['poic']:.6f} ({cc['poic_policy']})")
    return EXIT_OK


def cmd_noise_sweep(args: argparse.Namespace, cfg: RunConfig) -> int:
    env = cfg.env if cfg.env is not None else EnvSpec.make(CARTPOLE)
    if env.env_id != CARTPOLE:
        raise ConfigError(f"noise-sweep runs on cartpole, not {env.env_id}")
    specs = cfg.policy_specs(fallback=_policy(cfg, env))

    rows = []
    cells = {}
    for u_init in cfg.noise_grid["u_init"]:
        for u_dyn in cfg.noise_grid["u_dyn"]:
            cell = replace(env, noise=NoiseConfig(u_init, u_dyn))
            result = sweep_reports(cell, specs, cfg)
            pooled, cc = result["pooled"], result["channel_capacity"]
            rows.append(
                {
                    "env": cell.label(),
                    "u_init": u_init,
                    "u_dyn": u_dyn,
                    "pic": pooled.pic,
                    "poic": pooled.poic,
                    "eta_star": pooled.eta_star,
                    "pic_cc": cc["pic"],
                    "poic_cc": cc["poic"],
                }
            )
            cells[cell.label()] = _sweep_json(result, cfg)
            print(_summary(cell.label(), pooled))

    write_rows_csv(cfg.output.path(".noise.csv"), NOISE_COLUMNS, rows)
    write_json(cfg.output.path(".noise.json"), cells)
    return EXIT_OK


def _mu0_label(mu0: Any) -> str:
    if isinstance(mu0, tuple):
        return "_".join(f"{v:g}" for v in mu0)
    return f"{mu0:g}"


def _matrix_dumper(out_dir: Path, stem: str) -> Any:
    def dump(epoch: int, m: ReturnMatrix) -> None:
        save_return_matrix(m, out_dir / f"{stem}.epoch{epoch:04d}")

    return dump


def cmd_train_es(args: argparse.Namespace, cfg: RunConfig) -> int:
    env = cfg.require_env()
    policy = _policy(cfg, env)
    base = cfg.require_es()
    mu0s = cfg.mu0_sweep or (base.mu0,)

    summary = {}
    traces = []
    for mu0 in mu0s:
        es = base.with_mu0(mu0)
        stem = f"{cfg.output.stem}.mu0_{_mu0_label(mu0)}"
        on_epoch = _matrix_dumper(cfg.output.dir, stem) if args.dump_matrices else None
        trace = train_es(env, policy, es, cfg.workers, cfg.metrics.strict_bins, on_epoch)
        path = write_trace_csv(trace, cfg.output.dir / f"{stem}.trace.csv")
        traces.append(path)
        reached = epochs_to_threshold(trace, args.threshold)
        summary[_mu0_label(mu0)] = {
            "config": es.to_dict(),
            "epochs_to_threshold": reached,
            "final_mean_return": trace.records[-1].mean_return if trace.records else None,
            "trace": path.name,
        }
        print(f"mu0={_mu0_label(mu0)}: {len(trace.records)} epochs, threshold {args.threshold} reached at {reached}")

    write_json(
        cfg.output.path(".es.json"),
        {"env": env.to_dict(), "policy": policy.to_dict(), "runs": summary, "config_digest": cfg.digest},
    )
    if cfg.output.svg:
        from policy_capacity.plotting import plot_es_traces

        plot_es_traces(traces, cfg.output.path(".es"))
    return EXIT_OK


def cmd_score(args: argparse.Namespace, cfg: RunConfig) -> int:
    env = cfg.require_env()
    policy = _policy(cfg, env)
    m = collect_returns(env, policy, cfg.require_plan(), cfg.workers)
    out: dict[str, Any] = {
        "env": env.label(),
        "r_min_rand": m.r_min,
        "r_max_rand": m.r_max,
        "config_digest": cfg.digest,
    }

    r_ave_algo, r_max_algo = cfg.score.r_ave_algo, cfg.score.r_max_algo
    if cfg.score.run_bag:
        if cfg.algorithms is None:
            raise ConfigError("score.run_bag needs an algorithms section")
        bag = run_bag(env, policy, cfg.algorithms, cfg.workers)
        bag_results_csv(bag, cfg.output.path(".bag.csv"))
        r_ave_algo, r_max_algo = bag.r_ave_algo, bag.r_max_algo
        out["per_algorithm"] = bag.per_algorithm()

    out["r_max_algo"] = r_max_algo
    out["score_r"] = random_sampling_score(m, r_max_algo)
    if r_ave_algo is not None:
        out["r_ave_algo"] = r_ave_algo
        out["score_a"] = normalized_score(ScoreInputs(r_ave_algo, m.r_min, m.r_max, r_max_algo))

    write_json(cfg.output.path(".score.json"), out)
    line = f"{env.label()}: score_r={out['score_r']:.6f}"
    if "score_a" in out:
        line += f" score_a={out['score_a']:.6f}"
    print(line)
    return EXIT_OK


def _table_path(args: argparse.Namespace) -> Path:
    if args.table is not None:
        return Path(args.table)
    return fixture_path(args.fixture or "table5")


def cmd_correlate(args: argparse.Namespace, cfg: RunConfig) -> int:
    table = ingest_table(_table_path(args))
    exclude = list(args.exclude or [])
    if args.drop_poic_outliers:
        exclude += [k for k in POIC_OUTLIERS if k not in exclude]
    results = correlate_all(table, args.target or None, exclude)

    for target, by_col in results.items():
        for col, res in by_col.items():
            print(f"{col} vs {target}: R={res.r:.3f} p={res.p_value:.3g} n={res.n}")
    write_json(cfg.output.path(".correlation.json"), correlation_matrix_json(results))
    return EXIT_OK


def cmd_shaping_sweep(args: argparse.Namespace, cfg: RunConfig) -> int:
    variants = cfg.shaping or tuple(standard_sweep())
    base = cfg.env if cfg.env is not None else EnvSpec.make(POINTMAZE, reward=variants[0])
    if base.env_id != POINTMAZE:
        raise ConfigError(f"shaping-sweep runs on pointmaze, not {base.env_id}")
    policy = _policy(cfg, base)
    plan = cfg.require_plan()

    rows = []
    for variant in variants:
        env = replace(base, reward=variant)
        report = _report(collect_returns(env, policy, plan, cfg.workers), cfg)
        rows.append(
            {
                "family": variant.family,
                "params": variant.label(),
                "pic": report.pic,
                "h_r": report.h_r,
                "h_r_given_theta": report.h_r_given_theta,
                "poic": report.poic,
                "eta_star": report.eta_star,
            }
        )
        print(_summary(variant.label(), report))
    write_rows_csv(cfg.output.path(".shaping.csv"), SHAPING_COLUMNS, rows)
    return EXIT_OK


def cmd_prop1(args: argparse.Namespace, cfg: RunConfig) -> int:
    seed = args.seed if args.seed is not None else 0
    check = verify_prop1(
        args.mu1, args.sigma1, args.mu2, args.sigma2, args.samples, args.trials, seed
    )
    out = {
        "mu1": args.mu1,
        "sigma1": args.sigma1,
        "mu2": args.mu2,
        "sigma2": args.sigma2,
        "n": args.samples,
        "trials": args.trials,
        "seed": seed,
        "bound": check.bound,
        "empirical_misorder_rate": check.empirical_misorder_rate,
        "standard_error": check.standard_error,
        "holds": check.holds(),
    }
    write_json(cfg.output.path(".prop1.json"), out)
    print(
        f"bound={check.bound:.6f} empirical={check.empirical_misorder_rate:.6f} "
        f"(+/- {check.standard_error:.2g}) holds={check.holds()}"
    )
    return EXIT_OK


def cmd_plot(args: argparse.Namespace, cfg: RunConfig) -> int:
    from policy_capacity import plotting

    if args.kind == "es":
        if not args.inputs:
            raise ConfigError("plot es needs at least one trace CSV")
        path = plotting.plot_es_traces(args.inputs, cfg.output.path(".es"))
    elif args.kind == "correlation":
        table = ingest_table(_table_path(args))
        path = plotting.plot_correlation(
            table, args.x, args.y, cfg.output.path(f".{args.x}_vs_{args.y}"), args.exclude or ()
        )
    else:
        if len(args.inputs or []) != 1:
            raise ConfigError("plot poic needs exactly one return-matrix CSV")
        m = load_return_matrix(args.inputs[0])
        search = optimize_temperature(m)
        if not search.grid:
            raise ConfigError(f"{args.inputs[0]} has constant returns; no POIC curve to plot")
        points = sorted(search.evaluated)
        path = plotting.plot_poic_curve(
            [eta for eta, _ in points], [v for _, v in points], cfg.output.path(".poic"),
            search.eta_star,
        )
    print(path)
    return EXIT_OK


def cmd_envs(args: argparse.Namespace, cfg: RunConfig) -> int:
    print(json.dumps(available_envs(), indent=2))
    return EXIT_OK


# ===== PARSER =====


def _common_parser(default: Any = None) -> argparse.ArgumentParser:
    """Global flags, accepted before or after the subcommand"""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=default, help="YAML run file")
    common.add_argument("--workers", type=int, default=default, help="Worker processes for rollouts")
    common.add_argument("--seed", type=int, default=default, help="Master seed")
    common.add_argument("--out", default=default, help="Output directory")
    common.add_argument("--stem", default=default, help="Output file stem")
    common.add_argument("--log-level", default=default, help="DEBUG, INFO, WARNING, ...")
    return common


def _pipeline_parser() -> argparse.ArgumentParser:
    pipeline = argparse.ArgumentParser(add_help=False)
    pipeline.add_argument("--env", help="Environment id (see `policy-capacity envs`)")
    pipeline.add_argument("--horizon", type=int, help="Episode horizon (synthetic: 1, 2 or 3)")
    pipeline.add_argument("--constant-reward", type=float, help="Per-step reward of the constant env")
    pipeline.add_argument("--reward", help="Pointmaze reward, FAMILY[:key=value,...] e.g. sparse:eps=0.1")
    pipeline.add_argument("--n", type=int, help="Parameter particles N")
    pipeline.add_argument("--m", type=int, help="Episodes per particle M")
    pipeline.add_argument("--bins", type=int, help="Histogram bins B")
    pipeline.add_argument("--lenient-bins", action="store_true", help="Warn instead of failing when B <= M")
    pipeline.add_argument("--eta", type=float, help="Fixed POIC temperature; skips the search")
    pipeline.add_argument("--r-max-ref", type=float, help="Reference maximum return for POIC")
    pipeline.add_argument("--save-params", action="store_true", help="Also write sampled parameters")
    pipeline.add_argument("--svg", action="store_true", help="Render SVG figures (needs matplotlib)")
    return pipeline


def _table_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--table", help="Metric CSV with an `env` key column")
    parser.add_argument("--fixture", choices=("table5", "table18", "table9"), help="Shipped table")
    parser.add_argument("--exclude", action="append", help="Row to drop (repeatable)")


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser(argparse.SUPPRESS)
    pipeline = _pipeline_parser()
    parser = argparse.ArgumentParser(
        prog="policy-capacity",
        description="Estimate PIC/POIC of reinforcement-learning environments from random policy sampling",
        parents=[_common_parser()],
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, handler: Any, help_text: str, *parents: argparse.ArgumentParser) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text, parents=[common, *parents])
        p.set_defaults(handler=handler)
        return p

    add("estimate", cmd_estimate, "PIC/POIC of one env and policy prior", pipeline)
    add("sweep", cmd_sweep, "Pooled and per-prior metrics over the architecture bag", pipeline)
    add("noise-sweep", cmd_noise_sweep, "CartPole metrics over the (u_init, u_dyn) grid", pipeline)

    p = add("train-es", cmd_train_es, "ES on the prior mean with per-epoch metrics", pipeline)
    p.add_argument("--epochs", type=int, help="Override es.epochs")
    p.add_argument("--threshold", type=float, default=0.9, help="Mean return for epochs-to-threshold")
    p.add_argument("--dump-matrices", action="store_true", help="Save every epoch's return matrix")

    add("score", cmd_score, "Normalized scores from random sampling and the algorithm bag", pipeline)

    p = add("correlate", cmd_correlate, "Pearson correlations over a metric table")
    _table_args(p)
    p.add_argument("--target", action="append", help="Target column (default score_a, score_r)")
    p.add_argument("--drop-poic-outliers", action="store_true", help="Exclude the POIC outlier rows")

    add("shaping-sweep", cmd_shaping_sweep, "Metrics of the 16 pointmaze reward variants", pipeline)

    p = add("prop1", cmd_prop1, "Check the N-sample misordering bound by Monte Carlo")
    p.add_argument("--mu1", type=float, default=1.0)
    p.add_argument("--sigma1", type=float, default=1.0)
    p.add_argument("--mu2", type=float, default=0.0)
    p.add_argument("--sigma2", type=float, default=1.0)
    p.add_argument("--samples", type=int, default=10, help="Samples per mean N")
    p.add_argument("--trials", type=int, default=100_000)

    p = add("plot", cmd_plot, "Render SVG figures from emitted files")
    p.add_argument("kind", choices=("es", "correlation", "poic"))
    p.add_argument("inputs", nargs="*", help="Trace CSVs (es) or one matrix CSV (poic)")
    _table_args(p)
    p.add_argument("--x", default="poic", help="Metric column (correlation)")
    p.add_argument("--y", default="score_a", help="Score column (correlation)")

    add("envs", cmd_envs, "List available environments")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        configure_logging(args.log_level)
        cfg = resolve_config(args)
        return args.handler(args, cfg)
    except (ConfigError, yaml.YAMLError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as e:
        logger.opt(exception=e).debug("Unhandled error in {}", args.command)
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
