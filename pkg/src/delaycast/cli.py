"""Batch command-line front end: lorenz, predict, tune, infer, backtest.

Every command is a pure function of (config, input files, seeds): re-running
with the same inputs produces byte-identical outputs. The resolved config is
echoed into the output directory for provenance.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from . import plots
from .backtest import StrategyConfig, buy_and_hold, run_backtest, signal_from_predictions
from .config import ConfigError, get, get_pair, get_typed, load_config, resolved_yaml
from .embedding import enumerate_pool, sample_disjoint_partition
from .ensemble import HyperParams, SplitScheme, cross_validate, ensemble_predict, pearson
from .frame import SeriesFrame, ingest_csv
from .inference import resample_correlations, residual_pool, rescale_to_pool_range
from .lorenz import LorenzParams, lorenz_trajectory
from .synthetic import geometric_random_walk


def _write_frame_csv(frame: SeriesFrame, path: Path, columns: list[str]) -> None:
    lines = [",".join(["time", *columns])]
    for i in range(len(frame)):
        cells = [str(int(frame.times[i]))]
        for name in columns:
            v = frame.columns[name][i]
            cells.append("NA" if np.isnan(v) else f"{v:.17g}")
        lines.append(",".join(cells))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _echo_config(cfg: dict, out: Path) -> None:
    (out / "resolved-config.yaml").write_text(resolved_yaml(cfg), encoding="utf-8")


def _load_input_frame(cfg: dict) -> SeriesFrame:
    path = get_typed(cfg, "input.csv", str)
    columns = get(cfg, "input.columns")
    time_column = get_typed(cfg, "input.time_column", str, "time")
    if not isinstance(columns, list) or not all(isinstance(c, str) for c in columns):
        raise ConfigError("config key 'input.columns' must be a list of column names")
    return ingest_csv(path, columns, time_column)


def _hyperparams(cfg: dict, seed_override: int | None) -> HyperParams:
    hp = HyperParams(
        p=get_typed(cfg, "hp.p", int),
        k_multiplier=get_typed(cfg, "hp.k_multiplier", float, 10.0),
        trim_frac=get_typed(cfg, "hp.trim_frac", float, 0.0),
        horizon=get_typed(cfg, "hp.horizon", int),
        q=get_typed(cfg, "hp.q", float, 0.8),
        n_partitions=get_typed(cfg, "hp.n_partitions", int, 5),
        seed=get_typed(cfg, "hp.seed", int),
    )
    if seed_override is not None:
        hp = dataclasses.replace(hp, seed=seed_override)
    return hp


def _pool_from_config(cfg: dict):
    series = get(cfg, "pool.series")
    if not isinstance(series, list) or not series:
        raise ConfigError("config key 'pool.series' must be a nonempty list")
    return enumerate_pool(series, get_typed(cfg, "pool.max_lag", int))


def _query_times(frame: SeriesFrame, cfg: dict) -> np.ndarray:
    start = get_typed(cfg, "queries.start", int)
    end = get_typed(cfg, "queries.end", int)
    times = frame.times[(frame.times >= start) & (frame.times <= end)]
    if times.size == 0:
        raise ConfigError(f"no frame timestamps inside queries [{start}..{end}]")
    return times


def cmd_lorenz(cfg: dict, out: Path, args) -> None:
    params = LorenzParams(
        sigma=get_typed(cfg, "lorenz.sigma", float, 10.0),
        rho=get_typed(cfg, "lorenz.rho", float, 28.0),
        beta=get_typed(cfg, "lorenz.beta", float, 8.0 / 3.0),
        dt=get_typed(cfg, "lorenz.dt", float, 0.01),
        subsample=get_typed(cfg, "lorenz.subsample", int, 5),
        n_record=get_typed(cfg, "lorenz.n_record", int, 5000),
        x0=tuple(get(cfg, "lorenz.x0", [1.0, 1.0, 1.0])),
        transient_skip=get_typed(cfg, "lorenz.transient_skip", int, 1000),
    )
    cfg.setdefault("lorenz", {}).update(dataclasses.asdict(params))
    frame = lorenz_trajectory(params)
    _write_frame_csv(frame, out / "trajectory.csv", ["x", "y", "z"])
    _echo_config(cfg, out)
    print(f"rows={len(frame)}")


def cmd_predict(cfg: dict, out: Path, args) -> None:
    frame = _load_input_frame(cfg)
    pool = _pool_from_config(cfg)
    target = get_typed(cfg, "target", str)
    hp = _hyperparams(cfg, args.seed)
    cfg.setdefault("hp", {}).update(dataclasses.asdict(hp))
    train = get_pair(cfg, "train")
    queries = _query_times(frame, cfg)
    include_per_map = get_typed(cfg, "include_per_map", bool, False)
    baseline = get_typed(cfg, "baseline", str, "none")
    if baseline not in ("none", "global", "forward"):
        raise ConfigError("config key 'baseline' must be none, global, or forward")

    result = ensemble_predict(frame, pool, target, hp, train, queries, threads=args.threads)
    result.to_csv(out / "predictions.csv", include_per_map=include_per_map)

    manifest_lines = [
        sample_disjoint_partition(pool, hp.p, (target, hp.horizon), hp.seed + i).manifest()
        for i in range(hp.n_partitions)
    ]
    (out / "partitions.txt").write_text("\n".join(manifest_lines), encoding="utf-8")

    panels = [("local linear", result.combined, result.truth)]
    if baseline != "none":
        base = ensemble_predict(
            frame, pool, target, hp, train, queries, engine=baseline, threads=args.threads
        )
        base.to_csv(out / "baseline_predictions.csv", include_per_map=include_per_map)
        panels.insert(0, (f"{baseline} linear", base.combined, base.truth))

    cloud = None
    if get_typed(cfg, "residual_cloud", bool, False):
        train_frame = frame.restrict(*train)
        rp = residual_pool(train_frame, pool, target, hp)
        cloud = (result.combined, rp.residuals)
        if get_typed(cfg, "rescale_to_residual_range", bool, False):
            finite = result.combined[np.isfinite(result.combined)]
            draws = (finite[:, None] + rp.residuals[None, :]).ravel()
            rescaled = np.full_like(result.combined, np.nan)
            rescaled[np.isfinite(result.combined)] = rescale_to_pool_range(finite, draws)
            lines = ["time,combined_rescaled"]
            lines += [
                f"{int(t)},{'NA' if np.isnan(v) else format(v, '.17g')}"
                for t, v in zip(result.base_times, rescaled)
            ]
            (out / "predictions_rescaled.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")

    plots.scatter_panels(out / "scatter.svg", panels, residual_cloud=cloud)
    _echo_config(cfg, out)
    r = pearson(result.combined, result.truth)
    print(f"queries={queries.size} skipped_maps={result.skipped} correlation={r:.4f}")


def cmd_tune(cfg: dict, out: Path, args) -> None:
    frame = _load_input_frame(cfg)
    pool = _pool_from_config(cfg)
    target = get_typed(cfg, "target", str)
    base_hp = _hyperparams(cfg, args.seed)
    cfg.setdefault("hp", {}).update(dataclasses.asdict(base_hp))
    train = get_pair(cfg, "scheme.train")
    queries = _query_times(frame, {"queries": get(cfg, "scheme.queries")})
    scheme = SplitScheme(train, queries)
    p_grid = get(cfg, "grid.p")
    k_grid = [float(k) for k in get(cfg, "grid.k_multiplier")]
    trim_grid = [float(t) for t in get(cfg, "grid.trim_frac")]
    print(
        f"tuning scheme: train [{train[0]}..{train[1]}], "
        f"holdout {queries.size} queries [{queries[0]}..{queries[-1]}]"
    )
    best = cross_validate(frame, pool, target, base_hp, p_grid, k_grid, trim_grid, scheme)
    payload = dataclasses.asdict(best)
    (out / "selected.json").write_text(
        json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    _echo_config(cfg, out)
    print(f"selected p={best.p} k_multiplier={best.k_multiplier} trim_frac={best.trim_frac}")


def cmd_infer(cfg: dict, out: Path, args) -> None:
    frame = _load_input_frame(cfg)
    pool = _pool_from_config(cfg)
    target = get_typed(cfg, "target", str)
    hp = _hyperparams(cfg, None)
    cfg.setdefault("hp", {}).update(dataclasses.asdict(hp))
    train = get_pair(cfg, "train")
    queries = _query_times(frame, cfg)
    R = get_typed(cfg, "R", int)
    base_seed = get_typed(cfg, "base_seed", int) if args.seed is None else args.seed
    cfg["base_seed"] = base_seed
    n_mc = get_typed(cfg, "n_mc", int, 10000)
    report = resample_correlations(
        frame, pool, target, hp, R, base_seed, train, queries, n_mc=n_mc
    )
    report.write_correlations_csv(out / "correlations.csv")
    report.write_qq_csv(out / "qq.csv")
    report.write_summary_json(out / "summary.json")
    plots.qq_plot(out / "qq.svg", report.qq_pairs)
    _echo_config(cfg, out)
    print(
        f"replicates={R} mean={report.mean:.4f} sd={report.sd:.4f} "
        f"ks_p={report.ks_p:.4f} bound={report.bound[0]:.4f}+/-{report.bound[1]:.4f}"
    )


def _load_prices(cfg: dict) -> SeriesFrame:
    if get(cfg, "prices.csv", None) is not None:
        return ingest_csv(get_typed(cfg, "prices.csv", str), ["close"])
    if get(cfg, "prices.synthetic", None) is not None:
        return geometric_random_walk(
            n=get_typed(cfg, "prices.synthetic.n", int),
            seed=get_typed(cfg, "prices.synthetic.seed", int),
            drift=get_typed(cfg, "prices.synthetic.drift", float, 0.0002),
            vol=get_typed(cfg, "prices.synthetic.vol", float, 0.01),
            s0=get_typed(cfg, "prices.synthetic.s0", float, 100.0),
        )
    raise ConfigError("config needs prices.csv or prices.synthetic")


def _signals_for(cfg: dict, prices: SeriesFrame, seed_override: int | None) -> np.ndarray:
    n = len(prices)
    if get(cfg, "signal.always_in", None):
        return np.ones(n, dtype=bool)
    if get(cfg, "signal.zero_skill", None) is not None:
        seed = get_typed(cfg, "signal.zero_skill.seed", int)
        if seed_override is not None:
            seed = seed_override
            cfg["signal"]["zero_skill"]["seed"] = seed
        rng = np.random.default_rng(seed)
        return signal_from_predictions(rng.standard_normal(n))
    if get(cfg, "signal.predictions_csv", None) is not None:
        preds_by_time: dict[int, float] = {}
        with open(get_typed(cfg, "signal.predictions_csv", str), encoding="utf-8") as handle:
            for row in csv.DictReader(handle):
                try:
                    preds_by_time[int(row["time"])] = float(row["combined"])
                except (KeyError, ValueError):
                    continue
        preds = np.array(
            [preds_by_time.get(int(t), np.nan) for t in prices.times], dtype=np.float64
        )
        return signal_from_predictions(preds)
    raise ConfigError("config needs signal.always_in, signal.zero_skill, or signal.predictions_csv")


def cmd_backtest(cfg: dict, out: Path, args) -> None:
    prices_frame = _load_prices(cfg)
    prices = prices_frame.column("close")
    positions = _signals_for(cfg, prices_frame, args.seed)
    base = StrategyConfig(
        cost_frac=get_typed(cfg, "strategy.cost_frac", float, 0.003),
        tax_rate=get_typed(cfg, "strategy.tax_rate", float, 0.36),
        tax_period=get_typed(cfg, "strategy.tax_period", int, 504),
        initial_value=get_typed(cfg, "strategy.initial_value", float, 1.0),
    )
    cfg.setdefault("strategy", {}).update(
        {k: getattr(base, k) for k in ("cost_frac", "tax_rate", "tax_period", "initial_value")}
    )
    no_tax = dataclasses.replace(base, tax_rate=0.0)

    bh = buy_and_hold(prices, no_tax, prices_frame.times)
    strategy = run_backtest(prices, positions, no_tax, prices_frame.times)
    bh.to_csv(out / "buy_and_hold.csv")
    strategy.to_csv(out / "strategy.csv")
    curves = {"buy_and_hold": bh.value, "strategy": strategy.value}
    taxed_final = None
    if base.tax_rate > 0:
        taxed = run_backtest(prices, positions, base, prices_frame.times)
        taxed.to_csv(out / "strategy_taxed.csv")
        curves["strategy_taxed"] = taxed.value
        taxed_final = taxed.final_value
    plots.equity_curves(
        out / "equity.svg", prices_frame.times, curves,
        dotted="buy_and_hold", dot_stride=base.tax_period,
    )
    _echo_config(cfg, out)
    line = (
        f"days={len(prices_frame)} trades={strategy.trades} "
        f"final_strategy={strategy.final_value:.6f} final_buy_and_hold={bh.final_value:.6f}"
    )
    if taxed_final is not None:
        line += f" final_strategy_taxed={taxed_final:.6f}"
    print(line)


COMMANDS = {
    "lorenz": cmd_lorenz,
    "predict": cmd_predict,
    "tune": cmd_tune,
    "infer": cmd_infer,
    "backtest": cmd_backtest,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="delaycast",
        description="Multiview delay-coordinate forecasting for chaotic time series",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", required=True, help="YAML config path")
        cmd.add_argument("--out", required=True, help="output directory")
        cmd.add_argument("--seed", type=int, default=None, help="override the config seed")
        cmd.add_argument("--threads", type=int, default=1,
                         help="worker hint; results do not depend on it")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        COMMANDS[args.command](cfg, out, args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
