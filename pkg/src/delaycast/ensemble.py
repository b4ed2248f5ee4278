"""Multiview combination: many delay maps, one trimmed-mean prediction per query."""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .embedding import Coordinate, build_design, design_rows, sample_disjoint_partition
from .frame import SeriesFrame
from .regression import LocalLinearEngine, choose_k, forward_select_fit, global_linear_fit

ENGINES = ("local", "global", "forward")


@dataclass(frozen=True)
class HyperParams:
    """Tuning knobs for one multiview run."""

    p: int
    k_multiplier: float = 10.0
    trim_frac: float = 0.0
    horizon: int = 1
    q: float = 0.8
    n_partitions: int = 5
    seed: int = 0

    def __post_init__(self) -> None:
        if self.p < 1:
            raise ValueError("p must be >= 1")
        if not 0 <= self.trim_frac < 0.5:
            raise ValueError("trim_frac must lie in [0, 0.5)")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if not 0 < self.q < 1:
            raise ValueError("q must lie in (0, 1)")
        if self.n_partitions < 1:
            raise ValueError("n_partitions must be >= 1")


@dataclass(frozen=True)
class PredictionSet:
    """Per-map and combined predictions at each query base time."""

    base_times: np.ndarray
    per_map: np.ndarray
    combined: np.ndarray
    truth: np.ndarray | None = None
    skipped: int = 0

    def __post_init__(self) -> None:
        base = np.asarray(self.base_times, dtype=np.int64)
        per_map = np.asarray(self.per_map, dtype=np.float64)
        combined = np.asarray(self.combined, dtype=np.float64)
        if per_map.ndim != 2 or per_map.shape[1] != base.size or combined.shape != base.shape:
            raise ValueError("per_map must be (n_maps, n_queries) matching base_times")
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)  # all-NaN columns
            lo = np.nanmin(per_map, axis=0)
            hi = np.nanmax(per_map, axis=0)
        span = np.where(np.isfinite(hi - lo), hi - lo, 0.0)
        tol = 1e-9 * (1.0 + np.abs(lo) + span)
        ok = np.isnan(combined) | ((combined >= lo - tol) & (combined <= hi + tol))
        if not np.all(ok):
            raise ValueError("combined prediction outside untrimmed per-map range")
        object.__setattr__(self, "base_times", base)
        object.__setattr__(self, "per_map", per_map)
        object.__setattr__(self, "combined", combined)
        if self.truth is not None:
            truth = np.asarray(self.truth, dtype=np.float64)
            if truth.shape != base.shape:
                raise ValueError("truth must match base_times")
            object.__setattr__(self, "truth", truth)

    @property
    def n_maps(self) -> int:
        return self.per_map.shape[0]

    def to_csv(self, path: str | Path, include_per_map: bool = False) -> None:
        """Write time, truth, combined (and optionally per-map columns) as CSV."""
        header = ["time", "truth", "combined"]
        if include_per_map:
            header += [f"map_{i}" for i in range(self.n_maps)]
        lines = [",".join(header)]
        truth = self.truth if self.truth is not None else np.full(self.base_times.size, np.nan)
        for i, t in enumerate(self.base_times):
            row = [str(int(t)), _fmt(truth[i]), _fmt(self.combined[i])]
            if include_per_map:
                row += [_fmt(v) for v in self.per_map[:, i]]
            lines.append(",".join(row))
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _fmt(value: float) -> str:
    return "NA" if np.isnan(value) else f"{value:.17g}"


def trimmed_mean(values, trim_frac: float) -> float:
    """Mean after dropping floor(trim_frac * m) values from each end of the sort."""
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise ValueError("trimmed_mean of an empty list")
    if not 0 <= trim_frac < 0.5:
        raise ValueError("trim_frac must lie in [0, 0.5)")
    cut = int(np.floor(trim_frac * values.size))
    kept = np.sort(values)[cut : values.size - cut]
    return float(kept.mean())


def _spec_predictions(frame, spec, hp, train_range, query_times, engine):
    """One spec's predictions at the query base times; None when the spec is skipped."""
    try:
        design = build_design(frame.restrict(*train_range), spec)
    except ValueError:
        return None
    k = choose_k(design.n_eff, spec.p, hp.k_multiplier)
    if k > design.n_eff:
        return None
    X_q, _, x_ok = design_rows(frame, spec, query_times)
    row = np.full(len(query_times), np.nan)
    if not np.any(x_ok):
        return row
    if engine == "local":
        engine_obj = LocalLinearEngine(design, k)
        row[x_ok], _ = engine_obj.predict_many(X_q[x_ok])
    elif engine == "global":
        model = global_linear_fit(design)
        row[x_ok] = model.predict(X_q[x_ok])
    elif engine == "forward":
        model = forward_select_fit(design, max_terms=spec.p)
        row[x_ok] = model.predict(X_q[x_ok])
    else:
        raise ValueError(f"unknown engine {engine!r}; choose from {ENGINES}")
    return row


def ensemble_predict(
    frame: SeriesFrame,
    pool: list[Coordinate],
    target_series: str,
    hp: HyperParams,
    train_range: tuple[int, int],
    query_times,
    engine: str = "local",
    threads: int = 1,
) -> PredictionSet:
    """Combine per-map predictions across hp.n_partitions seeded partitions.

    Partition i uses seed hp.seed + i. Every spec is trained on the
    train_range block and queried at the given base times; predictions are
    pooled per query and combined with the trimmed mean. Specs whose training
    design is too small for their neighborhood are skipped (counted, warned);
    it is an error only if every spec is skipped. Results do not depend on
    the thread count.
    """
    if engine not in ENGINES:
        raise ValueError(f"unknown engine {engine!r}; choose from {ENGINES}")
    query_times = np.asarray(query_times, dtype=np.int64)
    specs = []
    for i in range(hp.n_partitions):
        part = sample_disjoint_partition(pool, hp.p, (target_series, hp.horizon), hp.seed + i)
        specs.extend(part.specs)

    def job(spec):
        return _spec_predictions(frame, spec, hp, train_range, query_times, engine)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool_exec:
            rows = list(pool_exec.map(job, specs))
    else:
        rows = [job(spec) for spec in specs]

    skipped = sum(1 for r in rows if r is None)
    kept = [r for r in rows if r is not None]
    if not kept:
        raise ValueError("every delay map was skipped; training block too small")
    if skipped:
        warnings.warn(f"skipped {skipped} of {len(specs)} delay maps (training design too small)")

    per_map = np.vstack(kept)
    combined = np.full(query_times.size, np.nan)
    for i in range(query_times.size):
        column = per_map[:, i]
        finite = column[np.isfinite(column)]
        if finite.size:
            combined[i] = trimmed_mean(finite, hp.trim_frac)

    truth = _truth_at(frame, target_series, hp.horizon, query_times)
    return PredictionSet(query_times, per_map, combined, truth, skipped)


def _truth_at(frame, target_series, horizon, query_times) -> np.ndarray:
    pos = frame.positions_of(np.asarray(query_times, dtype=np.int64) + horizon)
    col = frame.column(target_series)
    return np.where(pos >= 0, col[np.clip(pos, 0, None)], np.nan)


def pearson(a: np.ndarray, b: np.ndarray) -> float:
    """Pearson correlation over pairs where both entries are finite."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    ok = np.isfinite(a) & np.isfinite(b)
    if ok.sum() < 2:
        return np.nan
    a, b = a[ok], b[ok]
    if a.std() == 0 or b.std() == 0:
        return np.nan
    return float(np.corrcoef(a, b)[0, 1])


def mean_squared_error(pred: np.ndarray, truth: np.ndarray) -> float:
    pred = np.asarray(pred, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    ok = np.isfinite(pred) & np.isfinite(truth)
    if not np.any(ok):
        return np.nan
    return float(np.mean((pred[ok] - truth[ok]) ** 2))


@dataclass(frozen=True)
class SplitScheme:
    """One train block and the held-out query base times used to score it."""

    train_range: tuple[int, int]
    query_times: np.ndarray


def cross_validate(
    frame: SeriesFrame,
    pool: list[Coordinate],
    target_series: str,
    base_hp: HyperParams,
    p_grid: list[int],
    k_grid: list[float],
    trim_grid: list[float],
    scheme: SplitScheme,
    engine: str = "local",
) -> HyperParams:
    """Pick (p, k_multiplier, trim_frac) minimizing held-out MSE.

    Ties break toward smaller p, then smaller k_multiplier, then smaller
    trim_frac (the grids are scanned in ascending order and only strict
    improvements replace the incumbent).
    """
    if not p_grid or not k_grid or not trim_grid:
        raise ValueError("all three grids must be nonempty")
    best_hp = None
    best_mse = np.inf
    for p in sorted(p_grid):
        for k_mult in sorted(k_grid):
            for trim in sorted(trim_grid):
                hp = replace(base_hp, p=p, k_multiplier=k_mult, trim_frac=trim)
                try:
                    result = ensemble_predict(
                        frame, pool, target_series, hp,
                        scheme.train_range, scheme.query_times, engine=engine,
                    )
                except ValueError:
                    continue
                mse = mean_squared_error(result.combined, result.truth)
                if np.isfinite(mse) and mse < best_mse:
                    best_mse = mse
                    best_hp = hp
    if best_hp is None:
        raise ValueError("no grid cell produced a scoreable prediction")
    return best_hp


def rolling_origin_run(
    frame: SeriesFrame,
    pool: list[Coordinate],
    target_series: str,
    hp: HyperParams,
    window_len: int,
    step_len: int,
    grid: tuple[list[int], list[float], list[float]] | None = None,
    engine: str = "local",
) -> PredictionSet:
    """Slide a window by step_len, predicting each window's last step_len block.

    With a grid, hyperparameters are tuned on each window's internal
    train/holdout split and each window after the first is predicted with the
    previous window's selection; without one this is ensemble_predict per
    window. Predicted target times are the holdout timestamps (query base
    times sit horizon steps earlier).
    """
    t0, t_end = int(frame.times[0]), int(frame.times[-1])
    starts = []
    start = t0
    while start + window_len - 1 <= t_end:
        starts.append(start)
        start += step_len
    if not starts:
        raise ValueError(
            f"frame span {t_end - t0 + 1} too short for window_len={window_len}"
        )

    pieces = []
    tuned_prev = None
    for start in starts:
        window_end = start + window_len - 1
        holdout_start = window_end - step_len + 1
        train_range = (start, holdout_start - 1)
        target_times = np.arange(holdout_start, window_end + 1, dtype=np.int64)
        query_times = target_times - hp.horizon
        if grid is not None:
            scheme = SplitScheme(train_range, query_times)
            tuned = cross_validate(
                frame, pool, target_series, hp, grid[0], grid[1], grid[2], scheme, engine
            )
            hp_used = tuned_prev if tuned_prev is not None else tuned
            tuned_prev = tuned
        else:
            hp_used = hp
        pieces.append(
            ensemble_predict(
                frame, pool, target_series, hp_used, train_range, query_times, engine
            )
        )

    n_maps = max(piece.n_maps for piece in pieces)
    per_map_parts = []
    for piece in pieces:
        pad = np.full((n_maps - piece.n_maps, piece.base_times.size), np.nan)
        per_map_parts.append(np.vstack([piece.per_map, pad]) if pad.size else piece.per_map)
    return PredictionSet(
        np.concatenate([piece.base_times for piece in pieces]),
        np.hstack(per_map_parts),
        np.concatenate([piece.combined for piece in pieces]),
        np.concatenate([piece.truth for piece in pieces]),
        sum(piece.skipped for piece in pieces),
    )


def horizon_sweep(
    frame: SeriesFrame,
    pool: list[Coordinate],
    target_series: str,
    hp: HyperParams,
    horizons: list[int],
    train_range: tuple[int, int],
    query_times,
) -> list[dict]:
    """Skill (correlation, MSE) per horizon on one fixed train/test split."""
    rows = []
    for h in horizons:
        if h < 1:
            raise ValueError("horizons must be >= 1")
        hp_h = replace(hp, horizon=h)
        result = ensemble_predict(frame, pool, target_series, hp_h, train_range, query_times)
        rows.append(
            {
                "horizon": h,
                "correlation": pearson(result.combined, result.truth),
                "mse": mean_squared_error(result.combined, result.truth),
                "n_queries": int(np.isfinite(result.combined * result.truth).sum()),
            }
        )
    return rows
