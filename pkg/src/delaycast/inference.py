"""Empirical predictive distributions and partition-resampling inference.

The residual pool holds single-nearest-neighbor residuals collected while
predicting the back (1-q) block of the data from the front q block, one entry
per predicted point per delay map. Its empirical quantiles furnish prediction
intervals; refitting with freshly seeded partitions furnishes resample
distributions for summary statistics like the prediction/truth correlation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy.stats import norm

from .embedding import Coordinate, build_design, design_rows, sample_disjoint_partition
from .ensemble import HyperParams, ensemble_predict, pearson
from .frame import SeriesFrame
from .regression import LocalLinearEngine, choose_k


@dataclass(frozen=True)
class ResidualPool:
    """Pooled nearest-neighbor residuals: the empirical predictive spread."""

    residuals: np.ndarray
    q: float
    hp: HyperParams
    n_specs: int

    def __post_init__(self) -> None:
        res = np.asarray(self.residuals, dtype=np.float64)
        if res.size == 0:
            raise ValueError("residual pool is empty")
        if not np.all(np.isfinite(res)):
            raise ValueError("residual pool contains non-finite entries")
        res.setflags(write=False)
        object.__setattr__(self, "residuals", res)


@dataclass(frozen=True)
class ResampleReport:
    """Distribution of a summary statistic across freshly partitioned refits."""

    correlations: np.ndarray
    mean: float
    sd: float
    qq_pairs: np.ndarray
    ks_p: float
    bound: tuple[float, float]

    def __post_init__(self) -> None:
        corr = np.asarray(self.correlations, dtype=np.float64)
        if np.any(np.abs(corr) > 1 + 1e-12):
            raise ValueError("correlations must lie in [-1, 1]")
        object.__setattr__(self, "correlations", corr)
        object.__setattr__(self, "qq_pairs", np.asarray(self.qq_pairs, dtype=np.float64))

    def write_correlations_csv(self, path: str | Path) -> None:
        lines = ["replicate,correlation"]
        lines += [f"{i + 1},{c:.17g}" for i, c in enumerate(self.correlations)]
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    def write_qq_csv(self, path: str | Path) -> None:
        lines = ["theoretical,empirical"]
        lines += [f"{t:.17g},{e:.17g}" for t, e in self.qq_pairs]
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    def write_summary_json(self, path: str | Path) -> None:
        payload = {
            "mean": self.mean,
            "sd": self.sd,
            "ks_p": self.ks_p,
            "bound_center": self.bound[0],
            "bound_halfwidth": self.bound[1],
            "n_replicates": int(self.correlations.size),
        }
        Path(path).write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def residual_pool(
    frame: SeriesFrame,
    pool: list[Coordinate],
    target_series: str,
    hp: HyperParams,
) -> ResidualPool:
    """Train on the first q*n rows, predict the rest, keep each nearest-neighbor residual.

    Residuals from every spec of every partition are pooled unconditionally.
    """
    n = len(frame)
    split = int(np.floor(hp.q * n))
    if split < 1 or split >= n:
        raise ValueError(f"q={hp.q} leaves an empty block for n={n}")
    train_range = (int(frame.times[0]), int(frame.times[split - 1]))
    tail_times = frame.times[split:]

    residuals: list[np.ndarray] = []
    n_specs = 0
    for i in range(hp.n_partitions):
        partition = sample_disjoint_partition(
            pool, hp.p, (target_series, hp.horizon), hp.seed + i
        )
        for spec in partition.specs:
            try:
                design = build_design(frame.restrict(*train_range), spec)
            except ValueError:
                continue
            k = choose_k(design.n_eff, spec.p, hp.k_multiplier)
            if k > design.n_eff:
                continue
            X_q, _, x_ok = design_rows(frame, spec, tail_times)
            if not np.any(x_ok):
                continue
            engine = LocalLinearEngine(design, k)
            _, nn_res = engine.predict_many(X_q[x_ok])
            residuals.append(nn_res)
            n_specs += 1
    if not residuals:
        raise ValueError("no residuals collected; blocks too small after embedding")
    return ResidualPool(np.concatenate(residuals), hp.q, hp, n_specs)


def predictive_interval(
    prediction: float, pool: ResidualPool, level: float
) -> tuple[float, float]:
    """Central interval from empirical residual quantiles (linear interpolation)."""
    if not 0 < level < 1:
        raise ValueError("level must lie in (0, 1)")
    alpha = (1.0 - level) / 2.0
    lo_q, hi_q = np.quantile(pool.residuals, [alpha, 1.0 - alpha])
    return prediction + float(lo_q), prediction + float(hi_q)


def rescale_to_pool_range(preds, pool_draws) -> np.ndarray:
    """Affinely map predictions so their range matches the pool draws' range."""
    preds = np.asarray(preds, dtype=np.float64)
    draws = np.asarray(pool_draws, dtype=np.float64)
    if preds.size == 0 or draws.size == 0:
        raise ValueError("both inputs must be nonempty")
    p_lo, p_hi = preds.min(), preds.max()
    if p_hi == p_lo:
        raise ValueError("predictions have zero range; cannot rescale")
    d_lo, d_hi = draws.min(), draws.max()
    return d_lo + (preds - p_lo) * (d_hi - d_lo) / (p_hi - p_lo)


@lru_cache(maxsize=32)
def _null_ks_table(n: int, n_mc: int, seed: int) -> np.ndarray:
    """Sorted KS statistics of n_mc standardized Gaussian samples of size n."""
    rng = np.random.default_rng(seed)
    draws = rng.standard_normal((n_mc, n))
    stats = _ks_normal_stat(draws)
    stats.sort()
    stats.setflags(write=False)
    return stats


def _ks_normal_stat(samples: np.ndarray) -> np.ndarray:
    """KS distance of each row, standardized by its own mean/sd, from N(0, 1)."""
    samples = np.atleast_2d(np.asarray(samples, dtype=np.float64))
    n = samples.shape[1]
    mean = samples.mean(axis=1, keepdims=True)
    sd = samples.std(axis=1, ddof=1, keepdims=True)
    if np.any(sd == 0):
        raise ValueError("sample has zero variance")
    z = np.sort((samples - mean) / sd, axis=1)
    cdf = norm.cdf(z)
    grid_hi = np.arange(1, n + 1) / n
    grid_lo = np.arange(0, n) / n
    d_plus = (grid_hi - cdf).max(axis=1)
    d_minus = (cdf - grid_lo).max(axis=1)
    return np.maximum(d_plus, d_minus)


def lilliefors_normality(sample, n_mc: int = 10000, seed: int = 0) -> float:
    """Monte-Carlo Lilliefors p-value: is the sample plausibly Gaussian?

    The statistic is the KS distance between the standardized sample and the
    standard normal CDF; the p-value is the fraction of n_mc standardized
    Gaussian samples of the same size with a strictly larger statistic.
    """
    sample = np.asarray(sample, dtype=np.float64)
    if sample.size < 5:
        raise ValueError("need at least 5 observations")
    observed = float(_ks_normal_stat(sample[None, :])[0])
    table = _null_ks_table(sample.size, n_mc, seed)
    n_larger = table.size - np.searchsorted(table, observed, side="right")
    return float(n_larger) / n_mc


def resample_correlations(
    frame: SeriesFrame,
    pool: list[Coordinate],
    target_series: str,
    hp: HyperParams,
    R: int,
    base_seed: int,
    train_range: tuple[int, int],
    query_times,
    n_mc: int = 10000,
) -> ResampleReport:
    """Correlation(combined, truth) across R independently partitioned refits.

    Replicate r redraws one partition with seed base_seed + r and repeats the
    prediction on the fixed train/test split. The report summarizes the R
    correlations: mean, sd, normal QQ pairs, a Monte-Carlo Lilliefors
    normality p-value, and the rough 95% bound mean +/- 1.96 sd.
    """
    if R < 2:
        raise ValueError("R must be >= 2")
    query_times = np.asarray(query_times, dtype=np.int64)
    correlations = np.empty(R)
    truth_checked = False
    for r in range(1, R + 1):
        hp_r = replace(hp, seed=base_seed + r, n_partitions=1)
        result = ensemble_predict(frame, pool, target_series, hp_r, train_range, query_times)
        if not truth_checked:
            truth = result.truth[np.isfinite(result.truth)]
            if truth.size < 2 or truth.std() == 0:
                raise ValueError("degenerate truth: zero variance on the test block")
            truth_checked = True
        correlations[r - 1] = pearson(result.combined, result.truth)

    mean = float(correlations.mean())
    sd = float(correlations.std(ddof=1))
    order = np.argsort(correlations)
    positions = (np.arange(1, R + 1) - 0.5) / R
    theoretical = norm.ppf(positions)
    standardized = (correlations[order] - mean) / sd if sd > 0 else np.zeros(R)
    qq_pairs = np.column_stack([theoretical, standardized])
    ks_p = lilliefors_normality(correlations, n_mc=n_mc, seed=base_seed) if sd > 0 else 0.0
    return ResampleReport(correlations, mean, sd, qq_pairs, ks_p, (mean, 1.96 * sd))


def variance_scaling_check(
    frame: SeriesFrame,
    pool: list[Coordinate],
    target_series: str,
    hp: HyperParams,
    sizes: tuple[int, int],
    R: int,
    base_seed: int = 0,
) -> float:
    """var(correlations at the small test size) / var(at the large test size).

    Each size s gets its own split: the last s timestamps are the predicted
    targets, everything earlier is the training block. If prediction points
    act independently the ratio should track sizes[1] / sizes[0].
    """
    small, large = sizes
    if not small < large:
        raise ValueError("sizes must satisfy sizes[0] < sizes[1]")
    variances = []
    for s in (small, large):
        target_times = frame.times[-s:]
        query_times = np.asarray(target_times, dtype=np.int64) - hp.horizon
        train_range = (int(frame.times[0]), int(target_times[0]) - 1)
        report = resample_correlations(
            frame, pool, target_series, hp, R, base_seed, train_range, query_times
        )
        variances.append(float(np.var(report.correlations, ddof=1)))
    return variances[0] / variances[1]
