"""Seeded synthetic data: stand-ins for licensed market data and station records."""

from __future__ import annotations

import numpy as np

from .frame import SeriesFrame


def geometric_random_walk(
    n: int,
    seed: int,
    drift: float = 0.0002,
    vol: float = 0.01,
    s0: float = 100.0,
) -> SeriesFrame:
    """Daily index levels following a geometric random walk (column `close`).

    Timestamps are trading-day indices 0..n-1. This is the schema user-supplied
    daily exports should match: columns (time, close), one row per trading day.
    """
    if n < 2:
        raise ValueError("need at least 2 days")
    rng = np.random.default_rng(seed)
    log_returns = drift + vol * rng.standard_normal(n - 1)
    levels = s0 * np.exp(np.concatenate([[0.0], np.cumsum(log_returns)]))
    return SeriesFrame(np.arange(n, dtype=np.int64), {"close": levels})


def climate_like_monthly(
    n_months: int,
    seed: int,
    start_year: int = 1960,
    signal_strength: float = 1.0,
    noise: float = 0.6,
) -> SeriesFrame:
    """Monthly precipitation-like series driven by two slow climate-like indices.

    `prcp` carries a seasonal cycle plus a lagged response to `enso` (12
    months) and `pdo` (14 months), so a 1-year-ahead forecast from index lags
    has real but modest skill. Calendar tags are populated; times are
    year * 12 + (month - 1).
    """
    if n_months < 30:
        raise ValueError("need at least 30 months")
    rng = np.random.default_rng(seed)
    pad = 24
    total = n_months + pad

    enso = np.empty(total)
    pdo = np.empty(total)
    enso[0] = rng.standard_normal()
    pdo[0] = rng.standard_normal()
    shocks = rng.standard_normal((2, total))
    for t in range(1, total):
        enso[t] = 0.92 * enso[t - 1] + 0.4 * shocks[0, t]
        pdo[t] = 0.85 * pdo[t - 1] + 0.5 * shocks[1, t]

    month_index = np.arange(total) % 12
    seasonal = 2.0 + 1.5 * np.sin(2 * np.pi * month_index / 12.0)
    eps = rng.standard_normal(total)
    prcp = np.empty(total)
    for t in range(total):
        response = 0.0
        if t >= 14:
            response = signal_strength * (0.8 * enso[t - 12] - 0.5 * pdo[t - 14])
        prcp[t] = seasonal[t] + response + noise * eps[t]

    keep = slice(pad, total)
    months = month_index[keep] + 1
    years = start_year + (np.arange(pad, total) // 12)
    times = years * 12 + (months - 1)
    return SeriesFrame(
        times.astype(np.int64),
        {"prcp": prcp[keep], "enso": enso[keep], "pdo": pdo[keep]},
        years=years.astype(np.int64),
        months=months.astype(np.int64),
    )
