"""Daily in/out market-timing backtest with proportional costs and biennial tax."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class StrategyConfig:
    """Trading frictions: per-trade proportional cost and periodic capital-gains tax.

    The tax is assessed every tax_period trading days on gains over the
    basis; the basis resets to the post-tax value at every assessment, so
    losses are not carried forward unless carry_losses is set.
    """

    cost_frac: float = 0.003
    tax_rate: float = 0.36
    tax_period: int = 504
    initial_value: float = 1.0
    start_time: int = 0
    carry_losses: bool = False

    def __post_init__(self) -> None:
        if not 0 <= self.cost_frac < 1:
            raise ValueError("cost_frac must lie in [0, 1)")
        if not 0 <= self.tax_rate < 1:
            raise ValueError("tax_rate must lie in [0, 1)")
        if self.tax_period < 1:
            raise ValueError("tax_period must be >= 1")
        if self.initial_value <= 0:
            raise ValueError("initial_value must be positive")


@dataclass(frozen=True)
class Ledger:
    """Daily accounting: stance, portfolio value, and cumulative frictions."""

    times: np.ndarray
    position: np.ndarray
    value: np.ndarray
    trades: int
    costs_paid: np.ndarray
    taxes_paid: np.ndarray

    def __post_init__(self) -> None:
        n = self.times.size
        for name in ("position", "value", "costs_paid", "taxes_paid"):
            if getattr(self, name).shape != (n,):
                raise ValueError(f"{name} must match times")
        if np.any(self.value <= 0):
            raise ValueError("portfolio value must stay positive")

    @property
    def final_value(self) -> float:
        return float(self.value[-1])

    def to_csv(self, path: str | Path) -> None:
        lines = ["time,position,value,costs_paid,taxes_paid"]
        for i in range(self.times.size):
            stance = "in" if self.position[i] else "out"
            lines.append(
                f"{int(self.times[i])},{stance},{self.value[i]:.17g},"
                f"{self.costs_paid[i]:.17g},{self.taxes_paid[i]:.17g}"
            )
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def signal_from_predictions(preds) -> np.ndarray:
    """In/out stance per day from predicted next-day changes.

    Negative prediction: out. Positive: in. Zero (or missing): hold the
    previous stance. The initial stance is in.
    """
    preds = np.asarray(preds, dtype=np.float64)
    positions = np.empty(preds.size, dtype=bool)
    prev = True
    for i, pred in enumerate(preds):
        if np.isfinite(pred) and pred < 0:
            prev = False
        elif np.isfinite(pred) and pred > 0:
            prev = True
        positions[i] = prev
    return positions


def run_backtest(prices, positions, cfg: StrategyConfig, times=None) -> Ledger:
    """Mark a $1-style portfolio through the day-by-day stance sequence.

    Day t-1 to t: while in, value tracks the price relative. A stance change
    multiplies value by exactly (1 - cost_frac). Every tax_period days,
    tax_rate is taken off gains over the basis and the basis resets to the
    post-tax value. positions[0] is the starting stance, entered free.
    """
    prices = np.asarray(prices, dtype=np.float64)
    positions = np.asarray(positions, dtype=bool)
    if prices.shape != positions.shape:
        raise ValueError("prices and positions must have equal length")
    if np.any(prices <= 0):
        raise ValueError("prices must be positive")
    n = prices.size
    if times is None:
        times = cfg.start_time + np.arange(n, dtype=np.int64)
    times = np.asarray(times, dtype=np.int64)

    value = np.empty(n)
    costs = np.empty(n)
    taxes = np.empty(n)
    value[0] = cfg.initial_value
    costs[0] = 0.0
    taxes[0] = 0.0
    basis = cfg.initial_value
    trades = 0

    for t in range(1, n):
        v = value[t - 1]
        if positions[t - 1]:
            v *= prices[t] / prices[t - 1]
        cost_hit = 0.0
        if positions[t] != positions[t - 1]:
            after = v * (1.0 - cfg.cost_frac)
            cost_hit = v - after
            v = after
            trades += 1
        tax_hit = 0.0
        if cfg.tax_rate > 0 and t % cfg.tax_period == 0:
            gain = v - basis
            if gain > 0:
                tax_hit = cfg.tax_rate * gain
                v -= tax_hit
            if gain > 0 or not cfg.carry_losses:
                basis = v
        value[t] = v
        costs[t] = costs[t - 1] + cost_hit
        taxes[t] = taxes[t - 1] + tax_hit

    return Ledger(times, positions.copy(), value, trades, costs, taxes)


def buy_and_hold(prices, cfg: StrategyConfig, times=None) -> Ledger:
    """Always-in reference run; zero trades, taxes still assessed if configured."""
    prices = np.asarray(prices, dtype=np.float64)
    return run_backtest(prices, np.ones(prices.size, dtype=bool), cfg, times)
