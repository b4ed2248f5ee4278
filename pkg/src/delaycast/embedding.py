"""Delay-coordinate map specs, seeded disjoint partitions, and design matrices."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .frame import SeriesFrame


@dataclass(frozen=True, order=True)
class Coordinate:
    """One lagged observable: a column name and recorded steps back from base time."""

    series: str
    lag: int

    def __post_init__(self) -> None:
        if self.lag < 0:
            raise ValueError("lag must be nonnegative")


@dataclass(frozen=True)
class DelayMapSpec:
    """An ordered set of p coordinates predicting one series h steps ahead."""

    coords: tuple[Coordinate, ...]
    target_series: str
    horizon: int

    def __post_init__(self) -> None:
        coords = tuple(self.coords)
        object.__setattr__(self, "coords", coords)
        if len(set(coords)) != len(coords):
            raise ValueError("coordinates must be pairwise distinct")
        if self.horizon < 1:
            raise ValueError("target horizon must be >= 1 recorded steps ahead")

    @property
    def p(self) -> int:
        return len(self.coords)

    @property
    def max_lag(self) -> int:
        return max(c.lag for c in self.coords)


@dataclass(frozen=True)
class Partition:
    """Pairwise-disjoint delay maps drawn from one coordinate pool with one seed."""

    specs: tuple[DelayMapSpec, ...]
    pool: tuple[Coordinate, ...]
    seed: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "specs", tuple(self.specs))
        object.__setattr__(self, "pool", tuple(self.pool))
        pool_set = set(self.pool)
        claimed: set[Coordinate] = set()
        for spec in self.specs:
            coords = set(spec.coords)
            if coords & claimed:
                overlap = sorted(coords & claimed)
                raise ValueError(f"specs share coordinates: {overlap}")
            if not coords <= pool_set:
                raise ValueError("spec uses coordinates outside the pool")
            claimed |= coords

    def manifest(self) -> str:
        """Text manifest (seed, p, pool hash, spec list) for reproducibility."""
        pool_key = ";".join(f"{c.series}:{c.lag}" for c in self.pool)
        pool_hash = hashlib.sha256(pool_key.encode()).hexdigest()[:16]
        p = self.specs[0].p if self.specs else 0
        lines = [f"seed={self.seed}", f"p={p}", f"pool_sha256={pool_hash}"]
        for i, spec in enumerate(self.specs):
            coords = ",".join(f"{c.series}:{c.lag}" for c in spec.coords)
            lines.append(
                f"spec[{i}] target={spec.target_series}+{spec.horizon} coords={coords}"
            )
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class DesignMatrix:
    """Realized regression data for one spec: X rows, responses, and base times."""

    X: np.ndarray
    y: np.ndarray
    base_times: np.ndarray

    def __post_init__(self) -> None:
        X = np.ascontiguousarray(self.X, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.float64)
        base = np.asarray(self.base_times, dtype=np.int64)
        if X.ndim != 2 or y.shape != (X.shape[0],) or base.shape != y.shape:
            raise ValueError("X, y, base_times shapes disagree")
        for arr in (X, y, base):
            arr.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "base_times", base)

    @property
    def n_eff(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]


def enumerate_pool(series: list[str], max_lag: int) -> list[Coordinate]:
    """All (series, lag) pairs for lags 1..max_lag, in deterministic order."""
    if not series:
        raise ValueError("need at least one series name")
    if max_lag < 1:
        raise ValueError("max_lag must be >= 1")
    return [Coordinate(s, lag) for s in series for lag in range(1, max_lag + 1)]


def sample_disjoint_partition(
    pool: list[Coordinate],
    p: int,
    target: tuple[str, int],
    seed: int,
) -> Partition:
    """Shuffle the pool with the seeded RNG and cut consecutive blocks of size p.

    Yields floor(|pool| / p) strictly distinct specs; remainder coordinates
    are left unused so every spec has exactly dimension p.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    if p > len(pool):
        raise ValueError(f"p={p} exceeds pool size {len(pool)}")
    target_series, horizon = target
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(pool))
    shuffled = [pool[i] for i in order]
    n_specs = len(pool) // p
    specs = tuple(
        DelayMapSpec(tuple(shuffled[i * p : (i + 1) * p]), target_series, horizon)
        for i in range(n_specs)
    )
    return Partition(specs, tuple(pool), seed)


def lagged_values(frame: SeriesFrame, coord: Coordinate, base_times: np.ndarray) -> np.ndarray:
    """Values of a coordinate's series at base_time - lag; NaN where absent or missing."""
    pos = frame.positions_of(np.asarray(base_times, dtype=np.int64) - coord.lag)
    values = frame.column(coord.series)
    out = np.where(pos >= 0, values[np.clip(pos, 0, None)], np.nan)
    return out


def design_rows(
    frame: SeriesFrame, spec: DelayMapSpec, base_times: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """X, y, and a completeness mask for a spec at the given base times.

    y is NaN where the target cell is absent; the mask marks rows whose
    p lagged predictor cells are all present.
    """
    base_times = np.asarray(base_times, dtype=np.int64)
    X = np.column_stack([lagged_values(frame, c, base_times) for c in spec.coords])
    target_pos = frame.positions_of(base_times + spec.horizon)
    target_col = frame.column(spec.target_series)
    y = np.where(target_pos >= 0, target_col[np.clip(target_pos, 0, None)], np.nan)
    x_ok = ~np.isnan(X).any(axis=1)
    return X, y, x_ok


def build_design(frame: SeriesFrame, spec: DelayMapSpec) -> DesignMatrix:
    """One row per base time where all p lagged cells and the target cell exist.

    With a gap-free frame and nothing missing this leaves
    n - max_lag - horizon rows.
    """
    X, y, x_ok = design_rows(frame, spec, frame.times)
    keep = x_ok & ~np.isnan(y)
    if not np.any(keep):
        raise ValueError(
            f"empty design: no base time has all lags (max {spec.max_lag}) and "
            f"the target {spec.horizon} ahead"
        )
    return DesignMatrix(X[keep], y[keep], frame.times[keep])
