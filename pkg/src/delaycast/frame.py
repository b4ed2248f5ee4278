"""Time-indexed series container and the transforms the forecasting apps need."""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

_ISO_MONTH = re.compile(r"^(\d{4})-(\d{2})$")


@dataclass(frozen=True)
class SeriesFrame:
    """Immutable multivariate series on a strictly increasing integer time index.

    Cells are float64 and NaN marks a missing cell (a cell is either a finite
    real or missing, never both; infinities are rejected). Optional per-row
    calendar tags (year, month) ride along for monthly data.
    """

    times: np.ndarray
    columns: dict[str, np.ndarray]
    years: np.ndarray | None = None
    months: np.ndarray | None = None

    def __post_init__(self) -> None:
        times = np.asarray(self.times, dtype=np.int64)
        if times.ndim != 1:
            raise ValueError("times must be one-dimensional")
        if times.size > 1:
            steps = np.diff(times)
            if np.any(steps <= 0):
                bad = int(times[1:][steps <= 0][0])
                raise ValueError(
                    f"times must be strictly increasing; offending timestamp {bad}"
                )
        times.setflags(write=False)
        object.__setattr__(self, "times", times)

        cols: dict[str, np.ndarray] = {}
        for name, values in self.columns.items():
            arr = np.asarray(values, dtype=np.float64)
            if arr.shape != times.shape:
                raise ValueError(
                    f"column {name!r} has length {arr.size}, expected {times.size}"
                )
            if np.any(np.isinf(arr)):
                raise ValueError(
                    f"column {name!r} contains infinities; use NaN for missing cells"
                )
            arr = arr.copy()
            arr.setflags(write=False)
            cols[name] = arr
        object.__setattr__(self, "columns", cols)

        for tag in ("years", "months"):
            raw = getattr(self, tag)
            if raw is None:
                continue
            arr = np.asarray(raw, dtype=np.int64)
            if arr.shape != times.shape:
                raise ValueError(f"{tag} must align with times")
            arr.setflags(write=False)
            object.__setattr__(self, tag, arr)

    def __len__(self) -> int:
        return self.times.size

    @property
    def column_names(self) -> list[str]:
        return list(self.columns)

    @property
    def has_calendar(self) -> bool:
        return self.years is not None and self.months is not None

    def column(self, name: str) -> np.ndarray:
        if name not in self.columns:
            raise ValueError(f"no column {name!r}; have {sorted(self.columns)}")
        return self.columns[name]

    def missing(self, name: str) -> np.ndarray:
        """Boolean missing-cell markers for one column."""
        return np.isnan(self.column(name))

    def positions_of(self, times: np.ndarray) -> np.ndarray:
        """Row positions of the given timestamps, -1 where a timestamp is absent."""
        times = np.asarray(times, dtype=np.int64)
        pos = np.searchsorted(self.times, times)
        pos_clipped = np.clip(pos, 0, self.times.size - 1)
        found = self.times[pos_clipped] == times
        return np.where(found, pos_clipped, -1)

    def with_columns(self, replacements: dict[str, np.ndarray]) -> "SeriesFrame":
        cols = dict(self.columns)
        cols.update(replacements)
        return SeriesFrame(self.times, cols, self.years, self.months)

    def restrict(self, t_lo: int, t_hi: int) -> "SeriesFrame":
        """Rows with t_lo <= time <= t_hi."""
        keep = (self.times >= t_lo) & (self.times <= t_hi)
        cols = {name: arr[keep] for name, arr in self.columns.items()}
        years = self.years[keep] if self.years is not None else None
        months = self.months[keep] if self.months is not None else None
        return SeriesFrame(self.times[keep], cols, years, months)


def _parse_time_cell(cell: str) -> tuple[int, int | None, int | None]:
    """One raw time cell -> (epoch index, year tag, month tag)."""
    cell = cell.strip()
    m = _ISO_MONTH.match(cell)
    if m:
        year, month = int(m.group(1)), int(m.group(2))
        if not 1 <= month <= 12:
            raise ValueError(f"month out of range in time cell {cell!r}")
        return year * 12 + (month - 1), year, month
    try:
        return int(cell), None, None
    except ValueError:
        raise ValueError(
            f"unparseable time cell {cell!r}; expected an integer or ISO YYYY-MM"
        ) from None


def _parse_value_cell(cell: str) -> float:
    # Empty, NA, or junk all become missing; the post-condition wants no crashes
    # on dirty numeric cells.
    try:
        value = float(cell)
    except ValueError:
        return np.nan
    return value if np.isfinite(value) else np.nan


def ingest_csv(path: str | Path, columns: Sequence[str], time_column: str = "time") -> SeriesFrame:
    """Load a UTF-8 CSV with a header row into a SeriesFrame.

    The time column holds integers or ISO YYYY-MM stamps (which also populate
    calendar tags). Cells that do not parse as numbers (empty, NA, junk)
    become missing. Rows are sorted by time; duplicate timestamps are
    rejected.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        header = reader.fieldnames or []
        for required in [time_column, *columns]:
            if required not in header:
                raise ValueError(f"column {required!r} not in CSV header {header}")
        times: list[int] = []
        years: list[int | None] = []
        months: list[int | None] = []
        values: dict[str, list[float]] = {name: [] for name in columns}
        for row in reader:
            t, y, m = _parse_time_cell(row[time_column])
            times.append(t)
            years.append(y)
            months.append(m)
            for name in columns:
                values[name].append(_parse_value_cell(row[name]))

    times_arr = np.asarray(times, dtype=np.int64)
    uniq, counts = np.unique(times_arr, return_counts=True)
    if np.any(counts > 1):
        dup = int(uniq[counts > 1][0])
        raise ValueError(f"duplicate timestamp {dup} in {path}")
    order = np.argsort(times_arr)

    tagged = [y is not None for y in years]
    if any(tagged) and not all(tagged):
        raise ValueError(f"mixed calendar and integer time cells in {path}")
    if all(tagged) and times_arr.size:
        years_arr = np.asarray(years, dtype=np.int64)[order]
        months_arr = np.asarray(months, dtype=np.int64)[order]
    else:
        years_arr = months_arr = None

    cols = {name: np.asarray(vals, dtype=np.float64)[order] for name, vals in values.items()}
    return SeriesFrame(times_arr[order], cols, years_arr, months_arr)


def align_join(frames: Sequence[SeriesFrame]) -> SeriesFrame:
    """Inner-join frames on their timestamps.

    Column names must be globally unique. The output time axis is the sorted
    intersection of the inputs'; an empty intersection is an error naming the
    disjoint ranges.
    """
    if not frames:
        raise ValueError("align_join needs at least one frame")
    seen: set[str] = set()
    for frame in frames:
        for name in frame.columns:
            if name in seen:
                raise ValueError(f"duplicate column {name!r} across joined frames")
            seen.add(name)

    common = frames[0].times
    for frame in frames[1:]:
        common = np.intersect1d(common, frame.times)
    if common.size == 0:
        ranges = ", ".join(
            f"[{f.times[0]}..{f.times[-1]}]" if len(f) else "[empty]" for f in frames
        )
        raise ValueError(f"joined frames share no timestamps; ranges {ranges}")

    cols: dict[str, np.ndarray] = {}
    years = months = None
    for frame in frames:
        pos = frame.positions_of(common)
        for name, arr in frame.columns.items():
            cols[name] = arr[pos]
        if frame.has_calendar and years is None:
            years = frame.years[pos]
            months = frame.months[pos]
    return SeriesFrame(common, cols, years, months)


def monthly_means(frame: SeriesFrame, column: str, train_range: tuple[int, int]) -> dict[int, float]:
    """Per-calendar-month means of a column inside [t_lo, t_hi].

    Missing cells are excluded from the means. Every calendar month must
    occur (with at least one observed value) inside the training range.
    """
    if not frame.has_calendar:
        raise ValueError("monthly means need calendar month tags")
    t_lo, t_hi = train_range
    in_train = (frame.times >= t_lo) & (frame.times <= t_hi)
    values = frame.column(column)
    means: dict[int, float] = {}
    for month in range(1, 13):
        pick = in_train & (frame.months == month) & ~np.isnan(values)
        if not np.any(pick):
            raise ValueError(
                f"calendar month {month} absent from training range [{t_lo}..{t_hi}]"
            )
        means[month] = float(values[pick].mean())
    return means


def monthly_anomaly(frame: SeriesFrame, column: str, train_range: tuple[int, int]) -> SeriesFrame:
    """Subtract train-range calendar-month means from a column.

    Means come only from rows inside train_range, so no information leaks
    from later data; they apply to every row of the output.
    """
    means = monthly_means(frame, column, train_range)
    values = frame.column(column)
    shift = np.array([means[int(m)] for m in frame.months], dtype=np.float64)
    return frame.with_columns({column: values - shift})


def first_difference(frame: SeriesFrame, column: str) -> SeriesFrame:
    """One-step forward differences: value at time t is x[t+1] - x[t].

    The output holds the differenced column only, on the first n-1
    timestamps; a difference touching a missing cell is missing.
    """
    values = frame.column(column)
    if values.size < 2:
        raise ValueError("first_difference needs at least 2 rows")
    diff = values[1:] - values[:-1]
    years = frame.years[:-1] if frame.years is not None else None
    months = frame.months[:-1] if frame.months is not None else None
    return SeriesFrame(frame.times[:-1], {column: diff}, years, months)
