"""Hourly price/load ingestion, descriptive statistics and day-by-hour shaping."""
from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field
from datetime import datetime
from typing import Iterable, TextIO

import numpy as np

from .errors import (
    DimensionError,
    EmptyInputError,
    EmptyYearError,
    ParseError,
    SchemaError,
    UndefinedStatisticError,
)

logger = logging.getLogger(__name__)

HOURS = 24
_TS_FORMATS = ("%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M")
_MINUTE = np.timedelta64(1, "m")


@dataclass(frozen=True)
class ColumnSchema:
    timestamp: str = "timestamp"
    price: str = "price"
    load: str | None = "load"
    delimiter: str = ","


@dataclass(frozen=True)
class HourlyObservation:
    timestamp: datetime
    price: float
    load: float

    @property
    def hour(self) -> int:
        return self.timestamp.hour


@dataclass(frozen=True, eq=False)
class SeriesTable:
    """Hourly observations sorted by strictly increasing timestamp.

    Stored column-wise: ``timestamps`` is ``datetime64[m]``, ``load`` is NaN
    where the source had no load column. ``rejected_rows`` lists 1-based data
    row numbers dropped for an unparseable price.
    """

    timestamps: np.ndarray
    price: np.ndarray
    load: np.ndarray
    rejected_rows: tuple[int, ...] = ()

    def __post_init__(self):
        ts = np.asarray(self.timestamps, dtype="datetime64[m]")
        price = np.asarray(self.price, dtype=np.float64)
        load = np.asarray(self.load, dtype=np.float64)
        if not (ts.shape == price.shape == load.shape) or ts.ndim != 1:
            raise DimensionError("timestamps, price and load must be 1-D and equal length")
        if ts.size > 1 and not np.all(ts[1:] > ts[:-1]):
            raise ValueError("timestamps must be strictly increasing")
        for name, arr in (("timestamps", ts), ("price", price), ("load", load)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def __len__(self):
        return self.timestamps.size

    def __getitem__(self, i) -> HourlyObservation:
        return HourlyObservation(self.timestamps[i].astype(datetime), float(self.price[i]), float(self.load[i]))

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    def __eq__(self, other):
        if not isinstance(other, SeriesTable):
            return NotImplemented
        return (
            np.array_equal(self.timestamps, other.timestamps)
            and np.array_equal(self.price, other.price)
            and np.array_equal(self.load, other.load, equal_nan=True)
        )

    @property
    def dates(self) -> np.ndarray:
        return self.timestamps.astype("datetime64[D]")

    @property
    def hours(self) -> np.ndarray:
        return ((self.timestamps - self.dates) // np.timedelta64(1, "h")).astype(np.int64)

    @property
    def years(self) -> np.ndarray:
        return self.timestamps.astype("datetime64[Y]").astype(np.int64) + 1970

    def subset(self, keep: np.ndarray) -> SeriesTable:
        keep = np.asarray(keep, dtype=bool)
        return SeriesTable(self.timestamps[keep], self.price[keep], self.load[keep])

    def with_prices(self, price: np.ndarray) -> SeriesTable:
        return SeriesTable(self.timestamps, price, self.load)

    def index_of(self, timestamps) -> np.ndarray:
        """Positions of ``timestamps`` in this table, -1 where absent."""
        ts = np.asarray(timestamps, dtype="datetime64[m]")
        pos = np.searchsorted(self.timestamps, ts)
        pos_c = np.minimum(pos, max(len(self) - 1, 0))
        found = (pos < len(self)) & (self.timestamps[pos_c] == ts) if len(self) else np.zeros(ts.shape, bool)
        return np.where(found, pos_c, -1)


def _parse_timestamp(text: str, row: int) -> datetime:
    text = text.strip()
    for fmt in _TS_FORMATS:
        try:
            return datetime.strptime(text, fmt)
        except ValueError:
            continue
    raise ParseError(f"row {row}: malformed timestamp {text!r}", row=row)


def _parse_float(text: str) -> float | None:
    try:
        v = float(text)
    except (TypeError, ValueError):
        return None
    return v if math.isfinite(v) else None


def from_observations(timestamps, price, load=None, rejected_rows=()) -> SeriesTable:
    """Sort, collapse duplicate timestamps by their mean, and build a table."""
    ts = np.asarray(timestamps, dtype="datetime64[m]")
    price = np.asarray(price, dtype=np.float64)
    load = np.full(price.shape, np.nan) if load is None else np.asarray(load, dtype=np.float64)
    order = np.argsort(ts, kind="stable")
    ts, price, load = ts[order], price[order], load[order]
    uniq, start, counts = np.unique(ts, return_index=True, return_counts=True)
    if uniq.size != ts.size:
        price = np.add.reduceat(price, start) / counts
        with np.errstate(invalid="ignore"):
            load_ok = ~np.isnan(load)
            n_load = np.add.reduceat(load_ok.astype(np.int64), start)
            load_sum = np.add.reduceat(np.where(load_ok, load, 0.0), start)
            load = np.where(n_load > 0, load_sum / np.maximum(n_load, 1), np.nan)
        ts = uniq
    return SeriesTable(ts, price, load, tuple(rejected_rows))


def parse_hourly_csv(source: TextIO | str, schema: ColumnSchema | None = None) -> SeriesTable:
    """Read an hourly series from delimiter-separated text.

    ``source`` is an open text stream or the text itself. Rows whose price
    cannot be parsed are skipped and their 1-based data row numbers kept in
    ``SeriesTable.rejected_rows``; a malformed timestamp is fatal.
    """
    schema = schema or ColumnSchema()
    if isinstance(source, str):
        source = io.StringIO(source)
    reader = csv.reader(source, delimiter=schema.delimiter)
    header = next(reader, None)
    if header is None:
        raise EmptyInputError("input is empty")
    header = [h.strip() for h in header]
    needed = [schema.timestamp, schema.price] + ([schema.load] if schema.load else [])
    missing = [c for c in needed if c not in header]
    if missing:
        raise SchemaError(f"missing configured column(s): {', '.join(missing)}; header is {header}")
    i_ts = header.index(schema.timestamp)
    i_price = header.index(schema.price)
    i_load = header.index(schema.load) if schema.load else None

    stamps, prices, loads, rejected = [], [], [], []
    for row_no, row in enumerate(reader, start=1):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) < len(header):
            raise ParseError(f"row {row_no}: expected {len(header)} fields, got {len(row)}", row=row_no)
        ts = _parse_timestamp(row[i_ts], row_no)
        price = _parse_float(row[i_price])
        if price is None:
            rejected.append(row_no)
            continue
        load = np.nan
        if i_load is not None and row[i_load].strip():
            parsed = _parse_float(row[i_load])
            if parsed is None or parsed < 0:
                raise ParseError(f"row {row_no}: invalid load {row[i_load]!r}", row=row_no)
            load = parsed
        stamps.append(ts)
        prices.append(price)
        loads.append(load)
    if rejected:
        logger.warning("rejected %d row(s) with unparseable price: %s", len(rejected), rejected[:20])
    if not stamps:
        raise EmptyInputError("input has no data rows")
    return from_observations(np.array(stamps, dtype="datetime64[m]"), prices, loads, rejected)


def write_series_csv(series: SeriesTable, dest: TextIO, schema: ColumnSchema | None = None) -> None:
    """Write ``series`` so that ``parse_hourly_csv`` reproduces it bit for bit."""
    schema = schema or ColumnSchema()
    w = csv.writer(dest, delimiter=schema.delimiter, lineterminator="\n")
    cols = [schema.timestamp, schema.price] + ([schema.load] if schema.load else [])
    w.writerow(cols)
    stamps = np.datetime_as_string(series.timestamps, unit="m")
    for ts, p, ld in zip(stamps, series.price.tolist(), series.load.tolist()):
        row = [ts, repr(p)]
        if schema.load:
            row.append("" if math.isnan(ld) else repr(ld))
        w.writerow(row)


@dataclass(frozen=True)
class StatsRow:
    year: int
    count: int
    mean: float
    std: float
    min: float
    max: float


STATS_HEADER = ("year", "count", "mean", "std", "min", "max")


def yearly_descriptive_stats(series: SeriesTable, year: int) -> StatsRow:
    p = series.price[series.years == year]
    if p.size == 0:
        raise EmptyYearError(f"no observations in {year}")
    std = float(np.std(p, ddof=1)) if p.size > 1 else 0.0
    return StatsRow(int(year), int(p.size), float(np.mean(p)), std, float(p.min()), float(p.max()))


def all_yearly_stats(series: SeriesTable) -> list[StatsRow]:
    return [yearly_descriptive_stats(series, int(y)) for y in np.unique(series.years)]


def write_stats_csv(rows: Iterable[StatsRow], dest: TextIO) -> None:
    w = csv.writer(dest, lineterminator="\n")
    w.writerow(STATS_HEADER)
    for r in rows:
        w.writerow([r.year, r.count, repr(r.mean), repr(r.std), repr(r.min), repr(r.max)])


def pearson_correlation(x, y) -> float:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise DimensionError(f"length mismatch: {x.shape} vs {y.shape}")
    if x.size < 2:
        raise DimensionError("need at least 2 points")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise UndefinedStatisticError("correlation undefined for constant input")
    rho = float(dx @ dy) / math.sqrt(sxx * syy)
    return min(1.0, max(-1.0, rho))


@dataclass(frozen=True, eq=False)
class PriceMatrix:
    """Prices laid out one row per calendar day, one column per hour.

    ``obs_index[i, j]`` is the position of the source observation in the
    originating ``SeriesTable`` or -1 for a masked (imputed) cell.
    """

    values: np.ndarray
    dates: np.ndarray
    mask: np.ndarray
    obs_index: np.ndarray
    dropped_dates: tuple = field(default=())

    @property
    def shape(self):
        return self.values.shape


def build_price_matrix(series: SeriesTable, exclude: np.ndarray | None = None) -> PriceMatrix:
    """Shape ``series`` into a days x 24 matrix.

    Cells with no observation (or whose observation is in ``exclude``) are
    masked and imputed with that day's mean of the present hours. A day with
    no present hour at all is dropped and listed in ``dropped_dates``.
    """
    if len(series) == 0:
        raise EmptyInputError("series is empty")
    keep = np.ones(len(series), bool) if exclude is None else ~np.asarray(exclude, dtype=bool)
    dates = series.dates
    hours = series.hours
    all_days = np.unique(dates)
    present_days = np.unique(dates[keep])
    dropped = tuple(str(d) for d in np.setdiff1d(all_days, present_days))
    if dropped:
        logger.warning("dropping %d day(s) with no usable hours: %s", len(dropped), list(dropped[:10]))
    if present_days.size == 0:
        raise EmptyInputError("no usable observations")

    idx = np.full((present_days.size, HOURS), -1, dtype=np.int64)
    rows = np.searchsorted(present_days, dates[keep])
    idx[rows, hours[keep]] = np.flatnonzero(keep)
    mask = idx < 0
    values = np.where(mask, 0.0, series.price[np.maximum(idx, 0)])
    n_present = (~mask).sum(axis=1)
    day_mean = values.sum(axis=1) / n_present
    values = np.where(mask, day_mean[:, None], values)
    return PriceMatrix(values, present_days, mask, idx, dropped)
