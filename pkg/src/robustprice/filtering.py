"""Outlier filters applied to an hourly series, returning timestamped reports."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import RPCAConfig
from .ingest import PriceMatrix, SeriesTable, build_price_matrix
from .outliers import (
    OutlierReport,
    SparseDecomposition,
    iqr_bounds,
    iqr_filter,
    resolve_lambda,
    rpca_decompose,
    sparse_outliers,
)


def iqr_filter_series(series: SeriesTable, k: float = 1.5, per_hour: bool = False) -> OutlierReport:
    """Tukey-fence the prices, globally or separately for each hour of day."""
    if not per_hour:
        _, rep = iqr_filter(series.price, k)
        return OutlierReport("iqr", rep.rows, None, rep.values, k, rep.fences, series.timestamps[rep.rows])
    hours = series.hours
    flagged = []
    for h in np.unique(hours):
        pos = np.flatnonzero(hours == h)
        b = iqr_bounds(series.price[pos], k)
        v = series.price[pos]
        flagged.append(pos[(v < b.lower) | (v > b.upper)])
    rows = np.sort(np.concatenate(flagged)) if flagged else np.empty(0, np.int64)
    return OutlierReport("iqr", rows, None, series.price[rows], k, None, series.timestamps[rows])


@dataclass(frozen=True, eq=False)
class RPCAResult:
    matrix: PriceMatrix | np.ndarray
    decomposition: SparseDecomposition
    report: OutlierReport


def rpca_filter_series(series: SeriesTable, config: RPCAConfig | None = None,
                       exclude: np.ndarray | None = None) -> RPCAResult:
    """Decompose the day x hour price matrix and flag cells with sparse mass.

    ``exclude`` marks observations already removed upstream; they become
    masked, imputed cells that are never flagged. In ``doy`` layout the
    matrix is a single column of daily mean prices, and a flagged day removes
    all of its hours.
    """
    config = config or RPCAConfig()
    pm = build_price_matrix(series, exclude)
    if config.layout == "day_hour":
        M = pm
        shape = pm.shape
    else:
        present = ~pm.mask
        daily = (np.where(present, pm.values, 0.0).sum(axis=1) / present.sum(axis=1))[:, None]
        M = daily
        shape = daily.shape
    lam = resolve_lambda(config.lambda_mode, shape)
    dec = rpca_decompose(M, lam, config.tolerance, int(config.max_iterations), config.mu_growth)
    rep = sparse_outliers(dec, M, config.delta_factor)
    if config.layout == "doy":
        day_rows = rep.rows
        cells = pm.obs_index[day_rows]
        pos = np.sort(cells[cells >= 0])
        rep = OutlierReport("rpca", pos, None, series.price[pos], rep.threshold_used,
                            timestamps=series.timestamps[pos])
    return RPCAResult(M, dec, rep)
