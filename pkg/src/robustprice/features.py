"""Day-ahead feature construction, standardisation and PCA."""
from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import date
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError, DomainError, InsufficientDataError, ZeroVarianceError
from .ingest import SeriesTable
from .outliers import OutlierReport

FEATURE_NAMES = ("yday_price", "yday_load", "yave_load", "month", "dow", "dom", "doy")
_DAY = np.timedelta64(24, "h")


@dataclass(frozen=True)
class FeatureRow:
    yday_price: float
    yday_load: float
    yave_load: float
    month: int
    dow: int
    dom: int
    doy: int
    target_price: float
    timestamp: np.datetime64


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    """Feature rows in timestamp order; ``values`` columns follow FEATURE_NAMES."""

    values: np.ndarray
    target: np.ndarray
    timestamps: np.ndarray
    names: tuple[str, ...] = FEATURE_NAMES

    def __len__(self):
        return self.target.size

    def row(self, i: int) -> FeatureRow:
        v = self.values[i]
        return FeatureRow(float(v[0]), float(v[1]), float(v[2]), int(v[3]), int(v[4]), int(v[5]), int(v[6]),
                          float(self.target[i]), self.timestamps[i])

    def take(self, idx) -> FeatureMatrix:
        return FeatureMatrix(self.values[idx], self.target[idx], self.timestamps[idx], self.names)


def removed_mask(series: SeriesTable, removed: Iterable[OutlierReport]) -> np.ndarray:
    """Boolean mask over ``series`` marking observations flagged in ``removed``."""
    mask = np.zeros(len(series), bool)
    for report in removed:
        if report.timestamps is None:
            raise ValueError(f"{report.method} report carries no timestamps")
        pos = series.index_of(report.timestamps)
        mask[pos[pos >= 0]] = True
    return mask


def calendar_fields(timestamps) -> np.ndarray:
    """(month, dow, dom, doy) per timestamp; dow runs Monday=1 .. Sunday=7."""
    ts = np.asarray(timestamps, dtype="datetime64[m]")
    days = ts.astype("datetime64[D]")
    months = ts.astype("datetime64[M]")
    years = ts.astype("datetime64[Y]")
    month = months.astype(np.int64) % 12 + 1
    dom = (days - months.astype("datetime64[D]")).astype(np.int64) + 1
    doy = (days - years.astype("datetime64[D]")).astype(np.int64) + 1
    # 1970-01-01 was a Thursday
    dow = (days.astype(np.int64) + 3) % 7 + 1
    return np.column_stack([month, dow, dom, doy]).astype(np.float64)


def build_features(series: SeriesTable, removed: Iterable[OutlierReport] | np.ndarray = ()) -> FeatureMatrix:
    """One row per target hour t that has an observation at t - 24h.

    Rows are dropped when t or t - 24h is among the removed observations
    (``removed`` is a sequence of timestamped reports or a boolean mask) or
    when yesterday's load is missing. ``yave_load`` is the mean of all loads
    present on the previous calendar day.
    """
    dates = series.dates
    if len(series) == 0 or np.unique(dates).size < 2:
        raise InsufficientDataError("feature building needs at least 2 days of data")
    if isinstance(removed, np.ndarray):
        gone = removed.astype(bool)
    else:
        gone = removed_mask(series, removed)

    prev = series.index_of(series.timestamps - _DAY)
    ok = (prev >= 0) & ~gone
    ok[ok] &= ~gone[prev[ok]]

    uniq_days, day_pos = np.unique(dates, return_inverse=True)
    has_load = ~np.isnan(series.load)
    n_load = np.bincount(day_pos, weights=has_load, minlength=uniq_days.size)
    load_sum = np.bincount(day_pos, weights=np.where(has_load, series.load, 0.0), minlength=uniq_days.size)
    with np.errstate(invalid="ignore", divide="ignore"):
        day_mean_load = load_sum / n_load
    prev_day = np.searchsorted(uniq_days, dates - np.timedelta64(1, "D"))
    prev_day_c = np.minimum(prev_day, uniq_days.size - 1)
    prev_day_ok = uniq_days[prev_day_c] == dates - np.timedelta64(1, "D")
    yave = np.where(prev_day_ok, day_mean_load[prev_day_c], np.nan)

    p = np.maximum(prev, 0)
    yday_load = series.load[p]
    ok &= ~np.isnan(yday_load) & ~np.isnan(yave)

    idx = np.flatnonzero(ok)
    values = np.column_stack([
        series.price[p[idx]],
        yday_load[idx],
        yave[idx],
        calendar_fields(series.timestamps[idx]),
    ])
    return FeatureMatrix(values, series.price[idx].copy(), series.timestamps[idx].copy())


# -- standardisation ---------------------------------------------------------

def _as_matrix(x) -> tuple[np.ndarray, Sequence[str]]:
    if isinstance(x, FeatureMatrix):
        return x.values, x.names
    a = np.asarray(x, dtype=np.float64)
    if a.ndim == 1:
        a = a[:, None]
    return a, tuple(f"x{j}" for j in range(a.shape[1]))


@dataclass(frozen=True, eq=False)
class Standardizer:
    means: np.ndarray
    scales: np.ndarray
    names: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {"means": self.means.tolist(), "scales": self.scales.tolist(), "names": list(self.names)}

    @classmethod
    def from_dict(cls, d: dict) -> Standardizer:
        return cls(np.array(d["means"], dtype=np.float64), np.array(d["scales"], dtype=np.float64),
                   tuple(d.get("names", ())))


def fit_standardizer(x) -> Standardizer:
    a, names = _as_matrix(x)
    if a.shape[0] < 2:
        raise InsufficientDataError("standardizer needs at least 2 rows")
    means = a.mean(axis=0)
    scales = a.std(axis=0, ddof=1)
    for j, s in enumerate(scales):
        if not s > 0:
            raise ZeroVarianceError(f"column {names[j]!r} has zero variance", column=names[j])
    return Standardizer(means, scales, tuple(names))


def transform_standardize(s: Standardizer, x) -> np.ndarray:
    a, _ = _as_matrix(x)
    if a.shape[1] != s.means.size:
        raise DimensionError(f"expected {s.means.size} columns, got {a.shape[1]}")
    return (a - s.means) / s.scales


def inverse_standardize(s: Standardizer, z) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    if z.shape[-1] != s.means.size:
        raise DimensionError(f"expected {s.means.size} columns, got {z.shape[-1]}")
    return z * s.scales + s.means


# -- PCA ---------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PCAModel:
    """Fitted principal axes.

    ``loadings`` is d x k with orthonormal columns; ``eigenvalues`` holds the
    full covariance spectrum (length d), so ratios can be reported for every
    component even though only k are retained.
    """

    center: np.ndarray
    loadings: np.ndarray
    eigenvalues: np.ndarray
    k: int
    standardizer: Standardizer | None = None

    def to_json(self) -> str:
        d = {
            "center": self.center.tolist(),
            "loadings": self.loadings.tolist(),
            "eigenvalues": self.eigenvalues.tolist(),
            "k": self.k,
            "standardizer": None if self.standardizer is None else self.standardizer.to_dict(),
        }
        return json.dumps(d, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> PCAModel:
        d = json.loads(text)
        st = None if d.get("standardizer") is None else Standardizer.from_dict(d["standardizer"])
        loadings = np.array(d["loadings"], dtype=np.float64).reshape(len(d["center"]), d["k"])
        return cls(np.array(d["center"], dtype=np.float64), loadings,
                   np.array(d["eigenvalues"], dtype=np.float64), int(d["k"]), st)


def pca_fit(x, k: int = 5) -> PCAModel:
    """Principal axes of ``x`` from the SVD of the centred data.

    Eigenvalues are ``s**2 / (n - 1)``. Each loading is signed so that its
    largest-magnitude entry is positive.
    """
    a, _ = _as_matrix(x)
    n, d = a.shape
    if n < 2:
        raise InsufficientDataError("PCA needs at least 2 rows")
    if not 1 <= k <= d:
        raise DomainError(f"k must be in [1, {d}], got {k}")
    center = a.mean(axis=0)
    _, s, vt = np.linalg.svd(a - center, full_matrices=False)
    eig = np.zeros(d)
    eig[: s.size] = s ** 2 / (n - 1)
    loadings = vt[:k].T.copy()
    for j in range(k):
        i = int(np.argmax(np.abs(loadings[:, j])))
        if loadings[i, j] < 0:
            loadings[:, j] = -loadings[:, j]
    return PCAModel(center, loadings, eig, k)


def pca_transform(model: PCAModel, x) -> np.ndarray:
    a, _ = _as_matrix(x)
    if a.shape[1] != model.center.size:
        raise DimensionError(f"expected {model.center.size} columns, got {a.shape[1]}")
    return (a - model.center) @ model.loadings


def pca_inverse(model: PCAModel, scores) -> np.ndarray:
    return np.asarray(scores, dtype=np.float64) @ model.loadings.T + model.center


def explained_variance_ratio(model: PCAModel, all_components: bool = False) -> np.ndarray:
    """Fraction of total variance per component (first k unless ``all_components``)."""
    total = model.eigenvalues.sum()
    ratios = model.eigenvalues / total if total > 0 else np.zeros_like(model.eigenvalues)
    return ratios if all_components else ratios[: model.k]


def doy_of(year: int, month: int, dom: int) -> int:
    return date(year, month, dom).timetuple().tm_yday
