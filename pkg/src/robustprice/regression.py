"""Least-squares price models, error metrics and the four-model comparison."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Sequence, TextIO

import numpy as np

from .config import PipelineConfig, SplitConfig
from .errors import DimensionError, EmptyInputError, InsufficientDataError, RankError, SplitError, UndefinedStatisticError
from .features import FeatureMatrix, build_features, removed_mask, fit_standardizer, pca_fit, pca_transform, transform_standardize
from .filtering import iqr_filter_series, rpca_filter_series
from .ingest import SeriesTable
from .outliers import OutlierReport

__all__ = [
    "SplitConfig", "RegressionModel", "EvalReport", "chronological_split", "ols_fit", "predict",
    "rmse", "r2", "evaluate", "run_model_suite", "compare_models", "write_reports_csv", "format_report_table",
]

MIN_FEATURE_ROWS = 50
MODEL_LABELS = {
    1: "7 raw features, no outlier removal",
    2: "7 raw features, IQR removal",
    3: "7 raw features, IQR then RPCA removal",
    4: "PCA features, IQR then RPCA removal",
}


@dataclass(frozen=True, eq=False)
class RegressionModel:
    intercept: float
    coefficients: np.ndarray
    feature_names: tuple[str, ...]


def chronological_split(x: FeatureMatrix, config: SplitConfig | None = None) -> tuple[FeatureMatrix, FeatureMatrix]:
    """First ``ceil(train_fraction * n)`` rows train, the rest test."""
    config = config or SplitConfig()
    n = len(x)
    if n < 2:
        raise SplitError(f"need at least 2 rows to split, got {n}")
    n_train = math.ceil(config.train_fraction * n)
    if not 0 < n_train < n:
        raise SplitError(f"train_fraction {config.train_fraction} leaves an empty partition of {n} rows")
    return x.take(slice(0, n_train)), x.take(slice(n_train, n))


def ols_fit(x, y, feature_names: Sequence[str] | None = None) -> RegressionModel:
    """Least squares with intercept, solved through a QR factorisation.

    Raises RankError when a diagonal entry of R falls below 1e-10 times the
    largest, naming the offending column.
    """
    X = np.asarray(x, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    y = np.asarray(y, dtype=np.float64).ravel()
    n, d = X.shape
    if y.size != n:
        raise DimensionError(f"{n} rows but {y.size} targets")
    if n <= d + 1:
        raise InsufficientDataError(f"need more than {d + 1} rows for {d} features, got {n}")
    names = tuple(feature_names) if feature_names is not None else tuple(f"x{j}" for j in range(d))
    A = np.column_stack([np.ones(n), X])
    q, r = np.linalg.qr(A)
    diag = np.abs(np.diag(r))
    bad = np.flatnonzero(diag < 1e-10 * diag.max())
    if bad.size:
        j = int(bad[0])
        col = "intercept" if j == 0 else names[j - 1]
        raise RankError(f"design matrix is rank deficient at column {col!r}", column=col)
    beta = np.linalg.solve(r, q.T @ y)
    return RegressionModel(float(beta[0]), beta[1:], names)


def predict(model: RegressionModel, x) -> np.ndarray:
    X = np.asarray(x, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :] if model.coefficients.size > 1 else X[:, None]
    if X.shape[1] != model.coefficients.size:
        raise DimensionError(f"expected {model.coefficients.size} columns, got {X.shape[1]}")
    return model.intercept + X @ model.coefficients


def _pair(actual, predicted) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(actual, dtype=np.float64).ravel()
    p = np.asarray(predicted, dtype=np.float64).ravel()
    if a.size != p.size:
        raise DimensionError(f"length mismatch: {a.size} vs {p.size}")
    if a.size == 0:
        raise EmptyInputError("empty input")
    return a, p


def rmse(actual, predicted) -> float:
    a, p = _pair(actual, predicted)
    return math.sqrt(float(np.mean((a - p) ** 2)))


def r2(actual, predicted) -> float:
    a, p = _pair(actual, predicted)
    if a.size < 2:
        raise DimensionError("R² needs at least 2 points")
    ss_tot = float(np.sum((a - a.mean()) ** 2))
    if ss_tot == 0.0:
        raise UndefinedStatisticError("R² undefined for constant actual values")
    return 1.0 - float(np.sum((a - p) ** 2)) / ss_tot


@dataclass(frozen=True)
class EvalReport:
    model_id: int
    train_rmse: float
    test_rmse: float
    train_r2: float
    test_r2: float
    n_train: int
    n_test: int
    outliers_removed: int

    @property
    def label(self) -> str:
        return MODEL_LABELS.get(self.model_id, f"model {self.model_id}")


def evaluate(model_id: int, x: FeatureMatrix, split: SplitConfig, outliers_removed: int,
             pca_k: int | None = None) -> EvalReport:
    """Split, fit OLS on the training part and score both parts.

    With ``pca_k`` the features are standardised and projected on the first
    ``pca_k`` principal axes, both fitted on the training rows only.
    """
    train, test = chronological_split(x, split)
    xtr, xte = train.values, test.values
    names = x.names
    if pca_k is not None:
        st = fit_standardizer(train)
        ztr = transform_standardize(st, train)
        pca = pca_fit(ztr, pca_k)
        xtr = pca_transform(pca, ztr)
        xte = pca_transform(pca, transform_standardize(st, test))
        names = tuple(f"pc{j + 1}" for j in range(pca_k))
    model = ols_fit(xtr, train.target, names)
    ptr, pte = predict(model, xtr), predict(model, xte)
    return EvalReport(
        model_id,
        rmse(train.target, ptr),
        rmse(test.target, pte),
        r2(train.target, ptr),
        r2(test.target, pte),
        len(train),
        len(test),
        int(outliers_removed),
    )


@dataclass(frozen=True, eq=False)
class SuiteResult:
    reports: list[EvalReport]
    iqr_report: object
    rpca: object


def run_model_suite(series: SeriesTable, config: PipelineConfig | None = None, details: bool = False):
    """Fit and score the four model variants.

    1. raw features, no filtering; 2. raw features after IQR removal;
    3. raw features after IQR then RPCA removal; 4. PCA features after IQR
    then RPCA removal. Filters run on the full series before the split.
    Returns the four reports ordered by model id, or a ``SuiteResult`` with
    the filter outputs when ``details`` is true.
    """
    config = config or PipelineConfig()
    iqr = iqr_filter_series(series, config.iqr_k, config.iqr_per_hour)
    iqr_mask = np.zeros(len(series), bool)
    iqr_mask[iqr.rows] = True
    rp = rpca_filter_series(series, config.rpca, exclude=iqr_mask)
    reports = compare_models(series, iqr, rp.report, config)
    if details:
        return SuiteResult(reports, iqr, rp)
    return reports


def compare_models(series: SeriesTable, iqr: OutlierReport, rpca: OutlierReport,
                   config: PipelineConfig) -> list[EvalReport]:
    """Score the four models given already computed IQR and RPCA reports."""
    raw = build_features(series)
    after_iqr = build_features(series, [iqr])
    after_both = build_features(series, [iqr, rpca])
    n_both = int(np.count_nonzero(removed_mask(series, [iqr, rpca])))
    feats = {1: (raw, 0), 2: (after_iqr, len(iqr)), 3: (after_both, n_both), 4: (after_both, n_both)}
    for mid, (fm, _) in feats.items():
        if len(fm) < MIN_FEATURE_ROWS:
            raise InsufficientDataError(
                f"model {mid}: only {len(fm)} feature rows after filtering (need {MIN_FEATURE_ROWS})")
    reports = []
    for mid in (1, 2, 3, 4):
        fm, removed = feats[mid]
        k = config.pca.k if mid == 4 and config.pca.enabled else None
        reports.append(evaluate(mid, fm, config.split, removed, pca_k=k))
    return reports


REPORT_HEADER = ("model", "train_rmse", "test_rmse", "train_r2", "test_r2", "n_train", "n_test", "outliers_removed")


def write_reports_csv(reports: Sequence[EvalReport], dest: TextIO) -> None:
    w = csv.writer(dest, lineterminator="\n")
    w.writerow(REPORT_HEADER)
    for r in reports:
        w.writerow([r.model_id, repr(r.train_rmse), repr(r.test_rmse), repr(r.train_r2), repr(r.test_r2),
                    r.n_train, r.n_test, r.outliers_removed])


def format_report_table(reports: Sequence[EvalReport]) -> str:
    """Aligned plain-text table, one row per model."""
    head = ("S/N", "Model Method", "Training RMSE", "Test RMSE", "Training R²", "Test R²")
    rows = [(str(r.model_id), r.label, f"{r.train_rmse:.2f}", f"{r.test_rmse:.2f}",
             f"{r.train_r2:.2f}", f"{r.test_r2:.2f}") for r in reports]
    widths = [max(len(c) for c in col) for col in zip(head, *rows)]

    def fmt(cells):
        out = [cells[0].rjust(widths[0]), cells[1].ljust(widths[1])]
        out += [c.rjust(w) for c, w in zip(cells[2:], widths[2:])]
        return "  ".join(out).rstrip()

    rule = "-" * len(fmt(head))
    return "\n".join([fmt(head), rule, *(fmt(r) for r in rows)]) + "\n"
