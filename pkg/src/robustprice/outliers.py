"""Anomaly filters: Tukey IQR fences, robust PCA (principal component pursuit), KDE scoring."""
from __future__ import annotations

import csv
import json
import logging
import math
import os
from dataclasses import dataclass, field
from typing import TextIO

import numpy as np

from . import kernels
from .errors import DataError, DimensionError, DomainError, EmptyInputError
from .ingest import PriceMatrix

logger = logging.getLogger(__name__)


# -- reports ---------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class OutlierReport:
    """Flagged data points from one detector.

    ``rows``/``cols`` locate each flagged value; ``cols`` is None for 1-D
    inputs, in which case ``rows`` holds flat positions. ``timestamps`` is
    filled in when the flagged values map back to hourly observations.
    """

    method: str
    rows: np.ndarray
    cols: np.ndarray | None
    values: np.ndarray
    threshold_used: float
    fences: tuple[float, float] | None = None
    timestamps: np.ndarray | None = None

    def __post_init__(self):
        if self.method not in ("iqr", "rpca", "kde"):
            raise ValueError(f"unknown method tag {self.method!r}")
        rows = np.asarray(self.rows, dtype=np.int64)
        values = np.asarray(self.values, dtype=np.float64)
        if rows.shape != values.shape:
            raise DimensionError("locations and values differ in length")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "values", values)
        if self.cols is not None:
            object.__setattr__(self, "cols", np.asarray(self.cols, dtype=np.int64))

    def __len__(self):
        return self.values.size

    @property
    def locations(self) -> list:
        if self.cols is None:
            return self.rows.tolist()
        return list(zip(self.rows.tolist(), self.cols.tolist()))

    def _row_threshold(self, v: float) -> float:
        if self.fences is not None:
            return self.fences[0] if v < self.fences[0] else self.fences[1]
        return self.threshold_used

    def to_csv(self, dest: TextIO) -> None:
        w = csv.writer(dest, lineterminator="\n")
        w.writerow(("method", "row", "col", "value", "threshold"))
        cols = [""] * len(self) if self.cols is None else self.cols.tolist()
        for r, c, v in zip(self.rows.tolist(), cols, self.values.tolist()):
            w.writerow((self.method, r, c, repr(v), repr(self._row_threshold(v))))


def empty_report(method: str, threshold: float = 0.0) -> OutlierReport:
    return OutlierReport(method, np.empty(0, np.int64), None, np.empty(0), threshold)


# -- IQR -------------------------------------------------------------------

@dataclass(frozen=True)
class IQRBounds:
    q1: float
    q3: float
    iqr: float
    lower: float
    upper: float
    k: float = 1.5


def iqr_bounds(values, k: float = 1.5) -> IQRBounds:
    """Tukey fences ``q1 - k*iqr`` and ``q3 + k*iqr``.

    Quartiles interpolate linearly between order statistics at position
    ``(n - 1) * p``.
    """
    v = np.asarray(values, dtype=np.float64).ravel()
    if v.size == 0:
        raise EmptyInputError("iqr_bounds of empty input")
    if k < 0:
        raise DomainError("k must be non-negative")
    q1, q3 = (float(q) for q in np.quantile(v, [0.25, 0.75], method="linear"))
    iqr = q3 - q1
    return IQRBounds(q1, q3, iqr, q1 - k * iqr, q3 + k * iqr, k)


def iqr_filter(values, k: float = 1.5) -> tuple[np.ndarray, OutlierReport]:
    v = np.asarray(values, dtype=np.float64).ravel()
    b = iqr_bounds(v, k)
    out = (v < b.lower) | (v > b.upper)
    report = OutlierReport("iqr", np.flatnonzero(out), None, v[out], k, fences=(b.lower, b.upper))
    return v[~out], report


# -- robust PCA ------------------------------------------------------------

def default_lambda(n: int) -> float:
    """``1/sqrt(n)`` with ``n`` the number of entries of the data matrix."""
    if n < 1:
        raise DomainError(f"lambda needs n >= 1, got {n}")
    return 1.0 / math.sqrt(n)


def maxdim_lambda(shape) -> float:
    return 1.0 / math.sqrt(max(shape))


def resolve_lambda(mode, shape) -> float:
    """Map a lambda mode (``"paper"``, ``"maxdim"`` or a number) to a value."""
    if mode == "paper":
        return default_lambda(int(np.prod(shape)))
    if mode == "maxdim":
        return maxdim_lambda(shape)
    lam = float(mode)
    if not lam > 0:
        raise DomainError(f"lambda must be positive, got {lam}")
    return lam


def singular_value_threshold(a, tau: float) -> np.ndarray:
    """Proximal operator of ``tau * nuclear norm``: shrink singular values by ``tau``."""
    u, s, vt = np.linalg.svd(np.asarray(a, dtype=np.float64), full_matrices=False)
    s = s - tau
    r = int(np.count_nonzero(s > 0))
    return (u[:, :r] * s[:r]) @ vt[:r]


@dataclass(frozen=True, eq=False)
class SparseDecomposition:
    low_rank: np.ndarray
    sparse: np.ndarray
    lam: float
    iterations: int
    converged: bool
    residual: float
    tolerance: float = 1e-7
    trace: tuple[float, ...] = field(default=(), repr=False)

    @property
    def nuclear_norm(self) -> float:
        return float(np.linalg.svd(self.low_rank, compute_uv=False).sum())

    @property
    def l1_norm(self) -> float:
        return float(np.abs(self.sparse).sum())

    def save(self, directory: str) -> None:
        """Write ``low_rank.csv``, ``sparse.csv`` and ``decomposition.json``."""
        os.makedirs(directory, exist_ok=True)
        for name, mat in (("low_rank.csv", self.low_rank), ("sparse.csv", self.sparse)):
            with open(os.path.join(directory, name), "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                for row in mat.tolist():
                    w.writerow([repr(x) for x in row])
        meta = {
            "lambda": self.lam,
            "iterations": self.iterations,
            "converged": self.converged,
            "residual": self.residual,
            "tolerance": self.tolerance,
            "shape": list(self.low_rank.shape),
        }
        with open(os.path.join(directory, "decomposition.json"), "w") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, directory: str) -> SparseDecomposition:
        with open(os.path.join(directory, "decomposition.json")) as fh:
            meta = json.load(fh)
        mats = []
        for name in ("low_rank.csv", "sparse.csv"):
            with open(os.path.join(directory, name), newline="") as fh:
                mats.append(np.array([[float(x) for x in row] for row in csv.reader(fh)], dtype=np.float64))
        shape = tuple(meta["shape"])
        low, sparse = (m.reshape(shape) for m in mats)
        return cls(low, sparse, meta["lambda"], meta["iterations"], meta["converged"],
                   meta["residual"], meta.get("tolerance", 1e-7))


def rpca_decompose(m, lam: float | None = None, tolerance: float = 1e-7,
                   max_iterations: int = 500, mu_growth: float = 1.1) -> SparseDecomposition:
    """Split ``m`` into low-rank plus sparse parts by principal component pursuit.

    Solves ``min ||L||_* + lam*||S||_1  s.t.  M = L + S`` with the inexact
    augmented Lagrangian method. Each sweep applies singular value
    thresholding at ``1/mu`` to L and soft thresholding at ``lam/mu`` to S,
    takes a dual ascent step, then multiplies ``mu`` by ``mu_growth``.
    Starts from ``mu = 1.25 / sigma_max(M)``.

    Parameters
    ----------
    m : PriceMatrix or array_like
        Data matrix.
    lam : float, optional
        Sparsity weight. Defaults to ``1/sqrt(m.size)``.
    tolerance : float
        Stop once ``||M - L - S||_F / ||M||_F <= tolerance``.
    max_iterations : int
        Iteration budget; exhausting it returns ``converged=False`` with the
        iterate of smallest residual.
    mu_growth : float
        Penalty growth factor per sweep, > 1. Large values stop the iterate
        before the sparse support has settled.
    """
    values = m.values if isinstance(m, PriceMatrix) else m
    M = np.array(values, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] < 1 or M.shape[1] < 1:
        raise DimensionError(f"expected a non-empty 2-D matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise DataError("matrix contains non-finite entries")
    lam = default_lambda(M.size) if lam is None else float(lam)
    if not lam > 0:
        raise DomainError("lambda must be positive")
    if not tolerance > 0:
        raise DomainError("tolerance must be positive")
    if not mu_growth > 1:
        raise DomainError("mu_growth must exceed 1")

    norm_m = float(np.linalg.norm(M))
    if norm_m == 0.0:
        z = np.zeros_like(M)
        return SparseDecomposition(z, z.copy(), lam, 0, True, 0.0, tolerance, ())

    sigma1 = float(np.linalg.norm(M, 2))
    mu = 1.25 / sigma1
    # dual start scaled so that the initial multiplier is dual feasible
    Y = M / max(sigma1, float(np.abs(M).max()) / lam)
    L = np.zeros_like(M)
    S = np.zeros_like(M)
    trace = []
    best = (math.inf, L, S, 0)
    for it in range(1, max_iterations + 1):
        L = singular_value_threshold(M - S + Y / mu, 1.0 / mu)
        S = kernels.soft_threshold(M - L + Y / mu, lam / mu)
        R = M - L - S
        res = float(np.linalg.norm(R)) / norm_m
        trace.append(res)
        if res < best[0]:
            best = (res, L, S, it)
        if res <= tolerance:
            return SparseDecomposition(L, S, lam, it, True, res, tolerance, tuple(trace))
        Y = Y + mu * R
        mu *= mu_growth
    res, L, S, _ = best
    logger.warning("rpca did not converge in %d iterations (residual %.3g)", max_iterations, res)
    return SparseDecomposition(L, S, lam, max_iterations, False, res, tolerance, tuple(trace))


def sparse_outliers(decomposition: SparseDecomposition, source, delta_factor: float = 1e-6) -> OutlierReport:
    """Flag cells where ``|S| > delta_factor * max|M|``.

    Reported values are the original data values; masked (imputed) cells of a
    ``PriceMatrix`` source are never flagged.
    """
    if isinstance(source, PriceMatrix):
        values, mask = source.values, source.mask
    else:
        values = np.asarray(source, dtype=np.float64)
        mask = np.zeros(values.shape, bool)
    if decomposition.sparse.shape != values.shape:
        raise DimensionError(f"decomposition {decomposition.sparse.shape} vs source {values.shape}")
    delta = delta_factor * float(np.abs(values).max()) if values.size else 0.0
    hit = (np.abs(decomposition.sparse) > delta) & ~mask
    r, c = np.nonzero(hit)
    timestamps = None
    if isinstance(source, PriceMatrix):
        timestamps = source.dates[r].astype("datetime64[m]") + c.astype("timedelta64[h]")
    return OutlierReport("rpca", r, c, values[r, c], delta, timestamps=timestamps)


# -- kernel density --------------------------------------------------------

@dataclass(frozen=True)
class KDEConfig:
    kernel: str = "gaussian"
    bandwidth: float | str = "auto"

    def __post_init__(self):
        if self.kernel != "gaussian":
            raise DomainError(f"unsupported kernel {self.kernel!r}")
        if self.bandwidth != "auto" and not float(self.bandwidth) > 0:
            raise DomainError(f"bandwidth must be positive, got {self.bandwidth}")


def silverman_bandwidth(points) -> float:
    """``0.9 * min(std, IQR/1.34) * n**(-1/5)``, floored for degenerate spread."""
    x = np.asarray(points, dtype=np.float64).ravel()
    n = x.size
    if n == 0:
        raise EmptyInputError("bandwidth of empty sample")
    std = float(np.std(x, ddof=1)) if n > 1 else 0.0
    q1, q3 = np.quantile(x, [0.25, 0.75])
    h = 0.9 * min(std, float(q3 - q1) / 1.34) * n ** (-0.2)
    if not h > 0:
        h = 1e-6 * (float(x.max() - x.min()) + 1.0)
    return h


def _resolve_bandwidth(points: np.ndarray, config: KDEConfig) -> float:
    if config.bandwidth == "auto":
        return silverman_bandwidth(points)
    return float(config.bandwidth)


def kde_density(training_points, xs, config: KDEConfig | None = None) -> np.ndarray:
    """Vectorised ``f(x) = 1/(n h) * sum_i K((x - x_i)/h)`` over ``xs``."""
    config = config or KDEConfig()
    p = np.asarray(training_points, dtype=np.float64).ravel()
    if p.size == 0:
        raise EmptyInputError("empty training set")
    h = _resolve_bandwidth(p, config)
    return kernels.gaussian_kde(p, np.atleast_1d(np.asarray(xs, dtype=np.float64)), h)


def kde_score(training_points, x: float, config: KDEConfig | None = None) -> float:
    return float(kde_density(training_points, [x], config)[0])


def kde_loo_scores(points, config: KDEConfig | None = None) -> tuple[np.ndarray, float]:
    """Leave-one-out density of each point and the bandwidth used."""
    config = config or KDEConfig()
    p = np.asarray(points, dtype=np.float64).ravel()
    if p.size < 2:
        raise EmptyInputError("leave-one-out scoring needs at least 2 points")
    h = _resolve_bandwidth(p, config)
    return kernels.gaussian_kde_loo(p, h), h


def kde_anomalies(points, config: KDEConfig | None = None, quantile: float = 0.01) -> OutlierReport:
    """Flag points whose leave-one-out density falls strictly below the
    ``quantile`` of all scores.

    The cutoff is the score order statistic at index ``floor(quantile * n)``,
    so at most that many points are flagged and a vanishing quantile flags
    none.
    """
    p = np.asarray(points, dtype=np.float64).ravel()
    if p.size < 3:
        raise EmptyInputError("kde_anomalies needs at least 3 points")
    if not 0 < quantile < 1:
        raise DomainError("quantile must lie in (0, 1)")
    scores, _ = kde_loo_scores(p, config)
    cutoff = float(np.sort(scores)[math.floor(quantile * p.size)])
    hit = scores < cutoff
    return OutlierReport("kde", np.flatnonzero(hit), None, p[hit], cutoff)
