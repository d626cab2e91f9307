"""Tukey boxplot statistics per group and a dependency-free SVG renderer."""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from typing import Sequence, TextIO
from xml.sax.saxutils import escape

import numpy as np

from . import __version__
from .errors import EmptyInputError
from .ingest import SeriesTable
from .outliers import iqr_bounds

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class BoxplotStats:
    key: int
    count: int
    q1: float
    median: float
    q3: float
    whisker_low: float
    whisker_high: float
    outliers: np.ndarray


def box_stats(key: int, values, k: float = 1.5) -> BoxplotStats:
    """Quartiles, whiskers at the extreme data inside the k*IQR fences, and the rest as outliers."""
    v = np.sort(np.asarray(values, dtype=np.float64))
    b = iqr_bounds(v, k)
    inside = v[(v >= b.lower) & (v <= b.upper)]
    median = float(np.quantile(v, 0.5))
    return BoxplotStats(key, v.size, b.q1, median, b.q3, float(inside.min()), float(inside.max()),
                        v[(v < b.lower) | (v > b.upper)])


def boxplot_stats(series: SeriesTable, group_by: str = "hour", keep: np.ndarray | None = None) -> list[BoxplotStats]:
    """One entry per hour of day (0-23) or per calendar year.

    ``keep`` optionally restricts to a subset of observations; groups left
    empty are skipped with a logged notice.
    """
    if len(series) == 0:
        raise EmptyInputError("boxplot of empty series")
    if group_by == "hour":
        keys, all_keys = series.hours, range(24)
    elif group_by == "year":
        keys = series.years
        all_keys = [int(y) for y in np.unique(keys)]
    else:
        raise ValueError(f"group_by must be 'hour' or 'year', got {group_by!r}")
    price = series.price
    if keep is not None:
        keep = np.asarray(keep, dtype=bool)
        keys, price = keys[keep], price[keep]
    out = []
    for g in all_keys:
        vals = price[keys == g]
        if vals.size == 0:
            logger.warning("boxplot group %s is empty, skipped", g)
            continue
        out.append(box_stats(int(g), vals))
    return out


BOX_HEADER = ("group", "count", "q1", "median", "q3", "whisker_low", "whisker_high", "n_outliers", "outliers")


def write_boxplot_csv(stats: Sequence[BoxplotStats], dest: TextIO) -> None:
    w = csv.writer(dest, lineterminator="\n")
    w.writerow(BOX_HEADER)
    for s in stats:
        w.writerow([s.key, s.count, repr(s.q1), repr(s.median), repr(s.q3), repr(s.whisker_low),
                    repr(s.whisker_high), s.outliers.size, " ".join(repr(x) for x in s.outliers.tolist())])


def _nice_ticks(lo: float, hi: float, n: int = 6) -> list[float]:
    span = hi - lo if hi > lo else 1.0
    raw = span / n
    mag = 10 ** np.floor(np.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=10 * mag)
    start = np.ceil(lo / step) * step
    return [float(t) for t in np.arange(start, hi + step * 0.5, step) if lo <= t <= hi]


def render_svg(stats: Sequence[BoxplotStats], title: str, x_label: str = "hour",
               width: int = 900, height: int = 420) -> str:
    """Static SVG box-and-whisker chart. Output is deterministic for fixed input."""
    ml, mr, mt, mb = 60, 20, 40, 50
    pw, ph = width - ml - mr, height - mt - mb
    if stats:
        lo = min(min(s.whisker_low, s.outliers.min(initial=s.whisker_low)) for s in stats)
        hi = max(max(s.whisker_high, s.outliers.max(initial=s.whisker_high)) for s in stats)
    else:
        lo, hi = 0.0, 1.0
    if hi <= lo:
        lo, hi = lo - 1.0, hi + 1.0
    pad = 0.04 * (hi - lo)
    lo, hi = lo - pad, hi + pad

    def y(v):
        return mt + ph * (hi - v) / (hi - lo)

    n = max(len(stats), 1)
    slot = pw / n
    bw = slot * 0.6
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f"<!-- robustprice {__version__} -->",
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="22" text-anchor="middle" font-family="sans-serif" font-size="15">{escape(title)}</text>',
        f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{mt + ph}" stroke="black"/>',
        f'<line x1="{ml}" y1="{mt + ph}" x2="{ml + pw}" y2="{mt + ph}" stroke="black"/>',
    ]
    for t in _nice_ticks(lo, hi):
        parts.append(f'<line x1="{ml - 4}" y1="{y(t):.2f}" x2="{ml}" y2="{y(t):.2f}" stroke="black"/>')
        parts.append(f'<text x="{ml - 6}" y="{y(t) + 4:.2f}" text-anchor="end" font-family="sans-serif" '
                     f'font-size="10">{t:g}</text>')
    for i, s in enumerate(stats):
        cx = ml + slot * (i + 0.5)
        x0 = cx - bw / 2
        parts.append(f'<line x1="{cx:.2f}" y1="{y(s.whisker_high):.2f}" x2="{cx:.2f}" y2="{y(s.q3):.2f}" stroke="black"/>')
        parts.append(f'<line x1="{cx:.2f}" y1="{y(s.q1):.2f}" x2="{cx:.2f}" y2="{y(s.whisker_low):.2f}" stroke="black"/>')
        for w in (s.whisker_low, s.whisker_high):
            parts.append(f'<line x1="{cx - bw / 4:.2f}" y1="{y(w):.2f}" x2="{cx + bw / 4:.2f}" y2="{y(w):.2f}" stroke="black"/>')
        parts.append(f'<rect x="{x0:.2f}" y="{y(s.q3):.2f}" width="{bw:.2f}" height="{max(y(s.q1) - y(s.q3), 0.5):.2f}" '
                     f'fill="#9ecae1" stroke="black"/>')
        parts.append(f'<line x1="{x0:.2f}" y1="{y(s.median):.2f}" x2="{x0 + bw:.2f}" y2="{y(s.median):.2f}" '
                     f'stroke="#08306b" stroke-width="2"/>')
        for o in s.outliers.tolist():
            parts.append(f'<circle cx="{cx:.2f}" cy="{y(o):.2f}" r="1.8" fill="none" stroke="#d62728"/>')
        parts.append(f'<text x="{cx:.2f}" y="{mt + ph + 16}" text-anchor="middle" font-family="sans-serif" '
                     f'font-size="10">{s.key}</text>')
    parts.append(f'<text x="{ml + pw / 2:.1f}" y="{height - 10}" text-anchor="middle" font-family="sans-serif" '
                 f'font-size="12">{escape(x_label)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
