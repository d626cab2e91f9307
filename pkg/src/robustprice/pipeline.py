"""End-to-end batch run: ingest, stats, filters, boxplots, features, models, report."""
from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field

import numpy as np

from .boxplot import boxplot_stats, render_svg, write_boxplot_csv
from .config import PipelineConfig
from .errors import InputError, RobustPriceError
from .features import removed_mask
from .filtering import RPCAResult, iqr_filter_series, rpca_filter_series
from .ingest import ColumnSchema, SeriesTable, all_yearly_stats, parse_hourly_csv, pearson_correlation, write_stats_csv
from .outliers import OutlierReport
from .regression import compare_models, format_report_table, write_reports_csv
from .synth import SynthResult, SynthSpec, synth_generate

logger = logging.getLogger(__name__)


class StageError(RobustPriceError):
    """A pipeline stage failed; ``stage`` names it and ``cause`` is the original error."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause

    @property
    def is_input_error(self) -> bool:
        return isinstance(self.cause, (InputError, FileNotFoundError, IsADirectoryError, PermissionError))


@dataclass
class RunSummary:
    out_dir: str
    artifacts: list[str] = field(default_factory=list)
    info: dict = field(default_factory=dict)

    def path(self, name: str) -> str:
        return os.path.join(self.out_dir, name)

    def write_text(self, name: str, text: str) -> None:
        with open(self.path(name), "w", newline="") as fh:
            fh.write(text)
        self.artifacts.append(name)

    def open(self, name: str):
        self.artifacts.append(name)
        return open(self.path(name), "w", newline="")


def load_series(config: PipelineConfig) -> tuple[SeriesTable, SynthResult | None]:
    """Read ``config.input`` or generate from ``config.synth`` (default synthetic when neither is set)."""
    if config.input is not None:
        if not os.path.isfile(config.input):
            raise FileNotFoundError(f"input file not found: {config.input}")
        sc = config.schema
        with open(config.input, newline="") as fh:
            return parse_hourly_csv(fh, ColumnSchema(sc.timestamp, sc.price, sc.load, sc.delimiter)), None
    synth = synth_generate(SynthSpec.parse(config.synth or "default", seed=config.seed))
    return synth.observed, synth


def _stage(name: str):
    def wrap(fn):
        def run(*args, **kwargs):
            logger.info("stage %s", name)
            try:
                return fn(*args, **kwargs)
            except StageError:
                raise
            except (RobustPriceError, OSError, ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
                raise StageError(name, exc) from exc
        return run
    return wrap


def _write_boxplots(summary: RunSummary, tag: str, series: SeriesTable, keep, title: str) -> None:
    stats = boxplot_stats(series, "hour", keep)
    with summary.open(f"boxplot_{tag}.csv") as fh:
        write_boxplot_csv(stats, fh)
    summary.write_text(f"boxplot_{tag}.svg", render_svg(stats, title, "hour of day"))


def _write_report(summary: RunSummary, name: str, report: OutlierReport) -> None:
    with summary.open(name) as fh:
        report.to_csv(fh)


def run_pipeline(config: PipelineConfig) -> RunSummary:
    """Run every stage, writing artifacts under ``config.out``.

    On failure a ``FAILED`` marker naming the stage is left next to whatever
    partial artifacts were written, and ``StageError`` is raised.
    """
    os.makedirs(config.out, exist_ok=True)
    summary = RunSummary(config.out)
    marker = summary.path("FAILED")
    if os.path.exists(marker):
        os.remove(marker)
    try:
        _run(config, summary)
    except StageError as exc:
        with open(marker, "w") as fh:
            fh.write(f"{exc.stage}\n{exc.cause}\n")
        raise
    return summary


def _run(config: PipelineConfig, summary: RunSummary) -> None:
    summary.write_text("effective_config.json", config.to_json())

    series, synth = _stage("ingest")(load_series)(config)
    summary.info["observations"] = len(series)
    if series.rejected_rows:
        summary.info["rejected_rows"] = list(series.rejected_rows)
    if synth is not None:
        summary.info["noise_rmse"] = synth.noise_rmse
        summary.info["spikes_injected"] = int(synth.spike_locations.size)

    @_stage("stats")
    def stats():
        rows = all_yearly_stats(series)
        with summary.open("stats.csv") as fh:
            write_stats_csv(rows, fh)
        loads = ~np.isnan(series.load)
        if loads.sum() >= 2:
            try:
                summary.info["price_load_correlation"] = pearson_correlation(series.price[loads], series.load[loads])
            except RobustPriceError as exc:
                logger.warning("correlation skipped: %s", exc)
    stats()

    _stage("boxplot_before")(_write_boxplots)(summary, "before", series, None, "Hourly prices before outlier removal")

    @_stage("filter_iqr")
    def filter_iqr() -> OutlierReport:
        rep = iqr_filter_series(series, config.iqr_k, config.iqr_per_hour)
        _write_report(summary, "outliers_iqr.csv", rep)
        return rep
    iqr = filter_iqr()
    iqr_mask = removed_mask(series, [iqr])

    @_stage("filter_rpca")
    def filter_rpca() -> RPCAResult:
        res = rpca_filter_series(series, config.rpca, exclude=iqr_mask)
        _write_report(summary, "outliers_rpca.csv", res.report)
        res.decomposition.save(summary.path("decomposition"))
        summary.artifacts += [f"decomposition/{n}" for n in ("low_rank.csv", "sparse.csv", "decomposition.json")]
        summary.info["rpca"] = {
            "lambda": res.decomposition.lam,
            "iterations": res.decomposition.iterations,
            "converged": res.decomposition.converged,
            "residual": res.decomposition.residual,
        }
        return res
    rp = filter_rpca()
    both_mask = removed_mask(series, [iqr, rp.report])

    @_stage("boxplot_after")
    def boxplot_after():
        _write_boxplots(summary, "iqr", series, ~iqr_mask, "Hourly prices after IQR removal (1.5*IQR)")
        _write_boxplots(summary, "rpca", series, ~both_mask, "Hourly prices after IQR and robust PCA removal")
    boxplot_after()

    reports = _stage("model_suite")(compare_models)(series, iqr, rp.report, config)

    @_stage("report")
    def report():
        with summary.open("report.csv") as fh:
            write_reports_csv(reports, fh)
        summary.write_text("report.txt", format_report_table(reports))
    report()

    summary.info["outliers"] = {"iqr": len(iqr), "rpca": len(rp.report)}
    summary.artifacts.append("summary.json")
    body = {"artifacts": summary.artifacts, **summary.info}
    with open(summary.path("summary.json"), "w") as fh:
        json.dump(body, fh, indent=2, sort_keys=True)
        fh.write("\n")
