"""Command-line front end.

Usage: robustprice <subcommand> [--config FILE] [--input FILE | --synth SPEC]
[--seed N] [--out DIR] [--iqr-k F] [--lambda-mode paper|maxdim|F] [--pca-k N]
[--train-frac F]

Exit codes: 0 success, 1 computation failure, 2 usage or input error.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys

import numpy as np

from . import __version__, kernels
from .boxplot import boxplot_stats, render_svg, write_boxplot_csv
from .config import PipelineConfig, with_overrides
from .errors import ConfigError, DomainError, InputError, RobustPriceError
from .features import build_features, explained_variance_ratio, fit_standardizer, pca_fit, removed_mask, transform_standardize
from .filtering import iqr_filter_series, rpca_filter_series
from .ingest import all_yearly_stats, pearson_correlation, write_series_csv, write_stats_csv
from .outliers import KDEConfig, kde_anomalies, kde_loo_scores
from .pipeline import StageError, load_series, run_pipeline
from .synth import SynthSpec, synth_generate

logger = logging.getLogger("robustprice")

EXIT_OK, EXIT_COMPUTE, EXIT_USAGE = 0, 1, 2


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file; flags override its values")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--input", help="hourly CSV input")
    src.add_argument("--synth", help="'default', a JSON spec path, or key=value,... overrides")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output directory")
    p.add_argument("--iqr-k", type=float)
    p.add_argument("--lambda-mode", help="paper, maxdim, or an explicit positive number")
    p.add_argument("--pca-k", type=int)
    p.add_argument("--train-frac", type=float)
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="robustprice", description="Outlier-robust day-ahead price forecasting.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({kernels.BACKEND} kernels)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", help="yearly descriptive statistics and price/load correlation")
    _common(p)
    p = sub.add_parser("boxplot", help="boxplot statistics (CSV + SVG)")
    _common(p)
    p.add_argument("--group-by", choices=("hour", "year"), default="hour")
    p = sub.add_parser("filter-iqr", help="Tukey IQR outlier filter")
    _common(p)
    p = sub.add_parser("filter-rpca", help="robust PCA outlier filter")
    _common(p)
    p.add_argument("--after-iqr", action="store_true", help="mask IQR outliers before decomposing")
    p = sub.add_parser("kde-score", help="leave-one-out kernel density scores")
    _common(p)
    p.add_argument("--bandwidth", default="auto")
    p.add_argument("--quantile", type=float, default=0.01)
    p = sub.add_parser("pca", help="fit PCA on the standardised raw features")
    _common(p)
    p = sub.add_parser("forecast", help="full pipeline: filters, features, four-model report")
    _common(p)
    p = sub.add_parser("synth", help="write a synthetic series")
    _common(p)
    return parser


def resolve_config(args: argparse.Namespace) -> PipelineConfig:
    cfg = PipelineConfig()
    if args.config:
        with open(args.config) as fh:
            cfg = PipelineConfig.from_json(fh.read())
    return with_overrides(
        cfg,
        input=args.input,
        synth=args.synth,
        seed=args.seed,
        out=args.out,
        iqr_k=args.iqr_k,
        lambda_mode=args.lambda_mode,
        pca_k=args.pca_k,
        train_frac=args.train_frac,
    )


def _outfile(cfg: PipelineConfig, name: str):
    os.makedirs(cfg.out, exist_ok=True)
    return open(os.path.join(cfg.out, name), "w", newline="")


def cmd_stats(cfg, args):
    series, _ = load_series(cfg)
    rows = all_yearly_stats(series)
    with _outfile(cfg, "stats.csv") as fh:
        write_stats_csv(rows, fh)
    for r in rows:
        print(f"{r.year}  count={r.count}  mean={r.mean:.2f}  std={r.std:.2f}  min={r.min:.2f}  max={r.max:.2f}")
    has_load = ~np.isnan(series.load)
    if has_load.sum() >= 2:
        print(f"price/load correlation: {pearson_correlation(series.price[has_load], series.load[has_load]):.3f}")


def cmd_boxplot(cfg, args):
    series, _ = load_series(cfg)
    stats = boxplot_stats(series, args.group_by)
    with _outfile(cfg, "boxplot_before.csv") as fh:
        write_boxplot_csv(stats, fh)
    with _outfile(cfg, "boxplot_before.svg") as fh:
        fh.write(render_svg(stats, f"Prices by {args.group_by}", args.group_by))
    print(f"{len(stats)} groups written to {cfg.out}")


def cmd_filter_iqr(cfg, args):
    series, _ = load_series(cfg)
    rep = iqr_filter_series(series, cfg.iqr_k, cfg.iqr_per_hour)
    with _outfile(cfg, "outliers_iqr.csv") as fh:
        rep.to_csv(fh)
    print(f"{len(rep)} of {len(series)} observations outside the {cfg.iqr_k}*IQR fences {rep.fences}")


def cmd_filter_rpca(cfg, args):
    series, _ = load_series(cfg)
    exclude = None
    if args.after_iqr:
        exclude = removed_mask(series, [iqr_filter_series(series, cfg.iqr_k, cfg.iqr_per_hour)])
    res = rpca_filter_series(series, cfg.rpca, exclude=exclude)
    with _outfile(cfg, "outliers_rpca.csv") as fh:
        res.report.to_csv(fh)
    res.decomposition.save(os.path.join(cfg.out, "decomposition"))
    d = res.decomposition
    print(f"lambda={d.lam:.6g} iterations={d.iterations} converged={d.converged} residual={d.residual:.3g}; "
          f"{len(res.report)} cells flagged")
    if not d.converged:
        return EXIT_COMPUTE


def cmd_kde_score(cfg, args):
    series, _ = load_series(cfg)
    try:
        bw = args.bandwidth if args.bandwidth == "auto" else float(args.bandwidth)
        kc = KDEConfig(bandwidth=bw)
    except (ValueError, DomainError) as exc:
        raise ConfigError(f"--bandwidth: {exc}") from exc
    if not 0 < args.quantile < 1:
        raise ConfigError(f"--quantile must be in (0, 1), got {args.quantile}")
    scores, h = kde_loo_scores(series.price, kc)
    rep = kde_anomalies(series.price, kc, args.quantile)
    stamps = np.datetime_as_string(series.timestamps, unit="m")
    with _outfile(cfg, "kde_scores.csv") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("timestamp", "price", "density"))
        for t, p, s in zip(stamps, series.price.tolist(), scores.tolist()):
            w.writerow((t, repr(p), repr(s)))
    with _outfile(cfg, "outliers_kde.csv") as fh:
        rep.to_csv(fh)
    print(f"bandwidth={h:.6g}; {len(rep)} points below the {args.quantile} density quantile")


def cmd_pca(cfg, args):
    series, _ = load_series(cfg)
    fm = build_features(series)
    st = fit_standardizer(fm)
    model = pca_fit(transform_standardize(st, fm), cfg.pca.k)
    from dataclasses import replace
    model = replace(model, standardizer=st)
    with _outfile(cfg, "pca_model.json") as fh:
        fh.write(model.to_json())
    ratios = explained_variance_ratio(model)
    for j, r in enumerate(ratios, 1):
        print(f"PC{j}: {r:.4f}")
    print(f"cumulative: {ratios.sum():.4f}")


def cmd_forecast(cfg, args):
    summary = run_pipeline(cfg)
    with open(os.path.join(cfg.out, "report.txt")) as fh:
        sys.stdout.write(fh.read())
    if "noise_rmse" in summary.info:
        print(f"generator noise RMSE: {summary.info['noise_rmse']:.3f}")
    print(f"artifacts in {cfg.out}")


def cmd_synth(cfg, args):
    res = synth_generate(SynthSpec.parse(cfg.synth or "default", seed=cfg.seed))
    with _outfile(cfg, "observed.csv") as fh:
        write_series_csv(res.observed, fh)
    with _outfile(cfg, "clean.csv") as fh:
        write_series_csv(res.clean, fh)
    stamps = np.datetime_as_string(res.observed.timestamps[res.spike_locations], unit="m")
    with _outfile(cfg, "spikes.csv") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("index", "timestamp", "spike"))
        for i, t, s in zip(res.spike_locations.tolist(), stamps, res.spike_values.tolist()):
            w.writerow((i, t, repr(s)))
    print(f"{len(res.observed)} hours, {res.spike_locations.size} spikes, noise RMSE {res.noise_rmse:.3f}")


COMMANDS = {
    "stats": cmd_stats,
    "boxplot": cmd_boxplot,
    "filter-iqr": cmd_filter_iqr,
    "filter-rpca": cmd_filter_rpca,
    "kde-score": cmd_kde_score,
    "pca": cmd_pca,
    "forecast": cmd_forecast,
    "synth": cmd_synth,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
        if args.command in ("synth",) and cfg.input is not None:
            raise InputError("synth does not take --input")
        return COMMANDS[args.command](cfg, args) or EXIT_OK
    except StageError as exc:
        print(f"robustprice: {exc}", file=sys.stderr)
        return EXIT_USAGE if exc.is_input_error else EXIT_COMPUTE
    except (InputError, FileNotFoundError, IsADirectoryError, PermissionError, json.JSONDecodeError) as exc:
        print(f"robustprice: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (RobustPriceError, ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
        print(f"robustprice: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
