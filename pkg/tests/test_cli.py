import csv
import json
import os
import subprocess
import sys

import pytest

from robustprice.cli import main
from robustprice.config import PipelineConfig, RPCAConfig, with_overrides
from robustprice.errors import ConfigError

SMALL = "n_days=120"


def run(tmp_path, *args):
    out = tmp_path / "out"
    return main([*args, "--out", str(out)]), out


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_forecast_golden_path(tmp_path, capsys):
    code, out = run(tmp_path, "forecast", "--synth", SMALL, "--seed", "42")
    assert code == 0
    rows = read_csv(out / "report.csv")
    assert rows[0][0] == "model" and [r[0] for r in rows[1:]] == ["1", "2", "3", "4"]
    m1, m3 = float(rows[1][2]), float(rows[3][2])
    assert m3 < m1
    summary = json.loads((out / "summary.json").read_text())
    for name in summary["artifacts"]:
        assert (out / name).is_file(), name
    for name in ("stats.csv", "boxplot_before.svg", "boxplot_iqr.csv", "boxplot_rpca.svg", "outliers_iqr.csv",
                 "outliers_rpca.csv", "decomposition/decomposition.json", "report.txt", "effective_config.json"):
        assert name in summary["artifacts"]
    assert not (out / "FAILED").exists()
    assert "Model" in capsys.readouterr().out


def test_effective_config_round_trip(tmp_path):
    code, out = run(tmp_path, "forecast", "--synth", SMALL, "--lambda-mode", "0.25", "--pca-k", "3")
    assert code == 0
    cfg = PipelineConfig.from_json((out / "effective_config.json").read_text())
    assert cfg.rpca.lambda_mode == "0.25" or cfg.rpca.lambda_mode == 0.25
    assert cfg.pca.k == 3
    assert PipelineConfig.from_json(cfg.to_json()) == cfg


def test_missing_input_exit_2(tmp_path, capsys):
    missing = tmp_path / "nope.csv"
    code, out = run(tmp_path, "forecast", "--input", str(missing))
    assert code == 2
    assert str(missing) in capsys.readouterr().err
    assert (out / "FAILED").read_text().startswith("ingest")


def test_compute_failure_exit_1(tmp_path, capsys):
    # three days cannot feed a regression
    code, out = run(tmp_path, "forecast", "--synth", "n_days=3")
    assert code == 1
    assert "model_suite" in capsys.readouterr().err
    assert (out / "FAILED").exists() and (out / "stats.csv").exists()


def test_bad_input_file_exit_2(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("timestamp,price\nnot-a-date,3\n")
    code, _ = run(tmp_path, "stats", "--input", str(p))
    assert code == 2


def test_usage_error_exit_2(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["forecast", "--input", "a.csv", "--synth", "default"])
    assert exc.value.code == 2
    code, _ = run(tmp_path, "forecast", "--synth", SMALL, "--pca-k", "9")
    assert code == 2


def test_config_file_and_flag_precedence(tmp_path):
    cfg = PipelineConfig(synth=SMALL, iqr_k=3.0, seed=7)
    p = tmp_path / "cfg.json"
    p.write_text(cfg.to_json())
    code, out = run(tmp_path, "filter-iqr", "--config", str(p), "--iqr-k", "1.0")
    assert code == 0
    flagged_1 = len(read_csv(out / "outliers_iqr.csv"))
    code, out2 = main(["filter-iqr", "--config", str(p), "--out", str(tmp_path / "b")]), tmp_path / "b"
    assert code == 0
    assert len(read_csv(out2 / "outliers_iqr.csv")) < flagged_1


def test_unknown_config_key(tmp_path):
    p = tmp_path / "cfg.json"
    p.write_text('{"iqr_k": 1.5, "colour": "blue"}')
    code, _ = run(tmp_path, "stats", "--config", str(p))
    assert code == 2
    with pytest.raises(ConfigError):
        PipelineConfig.from_json('{"rpca": {"lambda": 3}}')


def test_overrides():
    cfg = with_overrides(PipelineConfig(input="x.csv"), synth="default", train_frac=0.5, lambda_mode="paper")
    assert cfg.input is None and cfg.synth == "default"
    assert cfg.split.train_fraction == 0.5 and cfg.rpca.lambda_mode == "paper"
    with pytest.raises(ConfigError):
        RPCAConfig(lambda_mode="huge")


def test_stats_and_boxplot(tmp_path, capsys):
    code, out = run(tmp_path, "stats", "--synth", SMALL)
    assert code == 0
    rows = read_csv(out / "stats.csv")
    assert rows[0] == ["year", "count", "mean", "std", "min", "max"] and rows[1][1] == "2880"
    assert "correlation" in capsys.readouterr().out
    code, out = run(tmp_path, "boxplot", "--synth", SMALL, "--group-by", "year")
    assert code == 0
    assert len(read_csv(out / "boxplot_before.csv")) == 2


def test_filter_rpca(tmp_path):
    code, out = run(tmp_path, "filter-rpca", "--synth", SMALL, "--after-iqr")
    assert code == 0
    meta = json.loads((out / "decomposition" / "decomposition.json").read_text())
    assert meta["converged"] and meta["shape"] == [120, 24]
    assert read_csv(out / "outliers_rpca.csv")[0] == ["method", "row", "col", "value", "threshold"]


def test_kde_and_pca(tmp_path):
    code, out = run(tmp_path, "kde-score", "--synth", SMALL, "--quantile", "0.02")
    assert code == 0
    assert len(read_csv(out / "kde_scores.csv")) == 2881
    assert len(read_csv(out / "outliers_kde.csv")) - 1 <= 0.02 * 2880
    code, out = run(tmp_path, "pca", "--synth", SMALL, "--pca-k", "2")
    assert code == 0
    assert json.loads((out / "pca_model.json").read_text())["k"] == 2
    code, _ = run(tmp_path, "kde-score", "--synth", SMALL, "--bandwidth", "-1")
    assert code == 2


def test_synth_then_reingest(tmp_path):
    code, out = run(tmp_path, "synth", "--synth", "n_days=5", "--seed", "3")
    assert code == 0
    assert len(read_csv(out / "spikes.csv")) == 1 + 6
    code, out2 = main(["stats", "--input", str(out / "observed.csv"), "--out", str(tmp_path / "s")]), tmp_path / "s"
    assert code == 0
    assert read_csv(out2 / "stats.csv")[1][1] == "120"


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "robustprice", "synth", "--synth", "n_days=2", "--out", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert os.path.exists(tmp_path / "observed.csv")
