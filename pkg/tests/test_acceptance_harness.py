import numpy as np

from robustprice.ingest import write_series_csv
from robustprice.synth import SynthSpec, synth_generate
from tests import test_acceptance as acc


def test_market_check_runs_on_supplied_file(tmp_path, monkeypatch):
    path = tmp_path / "prices.csv"
    with open(path, "w", newline="") as fh:
        write_series_csv(synth_generate(SynthSpec(n_days=366, start="2016-01-01", seed=1)).observed, fh)
    monkeypatch.setenv(acc.CAISO_ENV, str(path))
    ok, detail = acc.c9_caiso()
    # synthetic prices cannot match the published table, so this must report failure, not crash
    assert not ok
    assert "2016:count=8784" in detail and "2017:absent" in detail


def test_market_check_skips_without_data(monkeypatch):
    monkeypatch.delenv(acc.CAISO_ENV, raising=False)
    assert acc.evaluate(acc.c9_caiso)[0] == "SKIP"


def test_printed_precision_rule():
    assert acc._matches_printed(103.34, "103.3")
    assert not acc._matches_printed(103.36, "103.3")
    assert acc._matches_printed(960.6, "961")
    assert acc._matches_printed(np.float64(29.854), "29.85")
