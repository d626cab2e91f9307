import importlib

import numpy as np
import pytest

from robustprice.ingest import SeriesTable


def _backends():
    mods = [importlib.import_module("robustprice._pykernels")]
    try:
        mods.append(importlib.import_module("robustprice._ckernels"))
    except ImportError:
        pass
    return mods


@pytest.fixture(params=_backends(), ids=lambda m: m.__name__.rsplit(".", 1)[-1])
def backend(request):
    return request.param


def hourly_series(prices, loads=None, start="2021-03-01"):
    prices = np.asarray(prices, dtype=float)
    ts = np.datetime64(start, "m") + np.arange(prices.size).astype("timedelta64[h]")
    if loads is None:
        loads = np.full(prices.size, 100.0)
    return SeriesTable(ts, prices, np.asarray(loads, dtype=float))


@pytest.fixture
def make_series():
    return hourly_series
