import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from robustprice.errors import (
    DimensionError,
    EmptyInputError,
    EmptyYearError,
    ParseError,
    SchemaError,
    UndefinedStatisticError,
)
from robustprice.ingest import (
    ColumnSchema,
    build_price_matrix,
    parse_hourly_csv,
    pearson_correlation,
    write_series_csv,
    write_stats_csv,
    yearly_descriptive_stats,
)


def test_parse_three_rows_sorted():
    text = "timestamp,price,load\n2021-01-01 02:00,3,30\n2021-01-01T00:00,1,10\n2021-01-01 01:00,2,20\n"
    s = parse_hourly_csv(text)
    assert len(s) == 3
    assert s.price.tolist() == [1.0, 2.0, 3.0]
    assert s.hours.tolist() == [0, 1, 2]
    assert s[0].hour == 0 and s[2].load == 30.0


def test_duplicate_timestamps_averaged():
    s = parse_hourly_csv("timestamp,price,load\n2021-11-07 01:00,10,100\n2021-11-07 01:00,20,300\n")
    assert len(s) == 1
    assert s.price[0] == 15.0
    assert s.load[0] == 200.0


def test_header_only_is_empty():
    with pytest.raises(EmptyInputError):
        parse_hourly_csv("timestamp,price,load\n")
    with pytest.raises(EmptyInputError):
        parse_hourly_csv("")


def test_missing_column():
    with pytest.raises(SchemaError, match="load"):
        parse_hourly_csv("timestamp,price\n2021-01-01 00:00,1\n")


def test_bad_timestamp_names_row():
    with pytest.raises(ParseError) as exc:
        parse_hourly_csv("timestamp,price,load\n2021-01-01 00:00,1,1\n01/02/2021 1am,2,2\n")
    assert exc.value.row == 2
    assert "row 2" in str(exc.value)


def test_unparseable_price_rejected_with_rows():
    s = parse_hourly_csv("timestamp,price,load\n2021-01-01 00:00,1,1\n2021-01-01 01:00,n/a,1\n2021-01-01 02:00,,1\n")
    assert len(s) == 1
    assert s.rejected_rows == (2, 3)


def test_custom_schema_and_delimiter():
    text = "INTERVALSTARTTIME;LMP;DEMAND\n2021-01-01 00:00;-5.5;1000\n"
    s = parse_hourly_csv(text, ColumnSchema("INTERVALSTARTTIME", "LMP", "DEMAND", ";"))
    assert s.price[0] == -5.5


def test_no_load_column():
    s = parse_hourly_csv("timestamp,price\n2021-01-01 00:00,1\n", ColumnSchema(load=None))
    assert np.isnan(s.load[0])


finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(finite, st.floats(min_value=0, max_value=1e9)), min_size=1, max_size=60))
def test_csv_round_trip_bitwise(rows):
    from tests.conftest import hourly_series
    s = hourly_series([r[0] for r in rows], [r[1] for r in rows])
    buf = io.StringIO()
    write_series_csv(s, buf)
    back = parse_hourly_csv(buf.getvalue())
    assert back == s
    assert back.price.tobytes() == s.price.tobytes()


def test_stats_examples(make_series):
    s = make_series([5, 5, 5])
    r = yearly_descriptive_stats(s, 2021)
    assert (r.count, r.mean, r.std, r.min, r.max) == (3, 5.0, 0.0, 5.0, 5.0)
    r = yearly_descriptive_stats(make_series([1, 2, 3]), 2021)
    assert (r.mean, r.std, r.min, r.max) == (2.0, 1.0, 1.0, 3.0)


def test_stats_empty_year(make_series):
    with pytest.raises(EmptyYearError):
        yearly_descriptive_stats(make_series([1, 2]), 2019)


def test_stats_csv_header(make_series):
    buf = io.StringIO()
    write_stats_csv([yearly_descriptive_stats(make_series([1, 2, 3]), 2021)], buf)
    assert buf.getvalue().splitlines()[0] == "year,count,mean,std,min,max"


def _welford(xs):
    n, mean, m2 = 0, 0.0, 0.0
    lo, hi = math.inf, -math.inf
    for x in xs:
        n += 1
        d = x - mean
        mean += d / n
        m2 += d * (x - mean)
        lo, hi = min(lo, x), max(hi, x)
    return n, mean, math.sqrt(m2 / (n - 1)) if n > 1 else 0.0, lo, hi


@pytest.mark.parametrize("seed", range(5))
def test_stats_vs_single_pass_oracle(make_series, seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 5000))
    prices = rng.lognormal(3.5, 0.6, size=n) - 5
    r = yearly_descriptive_stats(make_series(prices, start="2021-01-01"), 2021)
    n_o, mean, std, lo, hi = _welford(prices[: r.count].tolist())
    assert r.count == n_o
    assert r.mean == pytest.approx(mean, rel=1e-12)
    assert r.std == pytest.approx(std, rel=1e-12)
    assert (r.min, r.max) == (lo, hi)


def test_pearson_examples():
    assert pearson_correlation([1, 2, 3], [2, 4, 6]) == pytest.approx(1.0, abs=1e-15)
    assert pearson_correlation([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0, abs=1e-15)
    # dx=(-1.5,-.5,.5,1.5), dy=(-1.5,.5,-.5,1.5): sxy=4, sxx=syy=5
    assert pearson_correlation([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(0.8, abs=1e-15)


def test_pearson_errors():
    with pytest.raises(DimensionError):
        pearson_correlation([1, 2], [1, 2, 3])
    with pytest.raises(UndefinedStatisticError):
        pearson_correlation([1, 1, 1], [1, 2, 3])


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.01, 100), st.floats(-100, 100), st.floats(0.01, 100), st.floats(-100, 100))
def test_pearson_symmetric_and_affine_invariant(seed, a, b, c, d):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=30)
    y = 0.5 * x + rng.normal(size=30)
    rho = pearson_correlation(x, y)
    assert abs(pearson_correlation(y, x) - rho) <= 1e-12
    assert abs(pearson_correlation(a * x + b, c * y + d) - rho) <= 1e-12


def test_price_matrix_complete(make_series):
    pm = build_price_matrix(make_series(np.arange(48.0)))
    assert pm.shape == (2, 24)
    assert not pm.mask.any()
    assert pm.values[1, 0] == 24.0


def test_price_matrix_imputes_day_mean(make_series):
    s = make_series(np.full(24, 10.0), start="2021-03-02")
    s = s.subset(s.hours != 2)
    pm = build_price_matrix(s)
    assert pm.shape == (1, 24)
    assert pm.mask[0, 2] and pm.mask.sum() == 1
    assert pm.values[0, 2] == 10.0
    assert pm.obs_index[0, 2] == -1


def test_price_matrix_single_day(make_series):
    assert build_price_matrix(make_series(np.ones(24))).shape == (1, 24)


def test_price_matrix_drops_fully_excluded_day(make_series):
    s = make_series(np.arange(72.0))
    exclude = (s.dates == np.datetime64("2021-03-02"))
    pm = build_price_matrix(s, exclude)
    assert pm.shape == (2, 24)
    assert pm.dropped_dates == ("2021-03-02",)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_price_matrix_unmasked_sum(seed):
    from tests.conftest import hourly_series
    rng = np.random.default_rng(seed)
    s = hourly_series(rng.normal(40, 15, size=int(rng.integers(1, 24 * 6))))
    s = s.subset(rng.random(len(s)) > 0.1) if len(s) > 3 else s
    pm = build_price_matrix(s)
    assert math.fsum(pm.values[~pm.mask].tolist()) == math.fsum(s.price.tolist())
