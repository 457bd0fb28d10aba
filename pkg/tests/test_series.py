import numpy as np
import pytest
from numpy.testing import assert_allclose

from regarch import (
    AlignedDataset,
    AlignmentError,
    DailyReturnSeries,
    IntradayGrid,
    RealizedMeasureSeries,
    ValidationError,
    align,
    demean,
)

from conftest import dates


def rm(ds, vals, kind="RV"):
    return RealizedMeasureSeries(ds, vals, kind)


class TestTypes:
    def test_returns_require_increasing_dates(self):
        with pytest.raises(ValidationError, match="strictly increasing"):
            DailyReturnSeries(["2020-01-02", "2020-01-01"], [0.1, 0.2])

    def test_duplicate_dates_rejected(self):
        with pytest.raises(ValidationError):
            DailyReturnSeries(["d1", "d1"], [0.1, 0.2])

    def test_returns_must_be_finite(self):
        with pytest.raises(ValidationError):
            DailyReturnSeries(["d1", "d2"], [0.1, np.nan])

    def test_measures_must_be_positive(self):
        with pytest.raises(ValidationError):
            rm(["d1", "d2"], [1.0, 0.0])

    def test_unknown_kind(self):
        with pytest.raises(ValidationError):
            rm(["d1"], [1.0], "BV")

    def test_arrays_are_read_only(self):
        s = DailyReturnSeries(["d1", "d2"], [0.1, 0.2])
        with pytest.raises(ValueError):
            s.returns[0] = 5.0

    def test_grid_bar_invariant(self):
        with pytest.raises(ValidationError, match="bar 1"):
            IntradayGrid("d", [0.0, 0.0], [0.1, 0.0], [0.0, 0.01], [0.0, 0.0])

    def test_grid_returns_first_bar_open_to_close(self):
        g = IntradayGrid("d", [0.0, 0.5, 0.4], [1.0, 1.0, 1.0], [0.0, 0.0, 0.0], [0.5, 0.4, 0.9])
        assert_allclose(g.returns(), [0.5, -0.1, 0.5])

    def test_grid_from_prices_takes_logs(self):
        g = IntradayGrid.from_prices("d", [100.0], [101.0], [99.0], [100.5])
        assert_allclose(g.high, np.log(101.0))

    def test_dataset_requires_shared_dates(self):
        r = DailyReturnSeries(["d1", "d2"], [0.1, 0.2])
        with pytest.raises(AlignmentError):
            AlignedDataset(r, (rm(["d1", "d3"], [1.0, 1.0]),))


class TestAlign:
    def test_intersect(self):
        r = DailyReturnSeries(["d1", "d2", "d3"], [1.0, 2.0, 3.0])
        m = rm(["d2", "d3", "d4"], [1.0, 2.0, 3.0])
        ds = align(r, [m])
        assert list(ds.dates) == ["d2", "d3"]
        assert_allclose(ds.returns.returns, [2.0, 3.0])
        assert_allclose(ds.measures[0].values, [1.0, 2.0])

    def test_strict_identity(self):
        d = dates(3)
        ds = align(DailyReturnSeries(d, [1.0, 2.0, 3.0]), [rm(d, [1.0, 1.0, 1.0])], policy="strict")
        assert ds.T == 3 and ds.K == 1

    def test_strict_names_first_offending_date(self):
        r = DailyReturnSeries(["d1", "d2", "d3"], [1.0, 2.0, 3.0])
        with pytest.raises(AlignmentError, match="d1"):
            align(r, [rm(["d2", "d3", "d4"], [1.0, 2.0, 3.0])], policy="strict")

    def test_disjoint_intersection_errors(self):
        r = DailyReturnSeries(["d1", "d2"], [1.0, 2.0])
        with pytest.raises(AlignmentError, match="empty"):
            align(r, [rm(["d3", "d4"], [1.0, 1.0])])

    def test_subset_and_sorted(self):
        rng = np.random.default_rng(0)
        d = dates(200)
        a = np.sort(rng.choice(200, 150, replace=False))
        b = np.sort(rng.choice(200, 120, replace=False))
        r = DailyReturnSeries(d, rng.normal(size=200))
        m1 = rm(d[a], np.ones(a.size))
        m2 = rm(d[b], np.ones(b.size), "RRV")
        ds = align(r, [m1, m2])
        assert set(ds.dates) <= set(d[a]) & set(d[b])
        assert list(ds.dates) == sorted(ds.dates)
        assert ds.T == len(set(a) & set(b))

    def test_window_and_select(self, joint_data):
        w = joint_data.window(10, 20)
        assert w.T == 10 and w.dates[0] == joint_data.dates[10]
        one = joint_data.select([1])
        assert one.K == 1 and one.measures[0].kind == "RRV"


class TestDemean:
    def test_zero_mean_already(self):
        s = demean(DailyReturnSeries(["a", "b"], [1.0, -1.0]), "sample-mean")
        assert_allclose(s.returns, [1.0, -1.0])

    def test_hand_example(self):
        s = demean(DailyReturnSeries(["a", "b"], [2.0, 4.0]), "sample-mean")
        assert_allclose(s.returns, [-1.0, 1.0])

    def test_none_is_identity(self):
        s = DailyReturnSeries(["a", "b"], [2.0, 4.0])
        assert demean(s) is s

    def test_mean_exactly_zero(self):
        rng = np.random.default_rng(1)
        x = rng.normal(3.0, 2.0, 5000)
        s = demean(DailyReturnSeries(dates(5000), x), "sample-mean")
        assert abs(s.returns.mean()) <= 1e-12 * 5000
