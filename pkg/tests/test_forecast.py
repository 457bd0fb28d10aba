import math
from dataclasses import replace

import numpy as np
import pytest
from numpy.testing import assert_allclose

from regarch import (
    AlignedDataset,
    AlignmentError,
    ConvergenceError,
    DailyReturnSeries,
    FitOptions,
    ForecastOptions,
    ForecastSeries,
    InsufficientDataError,
    RealizedMeasureSeries,
    RegarchParams,
    SimConfig,
    ValidationError,
    align,
    evaluate,
    fit,
    forecast_recursive,
    forecast_rolling,
    mse,
    out_of_sample_loglik,
    qlike,
    regarch_filter,
    simulate_model,
)
from regarch import forecast as fc_mod
from regarch.forecast import default_window, one_step

from conftest import RV5, dates

FAST = ForecastOptions(fit=FitOptions(compute_se=False, n_starts=2))


def fs(d, h):
    return ForecastSeries(d, h, "recursive", 1)


def proxy(d, v):
    return RealizedMeasureSeries(d, v, "proxy")


class TestLosses:
    d = dates(2)

    def test_mse_hand(self):
        assert_allclose(mse(fs(self.d, [1.0, 2.0]), proxy(self.d, [1.0, 1.0])), 0.5)

    def test_zero_at_equality(self):
        v = [0.7, 1.9]
        assert mse(fs(self.d, v), proxy(self.d, v)) == 0.0
        assert qlike(fs(self.d, v), proxy(self.d, v)) == 0.0

    def test_qlike_hand(self):
        d = dates(1)
        assert_allclose(qlike(fs(d, [1.0]), proxy(d, [2.0])), 2 - math.log(2) - 1, rtol=0, atol=1e-12)
        assert_allclose(2 - math.log(2) - 1, 0.3069, atol=1e-4)

    def test_qlike_positive_off_diagonal(self):
        assert qlike(fs(self.d, [1.0, 1.0]), proxy(self.d, [1.0, 1.0001])) > 0

    def test_loglik_out_hand(self):
        d = dates(1)
        assert_allclose(out_of_sample_loglik(fs(d, [1.0]), DailyReturnSeries(d, [0.0])), -0.5 * math.log(2 * math.pi))
        assert_allclose(out_of_sample_loglik(fs(d, [4.0]), DailyReturnSeries(d, [2.0])),
                        -0.5 * (math.log(2 * math.pi) + math.log(4) + 1))

    def test_loglik_term_maximised_at_r2(self):
        d = dates(1)
        r = DailyReturnSeries(d, [1.5])
        best = out_of_sample_loglik(fs(d, [2.25]), r)
        for h in (1.0, 2.0, 2.5, 4.0):
            assert out_of_sample_loglik(fs(d, [h]), r) < best

    def test_permutation_invariance(self):
        rng = np.random.default_rng(0)
        d = dates(30)
        h, s, r = rng.uniform(0.5, 2, 30), rng.uniform(0.5, 2, 30), rng.normal(size=30)
        perm = rng.permutation(30)
        # relabel dates so the permuted pairs stay sorted
        a = evaluate(fs(d, h), proxy(d, s), DailyReturnSeries(d, r))
        b = evaluate(fs(d, h[perm]), proxy(d, s[perm]), DailyReturnSeries(d, r[perm]))
        assert_allclose((a.mse, a.qlike, a.loglik_out), (b.mse, b.qlike, b.loglik_out), rtol=1e-12)
        assert a.n_evaluated == 30

    def test_dominance(self):
        d = dates(3)
        s = proxy(d, [1.0, 2.0, 3.0])
        good = fs(d, [1.1, 2.1, 3.1])
        bad = fs(d, [1.3, 2.4, 3.5])
        assert qlike(good, s) < qlike(bad, s)

    def test_misaligned(self):
        with pytest.raises(AlignmentError, match="2020-01-02"):
            mse(fs(dates(2), [1.0, 1.0]), proxy(["2020-01-01", "2020-01-03"], [1.0, 1.0]))

    def test_subset_proxy_ok(self):
        d = dates(5)
        assert mse(fs(d[2:], [1.0, 1.0, 1.0]), proxy(d, np.ones(5))) == 0.0

    def test_forecast_series_invariants(self):
        with pytest.raises(ValidationError):
            fs(dates(2), [1.0, -1.0])
        with pytest.raises(ValidationError):
            fs(["b", "a"], [1.0, 1.0])


@pytest.fixture(scope="module")
def small(regarch_data):
    return regarch_data.window(0, 320)


class TestSchemes:
    def test_default_window(self):
        assert default_window(1848) == 1386
        assert 1848 - default_window(1848) == 462

    def test_windows_and_first_origin(self, small):
        k = 300
        rec = forecast_recursive("regarch", small, k, FAST)
        rol = forecast_rolling("regarch", small, k, FAST)
        assert len(rec) == len(rol) == 20
        assert rec.h_hat[0] == rol.h_hat[0]
        assert list(rec.dates) == list(small.dates[k:])
        for i, (a, b) in enumerate(zip(rec.refit_results, rol.refit_results), start=1):
            assert (a["start"], a["stop"]) == (0, k + i - 1)
            assert (b["start"], b["stop"]) == (i - 1, k + i - 1)

    def test_last_origin_single_forecast(self, small):
        T = small.T
        rec = forecast_recursive("garch", small, T - 1, FAST)
        rol = forecast_rolling("garch", small, T - 1, FAST)
        assert len(rec) == 1 and rec.h_hat[0] == rol.h_hat[0]
        res = fit("garch", small.window(0, T - 1), FAST.fit)
        assert rec.h_hat[0] == one_step(res, small.window(0, T - 1))

    def test_regarch_one_step_equals_filter(self, small):
        w = small.window(0, 300)
        res = fit("regarch", w, compute_se=False)
        assert_allclose(one_step(res, w), regarch_filter(res.params, w).h_next, rtol=1e-12)

    @pytest.mark.parametrize("model", ["garch", "gjr", "egarch"])
    def test_native_one_step_equals_filter(self, small, model):
        w = small.window(0, 300)
        res = fit(model, w.returns, compute_se=False)
        from regarch.models import egarch_filter, garch_filter, gjr_filter
        filt = {"garch": garch_filter, "gjr": gjr_filter, "egarch": egarch_filter}[model]
        assert_allclose(one_step(res, w), filt(res.params, w.returns).h_next, rtol=1e-12)

    def test_zero_leverage_and_gamma(self, small):
        p = RegarchParams(0.2, 0.9, 0.0, 0.0, [0.0], [-1.0], [0.1], [0.1], [[0.3]])
        res = fit("regarch", small.window(0, 300), compute_se=False)
        res = replace(res, params=p)
        w = small.window(0, 300)
        out = regarch_filter(p, w)
        expect = 0.2 * 0.1 + 0.9 * math.log(out.h[-1])
        assert_allclose(math.log(one_step(res, w)), expect, rtol=1e-12)

    def test_refit_stride(self, small):
        o = replace(FAST, refit_stride=7)
        out = forecast_rolling("garch", small, 300, o)
        assert [r["origin"] for r in out.refit_results if r["refit"]] == [1, 8, 15]

    def test_bad_k(self, small):
        with pytest.raises(InsufficientDataError):
            forecast_recursive("garch", small, small.T)
        with pytest.raises(InsufficientDataError):
            forecast_recursive("garch", small, 10)

    def test_failed_origin_carries_forward(self, small, monkeypatch):
        calls = {"n": 0}
        real_fit = fc_mod.fit

        def flaky(kind, data, opts):
            calls["n"] += 1
            if calls["n"] == 2:
                raise ConvergenceError("forced", best=None)
            return real_fit(kind, data, opts)

        monkeypatch.setattr(fc_mod, "fit", flaky)
        out = forecast_recursive("garch", small, 317, FAST)
        recs = out.refit_results
        assert recs[1]["failed"] and not recs[0]["failed"]
        assert recs[1]["params"] == recs[0]["params"]
        assert np.all(np.isfinite(out.h_hat))


def test_true_parameter_forecasts_beat_constant():
    wins = 0
    for rep in range(50):
        sim = simulate_model(SimConfig(seed=300 + rep, T=600, dgp="regarch", true_params=RV5))
        data = align(sim.returns, sim.measures)
        h = regarch_filter(RV5, data).h
        d = data.dates
        truth = proxy(d, sim.true_h)
        const = np.full(600, np.var(sim.returns.returns))
        wins += qlike(fs(d, h), truth) < qlike(fs(d, const), truth)
    assert wins == 50


def test_estimated_regarch_beats_constant():
    wins = 0
    T = 800
    k = default_window(T)
    opts = ForecastOptions(fit=FitOptions(compute_se=False, n_starts=2), refit_stride=T)
    for rep in range(50):
        sim = simulate_model(SimConfig(seed=400 + rep, T=T, dgp="regarch", true_params=RV5))
        data = align(sim.returns, sim.measures)
        out = forecast_recursive("regarch", data, k, opts)
        truth = proxy(data.dates, sim.true_h)
        const = fs(out.dates, np.full(len(out), np.var(sim.returns.returns[:k])))
        wins += qlike(out, truth) < qlike(const, truth)
    assert wins >= 0.95 * 50


def test_rolling_adapts_after_break():
    T, k = 400, 200
    opts = ForecastOptions(fit=FitOptions(compute_se=False, n_starts=2), refit_stride=20)
    wins = 0
    for rep in range(50):
        rng = np.random.default_rng(rep)
        level = np.where(np.arange(T) < k, 1.0, 3.0)
        r = np.empty(T)
        h = np.empty(T)
        g = 1.0
        for t in range(T):
            h[t] = g * level[t]
            r[t] = math.sqrt(h[t]) * rng.normal()
            g = 0.1 + 0.85 * g + 0.05 * r[t] ** 2 / level[t]
        d = dates(T)
        data = AlignedDataset(DailyReturnSeries(d, r))
        truth = proxy(d, h)
        q_rec = qlike(forecast_recursive("garch", data, k, opts), truth)
        q_rol = qlike(forecast_rolling("garch", data, k, opts), truth)
        wins += q_rol < q_rec
    assert wins > 25
