import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from regarch import (
    EgarchParams,
    GarchParams,
    GjrParams,
    HestonParams,
    ParameterError,
    RangeScaling,
    RegarchParams,
    SimConfig,
    ValidationError,
    calibrate_lambda,
    efficiency_report,
    range_efficiency,
    realized_range_volatility,
    realized_variance,
    simulate_intraday,
    simulate_model,
)

from conftest import JOINT


class TestDaily:
    def test_regarch_fixed_point(self):
        p = RegarchParams(0.3, 0.9, 0.0, 0.0, [0.0], [-1.0], [0.1], [0.1], [[0.2]])
        sim = simulate_model(SimConfig(seed=0, T=200, dgp="regarch", true_params=p))
        assert_allclose(sim.true_h, math.exp(0.3))

    def test_garch_unconditional_variance(self):
        sim = simulate_model(SimConfig(seed=0, T=100_000, dgp="garch", true_params=GarchParams(0.05, 0.05, 0.90)))
        assert abs(np.var(sim.returns.returns) - 1.0) < 0.02

    @pytest.mark.parametrize("dgp,params", [
        ("garch", GarchParams(0.05, 0.05, 0.90)),
        ("gjr", GjrParams(0.05, 0.03, 0.90, 0.05)),
        ("egarch", EgarchParams(0.0, 0.95, -0.1, 0.2)),
        ("regarch", JOINT),
    ])
    def test_deterministic(self, dgp, params):
        cfg = SimConfig(seed=5, T=300, dgp=dgp, true_params=params)
        a, b = simulate_model(cfg), simulate_model(cfg)
        assert np.array_equal(a.returns.returns, b.returns.returns)
        assert np.array_equal(a.true_h, b.true_h)
        assert all(np.array_equal(x.values, y.values) for x, y in zip(a.measures, b.measures))
        assert np.all(a.true_h > 0)

    def test_regarch_measures_follow_measurement_equation(self):
        sim = simulate_model(SimConfig(seed=1, T=20_000, dgp="regarch", true_params=JOINT))
        z = sim.returns.returns / np.sqrt(sim.true_h)
        lh = np.log(sim.true_h)
        u = np.vstack([np.log(m.values) - JOINT.xi[k] - lh - JOINT.delta1[k] * z - JOINT.delta2[k] * (z * z - 1)
                       for k, m in enumerate(sim.measures)])
        assert_allclose(np.cov(u), JOINT.sigma, rtol=0.05)
        assert [m.kind for m in sim.measures] == ["RV", "RRV"]

    def test_wrong_params(self):
        with pytest.raises(ParameterError):
            simulate_model(SimConfig(T=10, dgp="egarch", true_params=GarchParams(0.1, 0.1, 0.8)))
        with pytest.raises(ParameterError):
            simulate_model(SimConfig(T=10, dgp="garch", true_params=GarchParams(0.1, 0.5, 0.6)))
        with pytest.raises(ValidationError):
            simulate_model(SimConfig(T=10, dgp="brownian"))

    def test_config_validation(self):
        with pytest.raises(ValidationError):
            SimConfig(T=0)
        with pytest.raises(ValidationError):
            SimConfig(noise_std=-1.0)
        with pytest.raises(ValidationError):
            SimConfig(dgp="jump")


@pytest.fixture(scope="module")
def brownian():
    return simulate_intraday(SimConfig(seed=21, T=10_000, n=78, m=1, dgp="brownian"))


class TestIntraday:
    def test_iv_is_sigma_squared(self, brownian):
        assert_allclose(brownian.iv, 1.0, rtol=1e-12)
        assert_allclose(brownian.true_h, 1.0, rtol=1e-12)

    def test_rv_consistent(self, brownian):
        rv = np.array([realized_variance(g) for g in brownian.grids])
        assert abs(rv.mean() / brownian.iv.mean() - 1) < 0.01

    def test_rv_asymptotic_variance(self, brownian):
        rv = np.array([realized_variance(g) for g in brownian.grids])
        ratio = 78 * np.var(rv) / (2 * brownian.iq.mean())
        assert abs(ratio - 1) < 0.10

    def test_m1_ranges_collapse(self):
        cfg = SimConfig(seed=2, T=300, n=78, m=1, dgp="brownian")
        sim = simulate_intraday(cfg)
        for g in sim.grids[:20]:
            assert_allclose(realized_range_volatility(g, RangeScaling(1.0, m=1)), realized_variance(g), rtol=1e-12)
        rep = efficiency_report(cfg)
        assert rep.lambda2m == 1.0
        assert_allclose(rep.ratio, 1.0, rtol=1e-10)

    def test_efficiency_ratio_m50(self):
        rep = efficiency_report(SimConfig(seed=3, T=4000, n=78, m=50, dgp="brownian"), lambda_reps=50_000)
        assert 3.9 <= rep.ratio <= 5.9

    def test_daily_return_sums_bars(self):
        sim = simulate_intraday(SimConfig(seed=4, T=5, n=10, m=3, dgp="brownian"))
        for g, r in zip(sim.grids, sim.returns.returns):
            assert_allclose(r, (g.close[-1] - g.open[0]) * 100, rtol=1e-10)
            assert np.all(g.low <= np.minimum(g.open, g.close))
        # consecutive days chain close to open
        assert_allclose(sim.grids[1].open[0], sim.grids[0].close[-1])

    def test_per_day_streams(self):
        a = simulate_intraday(SimConfig(seed=8, T=4, n=10, m=2, dgp="brownian"))
        b = simulate_intraday(SimConfig(seed=8, T=4, n=10, m=2, dgp="brownian"))
        assert np.array_equal(a.returns.returns, b.returns.returns)
        assert all(np.array_equal(x.high, y.high) for x, y in zip(a.grids, b.grids))

    def test_error_shrinks_with_n(self):
        errs = []
        for n in (13, 39, 78):
            sim = simulate_intraday(SimConfig(seed=5, T=2000, n=n, m=4, dgp="brownian"))
            rv = np.array([realized_variance(g) for g in sim.grids])
            rrv = np.array([realized_range_volatility(g, RangeScaling(calibrate_lambda(4, 20_000)[0], 4))
                            for g in sim.grids])
            errs.append((np.mean(np.abs(rv / sim.iv - 1)), np.mean(np.abs(rrv / sim.iv - 1))))
        errs = np.array(errs)
        assert np.all(np.diff(errs, axis=0) < 0)

    def test_noise_inflates_high_frequency_rv(self):
        fine = simulate_intraday(SimConfig(seed=6, T=300, n=390, m=1, dgp="brownian", noise_std=0.01))
        coarse = simulate_intraday(SimConfig(seed=6, T=300, n=13, m=30, dgp="brownian", noise_std=0.01))
        rv_f = np.mean([realized_variance(g) for g in fine.grids])
        # coarse bars use every 30th fine point of an equally fine path
        rv_c = np.mean([realized_variance(g) for g in coarse.grids])
        assert rv_f > rv_c

    def test_heston(self):
        sim = simulate_intraday(SimConfig(seed=7, T=200, n=78, m=2, dgp="heston-like", true_params=HestonParams()))
        assert np.all(sim.iv > 0) and np.all(sim.iq > 0)
        rv = np.array([realized_variance(g) for g in sim.grids])
        assert np.corrcoef(rv, sim.iv)[0, 1] > 0.8

    def test_heston_needs_params(self):
        with pytest.raises(ParameterError):
            simulate_intraday(SimConfig(T=2, dgp="heston-like"))


class TestCalibration:
    def test_m1(self):
        lam, err = calibrate_lambda(1, 100_000, seed=1)
        assert abs(lam - 1.0) < 4 * err

    def test_monotone_in_m(self):
        lams = [calibrate_lambda(m, 50_000, seed=2)[0] for m in (1, 5, 50)]
        assert lams[0] < lams[1] < lams[2] < 4 * math.log(2)

    def test_continuous(self):
        lam, err = calibrate_lambda(None, 20_000, seed=3)
        assert abs(lam - 4 * math.log(2)) < 0.01
        assert err < 0.01

    def test_min_reps(self):
        with pytest.raises(ValidationError):
            calibrate_lambda(5, 999)

    def test_range_efficiency_limits(self):
        assert abs(range_efficiency(1, 100_000, seed=1) - 2.0) < 0.05
        assert abs(range_efficiency(None, 20_000, seed=2) - 0.4073) < 0.02
