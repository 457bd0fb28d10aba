import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import stats

from regarch import (
    DegenerateVarianceError,
    InsufficientDataError,
    autocorrelation,
    describe,
    jarque_bera,
    ljung_box,
)


def test_jb_table_values():
    assert_allclose(jarque_bera(-0.540, 8.226, 1848), 2192.91, rtol=5e-3)
    assert_allclose(jarque_bera(0.738, 4.470, 1848), 334.02, rtol=5e-3)


def test_jb_null():
    assert jarque_bera(0.0, 3.0, 1000) == 0.0


def test_standard_errors():
    x = np.random.default_rng(0).normal(size=1848)
    rep = describe(x)
    assert round(rep.se_skew, 3) == 0.057
    assert round(rep.se_kurt, 3) == 0.114
    assert_allclose(rep.se_mean, rep.sd / math.sqrt(1848))


def test_moments_against_scipy():
    x = np.random.default_rng(1).standard_t(5, size=3000)
    rep = describe(x)
    assert_allclose(rep.skewness, stats.skew(x), rtol=1e-10)
    assert_allclose(rep.kurtosis, stats.kurtosis(x, fisher=False), rtol=1e-10)
    assert_allclose(rep.sd, x.std(), rtol=1e-12)
    assert rep.min <= rep.mean <= rep.max
    assert_allclose(rep.jb_stat, stats.jarque_bera(x).statistic, rtol=1e-10)


def test_affine_invariance_and_negation():
    x = np.random.default_rng(2).gamma(2.0, size=500)
    a, b, c = describe(x), describe(100 * x + 3), describe(-x)
    assert_allclose(b.jb_stat, a.jb_stat, rtol=1e-9)
    assert_allclose(c.skewness, -a.skewness, rtol=1e-12)
    assert_allclose(c.kurtosis, a.kurtosis, rtol=1e-12)
    assert_allclose(c.jb_stat, a.jb_stat, rtol=1e-12)


def test_too_short():
    with pytest.raises(InsufficientDataError):
        describe([1.0, 2.0, 3.0])


def test_constant_series():
    with pytest.raises(DegenerateVarianceError):
        describe(np.ones(20))
    with pytest.raises(DegenerateVarianceError):
        ljung_box(np.ones(50), 10)


class TestAutocorrelation:
    def test_starts_at_lag_one(self):
        x = np.random.default_rng(3).normal(size=100)
        rho = autocorrelation(x, 5)
        d = x - x.mean()
        assert rho.shape == (5,)
        assert_allclose(rho[0], (d[1:] @ d[:-1]) / (d @ d))

    def test_alternating(self):
        x = np.array([1.0, -1.0] * 50)
        assert_allclose(autocorrelation(x, 1)[0], -0.99, atol=1e-12)

    def test_white_noise_band(self):
        x = np.random.default_rng(4).normal(size=5000)
        rho = autocorrelation(x, 40)
        assert np.mean(np.abs(rho) < 3 / math.sqrt(5000)) >= 0.95
        assert np.all(np.abs(rho) <= 1)


class TestLjungBox:
    def test_plain_matches_textbook(self):
        x = np.random.default_rng(5).normal(size=400)
        rho = autocorrelation(x, 10)
        T = 400
        q = T * (T + 2) * np.sum(rho**2 / (T - np.arange(1, 11)))
        assert_allclose(ljung_box(x, 10, "none"), q)

    def test_white_noise_size(self):
        rng = np.random.default_rng(6)
        crit = stats.chi2.ppf(0.95, 10)
        assert_allclose(crit, 18.307, atol=1e-3)
        below = [ljung_box(rng.normal(size=5000), 10) < crit for _ in range(500)]
        assert np.mean(below) >= 0.90

    def test_ar1_rejects(self):
        rng = np.random.default_rng(7)
        e = rng.normal(size=2000)
        x = np.empty(2000)
        x[0] = e[0]
        for t in range(1, 2000):
            x[t] = 0.9 * x[t - 1] + e[t]
        assert ljung_box(x, 10) > 10 * 23.209

    def test_adjusted_reduces_under_constant_squares(self):
        # balanced +-1 signs: squared deviations are all 1
        x = np.random.default_rng(8).permutation(np.repeat([1.0, -1.0], 2500))
        assert_allclose(ljung_box(x, 10, "heteroskedasticity"), ljung_box(x, 10, "none"), rtol=1e-2)

    def test_adjusted_smaller_under_volatility_clustering(self):
        rng = np.random.default_rng(9)
        T = 4000
        lh = np.zeros(T)
        for t in range(1, T):
            lh[t] = 0.97 * lh[t - 1] + 0.3 * rng.normal()
        x = np.exp(lh / 2) * rng.normal(size=T)
        crit = stats.chi2.ppf(0.99, 10)
        assert ljung_box(x, 10, "heteroskedasticity") < crit

    def test_lags_bound(self):
        with pytest.raises(InsufficientDataError):
            ljung_box(np.arange(10.0), 9)
