"""Realized measures from intraday bars and the bias-adjusted RK proxy.

All intraday arithmetic is in natural-log units; values leave this module in
percent² (multiplied by 100²) so they match daily returns in percent.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import AlignmentError, BandwidthError, ValidationError
from .series import DailyReturnSeries, IntradayGrid, RealizedMeasureSeries

logger = logging.getLogger(__name__)

EPS_FLOOR = 1e-12
PERCENT2 = 100.0**2
# Parzen kernel bandwidth constant
PARZEN_C_STAR = 3.5134


@dataclass(frozen=True)
class RangeScaling:
    """Normalising constant for squared ranges.

    ``lambda2m`` is the second moment of the range of a standard Brownian
    motion seen at ``m`` points per interval; ``m=None`` means continuous
    monitoring, whose limit is ``4 ln 2``.
    """

    lambda2m: float = 2.0
    m: int | None = None

    def __post_init__(self):
        if not self.lambda2m > 0:
            raise ValidationError("lambda2m must be positive")
        if self.m is None and self.lambda2m > 4 * math.log(2) + 1e-2:
            raise ValidationError("lambda2m exceeds the continuous-monitoring limit 4 ln 2")
        if self.m is not None and self.m < 1:
            raise ValidationError("m must be a positive integer")


@dataclass(frozen=True)
class ProxyAdjustment:
    c_hat: float

    def __post_init__(self):
        if not self.c_hat > 0:
            raise ValidationError("c_hat must be positive")


def _floor(value: float, what: str) -> float:
    if value <= EPS_FLOOR:
        logger.debug("%s = %g floored to %g", what, value, EPS_FLOOR)
        return EPS_FLOOR
    return value


def squared_return(returns: DailyReturnSeries) -> RealizedMeasureSeries:
    """Daily squared return, floored so its log exists."""
    if len(returns) == 0:
        raise ValidationError("empty return series")
    values = returns.returns**2
    n_floor = int(np.sum(values <= EPS_FLOOR))
    if n_floor:
        logger.info("squared_return: %d zero-return days floored", n_floor)
    return RealizedMeasureSeries(returns.dates, np.maximum(values, EPS_FLOOR), "squared-return")


def _check_grid(grid: IntradayGrid) -> None:
    if grid.n == 0:
        raise ValidationError(f"{grid.date}: empty intraday grid")


def realized_variance(grid: IntradayGrid) -> float:
    """Sum of squared within-day log returns, in percent²."""
    _check_grid(grid)
    r = grid.returns()
    return _floor(float(r @ r) * PERCENT2, f"RV[{grid.date}]")


def realized_range_volatility(grid: IntradayGrid, scaling: RangeScaling | None = None) -> float:
    """Sum of squared bar high-low log ranges divided by ``lambda2m``, in percent²."""
    scaling = scaling or RangeScaling()
    _check_grid(grid)
    s = grid.high - grid.low
    if np.any(s < 0):
        raise ValidationError(f"{grid.date}: bar with high < low")
    return _floor(float(s @ s) / scaling.lambda2m * PERCENT2, f"RRV[{grid.date}]")


def parzen(u):
    """Parzen weight function on ``[0, 1]``; zero beyond."""
    u = np.abs(np.asarray(u, dtype=float))
    return np.where(
        u <= 0.5,
        1.0 - 6.0 * u**2 + 6.0 * u**3,
        np.where(u <= 1.0, 2.0 * (1.0 - u) ** 3, 0.0),
    )


def kernel_bandwidth(r: np.ndarray, sparse_step: int = 20) -> int:
    """Parzen bandwidth ``ceil(c* xi^(4/5) n^(3/5))``.

    The noise variance is estimated by RV/(2n) at the highest frequency and
    integrated quarticity is proxied by the squared RV of returns
    aggregated over ``sparse_step`` bars, averaged over all offsets.
    """
    n = r.size
    rv_high = float(r @ r)
    q = max(1, min(sparse_step, n))
    p = np.concatenate(([0.0], np.cumsum(r)))
    offsets = range(min(q, n - q + 1))
    rv_sparse = np.mean([np.sum(np.diff(p[off::q]) ** 2) for off in offsets])
    if rv_sparse <= 0 or rv_high <= 0:
        return 0
    omega2 = rv_high / (2 * n)
    xi2 = omega2 / rv_sparse
    return int(math.ceil(PARZEN_C_STAR * xi2 ** (2 / 5) * n ** (3 / 5)))


def realized_kernel(grid: IntradayGrid, bandwidth: int | None = None) -> float:
    """Parzen realized kernel ``sum_h k(h/(H+1)) gamma_h`` in percent².

    Parameters
    ----------
    grid : IntradayGrid
        Intended for one-minute bars.
    bandwidth : int, optional
        Lag truncation ``H``. Chosen automatically when omitted.
    """
    _check_grid(grid)
    r = grid.returns()
    n = r.size
    H = kernel_bandwidth(r) if bandwidth is None else int(bandwidth)
    if H < 0:
        raise BandwidthError("bandwidth must be nonnegative")
    if H > n - 2 and H > 0:
        raise BandwidthError(f"{grid.date}: bandwidth {H} needs at least {H + 2} bars, got {n}")
    rk = float(r @ r)
    if H:
        w = parzen(np.arange(1, H + 1) / (H + 1))
        gam = np.array([r[h:] @ r[:-h] for h in range(1, H + 1)])
        rk += 2.0 * float(w @ gam)
    return _floor(rk * PERCENT2, f"RK[{grid.date}]")


def measure_series(grids, kind: str, scaling: RangeScaling | None = None) -> RealizedMeasureSeries:
    """Apply one per-day estimator across a sequence of grids."""
    fn = {
        "RV": realized_variance,
        "RRV": lambda g: realized_range_volatility(g, scaling),
        "RK": realized_kernel,
    }[kind]
    grids = list(grids)
    return RealizedMeasureSeries([g.date for g in grids], [fn(g) for g in grids], kind)


def proxy_adjustment(
    returns: DailyReturnSeries, rk_open_hours: RealizedMeasureSeries
) -> ProxyAdjustment:
    """Scale factor mapping open-hours RK onto close-to-close return variance."""
    if not np.array_equal(returns.dates, rk_open_hours.dates):
        raise AlignmentError("returns and RK series must share dates")
    r = returns.returns
    return ProxyAdjustment(float(np.sum((r - r.mean()) ** 2) / np.sum(rk_open_hours.values)))


def apply_proxy(rk_open_hours: RealizedMeasureSeries, adj: ProxyAdjustment) -> RealizedMeasureSeries:
    return RealizedMeasureSeries(rk_open_hours.dates, adj.c_hat * rk_open_hours.values, "proxy")
