"""One-step-ahead variance forecasts under expanding and fixed-width windows,
and their evaluation by MSE, QLIKE and predictive return log-likelihood.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
import numpy as np

from .errors import AlignmentError, ConvergenceError, InsufficientDataError, RegarchError, ValidationError
from .estimation import FitOptions, FitResult, fit
from .models import (
    E_ABS_Z,
    LOG_2PI,
    default_h1,
    egarch_filter,
    garch_filter,
    gjr_filter,
    regarch_reduced_recursion,
    run_regarch,
)
from .series import AlignedDataset, DailyReturnSeries, RealizedMeasureSeries

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ForecastSeries:
    dates: np.ndarray
    h_hat: np.ndarray
    scheme: str
    window: int
    model: str = ""
    refit_results: tuple = field(default_factory=tuple)

    def __post_init__(self):
        h = np.asarray(self.h_hat, dtype=float)
        dates = np.asarray(self.dates).astype(str)
        if h.shape != dates.shape:
            raise ValidationError("dates and h_hat differ in length")
        if not np.all(np.isfinite(h)) or np.any(h <= 0):
            raise ValidationError("forecasts must be positive and finite")
        if dates.size > 1 and np.any(dates[1:] <= dates[:-1]):
            raise ValidationError("forecast dates must be strictly increasing")
        h.setflags(write=False)
        object.__setattr__(self, "h_hat", h)
        object.__setattr__(self, "dates", dates)

    def __len__(self):
        return self.h_hat.size


@dataclass(frozen=True)
class LossReport:
    mse: float
    qlike: float
    loglik_out: float
    n_evaluated: int


@dataclass(frozen=True)
class ForecastOptions:
    """``refit_stride`` re-estimates every that many origins; parameters are
    held fixed in between while the filter state keeps moving."""

    fit: FitOptions = field(default_factory=lambda: FitOptions(compute_se=False))
    refit_stride: int = 1
    warm_start: bool = True


def default_window(T: int) -> int:
    return (3 * T) // 4


def one_step(result: FitResult, window: AlignedDataset) -> float:
    """Variance forecast for the day after ``window`` from filtered terminal state."""
    p = result.params
    r = np.ascontiguousarray(window.returns.returns)
    if result.model == "regarch":
        logx = np.ascontiguousarray(window.log_measures())
        logh, z, _ = run_regarch(p, r, logx, math.log(default_h1(r)))
        return math.exp(regarch_reduced_recursion(p, logh[-2], z[-1], logx[:, -1]))
    if result.model == "garch":
        out = garch_filter(p, r)
        return p.omega + p.beta * out.h[-1] + p.alpha * r[-1] ** 2
    if result.model == "gjr":
        out = gjr_filter(p, r)
        a = p.alpha + (p.tau if r[-1] < 0 else 0.0)
        return p.omega + p.beta * out.h[-1] + a * r[-1] ** 2
    if result.model == "egarch":
        out = egarch_filter(p, r)
        lh = math.log(out.h[-1])
        zt = out.z[-1]
        return math.exp(p.omega + p.beta * (lh - p.omega) + p.tau11 * zt + p.tau12 * (abs(zt) - E_ABS_Z))
    raise ValidationError(f"unknown model {result.model!r}")


def _forecast(model_kind, data: AlignedDataset, k, scheme, options: ForecastOptions | None):
    options = options or ForecastOptions()
    T = data.T
    if not 1 <= k < T:
        raise InsufficientDataError(f"need 1 <= k < T, got k={k}, T={T}")
    if k < options.fit.min_obs:
        raise InsufficientDataError(f"k={k} is below the estimation floor {options.fit.min_obs}")
    if options.refit_stride < 1:
        raise ValidationError("refit_stride must be >= 1")
    h_hat = np.empty(T - k)
    records = []
    current: FitResult | None = None
    for i in range(1, T - k + 1):
        lo = 0 if scheme == "recursive" else i - 1
        hi = k + i - 1
        window = data.window(lo, hi)
        rec = {"origin": i, "date": str(data.dates[hi]), "start": lo, "stop": hi, "refit": False, "failed": False}
        if current is None or (i - 1) % options.refit_stride == 0:
            opts = options.fit
            if options.warm_start and current is not None:
                opts = replace(opts, start=tuple(current.estimates[: _n_free(current)]))
            rec["refit"] = True
            try:
                current = fit(model_kind, window, opts)
            except ConvergenceError as exc:
                rec["failed"] = True
                rec["error"] = str(exc)
                logger.warning("origin %d: %s", i, exc)
                if current is None:
                    current = exc.best
                    rec["used_incumbent"] = True
            except RegarchError as exc:
                rec["failed"] = True
                rec["error"] = str(exc)
                logger.warning("origin %d: %s", i, exc)
                if current is None:
                    raise
        rec["converged"] = bool(current.converged)
        rec["loglik_joint"] = current.loglik_joint
        rec["params"] = dict(zip(current.names, map(float, current.estimates)))
        h_hat[i - 1] = one_step(current, window)
        records.append(rec)
    return ForecastSeries(data.dates[k:], h_hat, scheme, k, model_kind, tuple(records))


def _n_free(result: FitResult) -> int:
    """Number of optimised (non-concentrated) parameters."""
    if result.model != "regarch":
        return len(result.names)
    K = result.params.K
    return len(result.names) - K * (K + 1) // 2


def forecast_recursive(model_kind: str, data: AlignedDataset, k: int | None = None,
                       options: ForecastOptions | None = None) -> ForecastSeries:
    """Expanding-window forecasts: origin ``i`` fits on days ``1..k+i-1``."""
    return _forecast(model_kind, data, default_window(data.T) if k is None else k, "recursive", options)


def forecast_rolling(model_kind: str, data: AlignedDataset, k: int | None = None,
                     options: ForecastOptions | None = None) -> ForecastSeries:
    """Fixed-width forecasts: origin ``i`` fits on days ``i..k+i-1``."""
    return _forecast(model_kind, data, default_window(data.T) if k is None else k, "rolling", options)


# --------------------------------------------------------------------------
# losses


def _values(series) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(series, ForecastSeries):
        return series.dates, series.h_hat
    if isinstance(series, RealizedMeasureSeries):
        return series.dates, series.values
    if isinstance(series, DailyReturnSeries):
        return series.dates, series.returns
    raise ValidationError(f"unsupported series type {type(series).__name__}")


def _paired(forecasts: ForecastSeries, other) -> tuple[np.ndarray, np.ndarray]:
    fd, fv = _values(forecasts)
    od, ov = _values(other)
    idx = np.searchsorted(od, fd)
    idx_c = np.minimum(idx, max(od.size - 1, 0))
    ok = (idx < od.size) & (od[idx_c] == fd) if od.size else np.zeros(fd.size, bool)
    if not np.all(ok):
        missing = fd[~ok][0]
        raise AlignmentError(f"no matching observation for forecast date {missing}")
    if fv.size == 0:
        raise InsufficientDataError("no forecasts to evaluate")
    return fv, ov[idx]


def mse(forecasts: ForecastSeries, proxy: RealizedMeasureSeries) -> float:
    """Mean squared forecast error against a variance proxy."""
    h, s2 = _paired(forecasts, proxy)
    return float(np.mean((h - s2) ** 2))


def qlike(forecasts: ForecastSeries, proxy: RealizedMeasureSeries) -> float:
    """Mean of ``x - log x - 1`` with ``x = proxy / forecast``."""
    h, s2 = _paired(forecasts, proxy)
    if np.any(h <= 0) or np.any(s2 <= 0):
        raise ValidationError("QLIKE needs strictly positive forecasts and proxy")
    x = s2 / h
    return float(np.mean(x - np.log(x) - 1.0))


def out_of_sample_loglik(forecasts: ForecastSeries, returns: DailyReturnSeries) -> float:
    """Gaussian predictive log-likelihood of the realised returns."""
    h, r = _paired(forecasts, returns)
    return float(-0.5 * np.sum(LOG_2PI + np.log(h) + r * r / h))


def evaluate(forecasts: ForecastSeries, proxy: RealizedMeasureSeries, returns: DailyReturnSeries) -> LossReport:
    return LossReport(
        mse=mse(forecasts, proxy),
        qlike=qlike(forecasts, proxy),
        loglik_out=out_of_sample_loglik(forecasts, returns),
        n_evaluated=len(forecasts),
    )
