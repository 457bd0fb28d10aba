"""Descriptive statistics, Jarque-Bera and Ljung-Box tests.

Moments use 1/T normalisation throughout and kurtosis is non-excess
(Gaussian = 3).
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Literal

import numpy as np

from .errors import DegenerateVarianceError, InsufficientDataError


@dataclass(frozen=True)
class DescriptiveReport:
    mean: float
    sd: float
    max: float
    min: float
    skewness: float
    kurtosis: float
    se_mean: float
    se_skew: float
    se_kurt: float
    jb_stat: float
    lb_stat: float = float("nan")
    lb_lags: int = 10
    T: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


def jarque_bera(skewness: float, kurtosis: float, T: int) -> float:
    """``(T/6) (Sk^2 + (Ku - 3)^2 / 4)``."""
    return T / 6.0 * (skewness**2 + (kurtosis - 3.0) ** 2 / 4.0)


def _centered(series) -> np.ndarray:
    x = np.asarray(series, dtype=float).ravel()
    d = x - x.mean()
    if not np.any(d) or float(d @ d) <= 1e-300:
        raise DegenerateVarianceError("series has zero variance")
    return d


def describe(series, lb_lags: int = 10, lb_adjust: str = "heteroskedasticity") -> DescriptiveReport:
    """Table-1 style summary of a series.

    The Ljung-Box field is filled when the series is long enough for
    ``lb_lags``; otherwise it is NaN.
    """
    x = np.asarray(series, dtype=float).ravel()
    T = x.size
    if T < 4:
        raise InsufficientDataError(f"describe needs T >= 4, got {T}")
    d = _centered(x)
    m2 = float(np.mean(d**2))
    m3 = float(np.mean(d**3))
    m4 = float(np.mean(d**4))
    skew = m3 / m2**1.5
    kurt = m4 / m2**2
    sd = math.sqrt(m2)
    lb = ljung_box(x, lb_lags, lb_adjust) if T > lb_lags + 1 else float("nan")
    return DescriptiveReport(
        mean=float(x.mean()),
        sd=sd,
        max=float(x.max()),
        min=float(x.min()),
        skewness=skew,
        kurtosis=kurt,
        se_mean=sd / math.sqrt(T),
        se_skew=math.sqrt(6.0 / T),
        se_kurt=math.sqrt(24.0 / T),
        jb_stat=jarque_bera(skew, kurt, T),
        lb_stat=lb,
        lb_lags=lb_lags,
        T=T,
    )


def autocorrelation(series, max_lag: int) -> np.ndarray:
    """Sample autocorrelations at lags ``1..max_lag`` (lag 0 excluded)."""
    x = np.asarray(series, dtype=float).ravel()
    T = x.size
    if max_lag < 1 or T <= max_lag:
        raise InsufficientDataError(f"need T > max_lag, got T={T}, max_lag={max_lag}")
    d = _centered(x)
    denom = float(d @ d)
    return np.array([float(d[j:] @ d[:-j]) / denom for j in range(1, max_lag + 1)])


def ljung_box(
    series,
    lags: int = 10,
    adjust: Literal["none", "heteroskedasticity"] = "heteroskedasticity",
) -> float:
    """Ljung-Box portmanteau statistic.

    With ``adjust="heteroskedasticity"`` each autocorrelation is divided by
    ``sqrt(T * v_j)`` where ``v_j = sum d_t^2 d_{t-j}^2 / (sum d_t^2)^2``, so
    the adjusted statistic coincides with the textbook one when the squared
    deviations are uncorrelated.
    """
    x = np.asarray(series, dtype=float).ravel()
    T = x.size
    if lags < 1 or lags >= T - 1:
        raise InsufficientDataError(f"Ljung-Box needs lags < T - 1, got T={T}, lags={lags}")
    if adjust not in ("none", "heteroskedasticity"):
        raise ValueError(f"unknown adjustment {adjust!r}")
    rho = autocorrelation(x, lags)
    if adjust == "heteroskedasticity":
        d2 = (x - x.mean()) ** 2
        ss = float(d2.sum())
        v = np.array([float(d2[j:] @ d2[:-j]) for j in range(1, lags + 1)]) / ss**2
        rho = rho / np.sqrt(T * v)
    j = np.arange(1, lags + 1)
    return float(T * (T + 2) * np.sum(rho**2 / (T - j)))
