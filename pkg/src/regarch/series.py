"""Dated series containers and alignment.

Dates are opaque sortable labels (ISO strings in practice). No calendar
arithmetic is done anywhere; alignment is purely by membership.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from .errors import AlignmentError, ValidationError

logger = logging.getLogger(__name__)

MEASURE_KINDS = ("squared-return", "RV", "RRV", "RK", "proxy")


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def _as_dates(dates) -> np.ndarray:
    out = np.array([str(d) for d in dates], dtype=str)
    if out.ndim != 1:
        raise ValidationError("dates must be one-dimensional")
    return out


def _check_increasing(dates: np.ndarray, what: str) -> None:
    if dates.size > 1:
        bad = np.nonzero(dates[1:] <= dates[:-1])[0]
        if bad.size:
            i = int(bad[0]) + 1
            raise ValidationError(
                f"{what}: dates must be strictly increasing, found {dates[i]!r} "
                f"after {dates[i - 1]!r}"
            )


@dataclass(frozen=True)
class DailyReturnSeries:
    """Close-to-close daily returns in percent."""

    dates: np.ndarray
    returns: np.ndarray

    def __post_init__(self):
        dates = _as_dates(self.dates)
        returns = np.array(self.returns, dtype=float).ravel()
        if dates.shape != returns.shape:
            raise ValidationError("dates and returns differ in length")
        _check_increasing(dates, "DailyReturnSeries")
        if not np.all(np.isfinite(returns)):
            raise ValidationError("returns must be finite")
        object.__setattr__(self, "dates", _frozen(dates))
        object.__setattr__(self, "returns", _frozen(returns))

    def __len__(self):
        return self.returns.size

    def take(self, idx) -> "DailyReturnSeries":
        return DailyReturnSeries(self.dates[idx], self.returns[idx])


@dataclass(frozen=True)
class IntradayGrid:
    """One day of equidistant OHLC bars, prices as natural logs."""

    date: str
    open: np.ndarray
    high: np.ndarray
    low: np.ndarray
    close: np.ndarray
    interval_seconds: int = 300

    def __post_init__(self):
        cols = [np.array(getattr(self, k), dtype=float).ravel() for k in ("open", "high", "low", "close")]
        o, h, lo, c = cols
        if not (o.shape == h.shape == lo.shape == c.shape):
            raise ValidationError("OHLC columns differ in length")
        if not all(np.all(np.isfinite(x)) for x in cols):
            raise ValidationError(f"{self.date}: non-finite log price")
        if int(self.interval_seconds) <= 0:
            raise ValidationError("interval_seconds must be positive")
        bad = np.nonzero((lo > np.minimum(o, c)) | (h < np.maximum(o, c)) | (h < lo))[0]
        if bad.size:
            raise ValidationError(
                f"{self.date}: bar {int(bad[0])} violates low <= open, close <= high"
            )
        object.__setattr__(self, "date", str(self.date))
        object.__setattr__(self, "interval_seconds", int(self.interval_seconds))
        for k, x in zip(("open", "high", "low", "close"), cols):
            object.__setattr__(self, k, _frozen(x))

    @property
    def n(self) -> int:
        return self.close.size

    def returns(self) -> np.ndarray:
        """Intraday log returns: first bar open-to-close, then close-to-close."""
        if self.n == 0:
            return np.empty(0)
        return np.diff(np.concatenate(([self.open[0]], self.close)))

    @classmethod
    def from_prices(cls, date, open, high, low, close, interval_seconds=300) -> "IntradayGrid":
        """Build from price levels (logs are taken here)."""
        return cls(date, np.log(open), np.log(high), np.log(low), np.log(close), interval_seconds)


@dataclass(frozen=True)
class RealizedMeasureSeries:
    """Strictly positive daily volatility measures in percent² units."""

    dates: np.ndarray
    values: np.ndarray
    kind: str = "RV"

    def __post_init__(self):
        dates = _as_dates(self.dates)
        values = np.array(self.values, dtype=float).ravel()
        if dates.shape != values.shape:
            raise ValidationError("dates and values differ in length")
        if self.kind not in MEASURE_KINDS:
            raise ValidationError(f"unknown measure kind {self.kind!r}")
        _check_increasing(dates, f"RealizedMeasureSeries[{self.kind}]")
        if not np.all(np.isfinite(values)) or np.any(values <= 0):
            raise ValidationError(f"{self.kind} values must be finite and > 0")
        object.__setattr__(self, "dates", _frozen(dates))
        object.__setattr__(self, "values", _frozen(values))

    def __len__(self):
        return self.values.size

    def take(self, idx) -> "RealizedMeasureSeries":
        return RealizedMeasureSeries(self.dates[idx], self.values[idx], self.kind)


@dataclass(frozen=True)
class AlignedDataset:
    """Returns plus K realized measures on one common date index."""

    returns: DailyReturnSeries
    measures: tuple = field(default_factory=tuple)

    def __post_init__(self):
        measures = tuple(self.measures)
        for m in measures:
            if not np.array_equal(m.dates, self.returns.dates):
                raise AlignmentError("all series in an AlignedDataset must share dates")
        object.__setattr__(self, "measures", measures)

    @property
    def dates(self) -> np.ndarray:
        return self.returns.dates

    @property
    def T(self) -> int:
        return len(self.returns)

    @property
    def K(self) -> int:
        return len(self.measures)

    def log_measures(self) -> np.ndarray:
        """K x T array of log measures."""
        if not self.measures:
            return np.empty((0, self.T))
        return np.log(np.vstack([m.values for m in self.measures]))

    def window(self, start: int, stop: int) -> "AlignedDataset":
        """Sub-dataset over positional range ``[start, stop)``."""
        sl = slice(start, stop)
        return AlignedDataset(self.returns.take(sl), tuple(m.take(sl) for m in self.measures))

    def select(self, indices: Sequence[int]) -> "AlignedDataset":
        """Keep only the measures at the given positions."""
        return AlignedDataset(self.returns, tuple(self.measures[i] for i in indices))


def align(
    returns: DailyReturnSeries,
    measures: Sequence[RealizedMeasureSeries] = (),
    policy: Literal["intersect", "strict"] = "intersect",
) -> AlignedDataset:
    """Put returns and measures on a common date index.

    Parameters
    ----------
    returns : DailyReturnSeries
    measures : sequence of RealizedMeasureSeries
    policy : {"intersect", "strict"}
        ``intersect`` keeps dates present in every input. ``strict`` requires
        identical date sets and raises naming the first offending date.
    """
    if policy not in ("intersect", "strict"):
        raise ValueError(f"unknown alignment policy {policy!r}")
    measures = list(measures)
    if policy == "strict":
        ref = returns.dates
        for m in measures:
            if not np.array_equal(m.dates, ref):
                # both sides are strictly increasing, so unequal means unequal sets
                first = min(set(ref).symmetric_difference(m.dates))
                raise AlignmentError(
                    f"{m.kind} dates differ from return dates, first offending date {first}"
                )
        return AlignedDataset(returns, tuple(measures))

    common = returns.dates
    for m in measures:
        common = np.intersect1d(common, m.dates, assume_unique=True)
    if common.size == 0:
        raise AlignmentError("date intersection is empty")
    dropped = len(returns) - common.size
    if dropped:
        logger.info("alignment dropped %d return dates", dropped)
    r = returns.take(np.isin(returns.dates, common))
    ms = tuple(m.take(np.isin(m.dates, common)) for m in measures)
    return AlignedDataset(r, ms)


def demean(
    returns: DailyReturnSeries, mode: Literal["none", "sample-mean"] = "none"
) -> DailyReturnSeries:
    """Remove the in-sample mean (``sample-mean``) or return input unchanged."""
    if len(returns) == 0:
        raise ValidationError("cannot demean an empty series")
    if mode == "none":
        return returns
    if mode != "sample-mean":
        raise ValueError(f"unknown demean mode {mode!r}")
    r = returns.returns
    return DailyReturnSeries(returns.dates, r - r.mean())
