"""Synthetic data: daily GARCH-family DGPs, intraday semimartingale paths and
Monte Carlo calibration of the range constant.

Randomness comes from :class:`numpy.random.SeedSequence`. Intraday paths use
one spawned child stream per day, so any day can be regenerated on its own.
Volatility inputs (``sigma``, ``noise_std``) are in percent of price per day,
so a constant ``sigma = 1`` gives a daily integrated variance of 1 percent².
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .errors import ParameterError, ValidationError
from .measures import PERCENT2, RangeScaling, realized_range_volatility, realized_variance
from .models import EgarchParams, GarchParams, GjrParams, RegarchParams
from .series import DailyReturnSeries, IntradayGrid, RealizedMeasureSeries

DAILY_DGPS = ("garch", "gjr", "egarch", "regarch")
INTRADAY_DGPS = ("brownian", "heston-like")
FOUR_LN2 = 4.0 * math.log(2.0)


@dataclass(frozen=True)
class HestonParams:
    """Square-root spot variance in percent² per day.

    ``kappa`` is the mean-reversion speed per day and ``rho`` the correlation
    between price and variance shocks.
    """

    v0: float = 1.0
    kappa: float = 0.03
    theta: float = 1.0
    eta: float = 0.2
    rho: float = -0.5

    def __post_init__(self):
        if not (self.v0 > 0 and self.kappa > 0 and self.theta > 0 and self.eta >= 0 and -1 <= self.rho <= 1):
            raise ParameterError(f"invalid Heston parameters {self}")


@dataclass(frozen=True)
class SimConfig:
    """Simulation settings.

    ``true_params`` is a model parameter object for daily DGPs or a
    :class:`HestonParams` for ``heston-like``. ``sigma`` is the constant
    daily volatility for ``brownian`` and ``mu`` its daily drift, both in
    percent.
    """

    seed: int = 0
    T: int = 1000
    n: int = 78
    m: int = 1
    dgp: str = "garch"
    true_params: object = None
    sigma: float = 1.0
    mu: float = 0.0
    noise_std: float = 0.0
    measure_kinds: tuple | None = None
    start_date: str = "2010-01-04"

    def __post_init__(self):
        if self.T < 1 or self.n < 1 or self.m < 1:
            raise ValidationError("T, n and m must be >= 1")
        if self.noise_std < 0:
            raise ValidationError("noise_std must be >= 0")
        if self.dgp not in DAILY_DGPS + INTRADAY_DGPS:
            raise ValidationError(f"unknown dgp {self.dgp!r}")


@dataclass(frozen=True, eq=False)
class SimOutput:
    returns: DailyReturnSeries
    true_h: np.ndarray
    measures: tuple = field(default_factory=tuple)
    grids: tuple | None = None
    iv: np.ndarray | None = None
    iq: np.ndarray | None = None


def sim_dates(T: int, start: str = "2010-01-04") -> np.ndarray:
    """Consecutive ISO-date labels; only their order matters."""
    return (np.datetime64(start) + np.arange(T)).astype(str)


def simulate_model(config: SimConfig) -> SimOutput:
    """Simulate a daily GARCH, GJR, EGARCH or realized EGARCH path.

    The recursion starts at the unconditional level (``omega / (1 - alpha -
    beta)`` for GARCH-type variance, ``omega`` for log variance).
    """
    p = config.true_params
    T = config.T
    rng = np.random.default_rng(np.random.SeedSequence(config.seed))
    dates = sim_dates(T, config.start_date)
    z = rng.standard_normal(T)
    h = np.empty(T)
    r = np.empty(T)
    measures = ()

    if config.dgp in ("garch", "gjr"):
        if isinstance(p, GarchParams):
            p = GjrParams(p.omega, p.alpha, p.beta, 0.0)
        if not isinstance(p, GjrParams):
            raise ParameterError("garch/gjr DGP needs GarchParams or GjrParams")
        persist = p.alpha + p.beta + p.tau / 2
        if persist >= 1:
            raise ParameterError("DGP must be covariance stationary")
        ht = p.omega / (1 - persist)
        for t in range(T):
            h[t] = ht
            r[t] = math.sqrt(ht) * z[t]
            ht = p.omega + p.beta * ht + (p.alpha + (p.tau if r[t] < 0 else 0.0)) * r[t] ** 2
    elif config.dgp == "egarch":
        if not isinstance(p, EgarchParams):
            raise ParameterError("egarch DGP needs EgarchParams")
        lh = p.omega
        for t in range(T):
            h[t] = math.exp(lh)
            r[t] = math.sqrt(h[t]) * z[t]
            lh = p.omega + p.beta * (lh - p.omega) + p.tau11 * z[t] + p.tau12 * (abs(z[t]) - math.sqrt(2 / math.pi))
    elif config.dgp == "regarch":
        if not isinstance(p, RegarchParams):
            raise ParameterError("regarch DGP needs RegarchParams")
        K = p.K
        u = rng.multivariate_normal(np.zeros(K), p.sigma, size=T, method="cholesky").T
        logx = np.empty((K, T))
        lh = p.omega
        for t in range(T):
            h[t] = math.exp(lh)
            r[t] = math.sqrt(h[t]) * z[t]
            q = z[t] ** 2 - 1
            logx[:, t] = p.xi + p.phi * lh + p.delta1 * z[t] + p.delta2 * q + u[:, t]
            lh = p.omega + p.beta * (lh - p.omega) + p.tau1 * z[t] + p.tau2 * q + float(p.gamma @ u[:, t])
        kinds = config.measure_kinds or (("RV",) if K == 1 else ("RV", "RRV") + ("RK",) * (K - 2))
        if len(kinds) != K:
            raise ValidationError("measure_kinds must have one entry per measure")
        measures = tuple(RealizedMeasureSeries(dates, np.exp(logx[k]), kinds[k]) for k in range(K))
    else:
        raise ValidationError(f"{config.dgp!r} is not a daily DGP; use simulate_intraday")

    return SimOutput(returns=DailyReturnSeries(dates, r), true_h=h, measures=measures)


def _day_path(config: SimConfig, rng: np.random.Generator, v_start: float):
    """Fine-grid log-price increments (log units) and spot variances for one day."""
    N = config.n * config.m
    dt = 1.0 / N
    if config.dgp == "brownian":
        s = config.sigma / 100.0
        dp = config.mu / 100.0 * dt + s * math.sqrt(dt) * rng.standard_normal(N)
        return dp, np.full(N, config.sigma**2), v_start
    hp: HestonParams = config.true_params
    e1 = rng.standard_normal(N)
    e2 = hp.rho * e1 + math.sqrt(1 - hp.rho**2) * rng.standard_normal(N)
    v = np.empty(N)
    vt = v_start
    sdt = math.sqrt(dt)
    for i in range(N):
        v[i] = vt
        vp = max(vt, 0.0)
        vt = vt + hp.kappa * (hp.theta - vp) * dt + hp.eta * math.sqrt(vp) * sdt * e2[i]
    vpos = np.maximum(v, 0.0)
    dp = (config.mu / 100.0 - 0.5 * vpos / PERCENT2) * dt + np.sqrt(vpos * dt) / 100.0 * e1
    return dp, vpos, vt


def simulate_intraday(config: SimConfig, keep_grids: bool = True) -> SimOutput:
    """Euler paths of the log price on ``n * m`` steps per day.

    Bars aggregate ``m`` fine steps; open is the previous fine point, high and
    low are extrema of the ``m + 1`` observed points. ``iv`` and ``iq`` are
    Riemann sums of the spot variance on the fine grid (percent² and
    percent⁴). Each day starts from the previous close, so the daily return
    is the sum of that day's increments.
    """
    if config.dgp not in INTRADAY_DGPS:
        raise ValidationError(f"{config.dgp!r} is not an intraday DGP")
    if config.dgp == "heston-like" and not isinstance(config.true_params, HestonParams):
        raise ParameterError("heston-like DGP needs HestonParams")
    T, n, m = config.T, config.n, config.m
    N = n * m
    streams = np.random.SeedSequence(config.seed).spawn(T)
    dates = sim_dates(T, config.start_date)
    interval = max(1, round(6.5 * 3600 / n))
    noise = config.noise_std / 100.0
    rets = np.empty(T)
    iv = np.empty(T)
    iq = np.empty(T)
    grids = []
    p0 = math.log(100.0)
    v = config.true_params.v0 if config.dgp == "heston-like" else config.sigma**2
    for d in range(T):
        rng = np.random.default_rng(streams[d])
        dp, spot, v = _day_path(config, rng, v)
        path = p0 + np.concatenate(([0.0], np.cumsum(dp)))
        iv[d] = float(np.sum(spot)) / N
        iq[d] = float(np.sum(spot**2)) / N
        obs = path + noise * rng.standard_normal(N + 1) if noise > 0 else path
        rets[d] = (obs[-1] - obs[0]) * 100.0
        if keep_grids:
            blocks = np.lib.stride_tricks.sliding_window_view(obs, m + 1)[::m]
            grids.append(IntradayGrid(dates[d], blocks[:, 0], blocks.max(axis=1),
                                      blocks.min(axis=1), blocks[:, -1], interval))
        p0 = path[-1]
    return SimOutput(
        returns=DailyReturnSeries(dates, rets),
        true_h=iv.copy(),
        grids=tuple(grids) if keep_grids else None,
        iv=iv,
        iq=iq,
    )


def _range_sq_discrete(rng, reps, m, chunk):
    out = []
    done = 0
    while done < reps:
        b = min(chunk, reps - done)
        w = np.cumsum(rng.standard_normal((b, m)), axis=1) / math.sqrt(m)
        hi = np.maximum(w.max(axis=1), 0.0)
        lo = np.minimum(w.min(axis=1), 0.0)
        out.append((hi - lo) ** 2)
        done += b
    return np.concatenate(out)


@njit(cache=True)
def _bridge_candidates(z, sd, cut, w, dmax, dmin):
    """Cumulate increments into ``w`` and count steps that may hold an extreme."""
    b, steps = z.shape
    n_hi = 0
    n_lo = 0
    for i in range(b):
        acc = 0.0
        hi = 0.0
        lo = 0.0
        w[i, 0] = 0.0
        for j in range(steps):
            acc += sd * z[i, j]
            w[i, j + 1] = acc
            if acc > hi:
                hi = acc
            elif acc < lo:
                lo = acc
        dmax[i] = hi
        dmin[i] = lo
        for j in range(steps):
            a = w[i, j]
            c = w[i, j + 1]
            if max(a, c) >= hi - cut:
                n_hi += 1
            if min(a, c) <= lo + cut:
                n_lo += 1
    return n_hi, n_lo


@njit(cache=True)
def _bridge_extrema(w, dt, cut, dmax, dmin, u_hi, u_lo):
    """Replace discrete extrema by exact bridge extrema on candidate steps."""
    b = w.shape[0]
    steps = w.shape[1] - 1
    k_hi = 0
    k_lo = 0
    for i in range(b):
        hi = dmax[i]
        lo = dmin[i]
        top = hi
        bot = lo
        for j in range(steps):
            a = w[i, j]
            c = w[i, j + 1]
            if max(a, c) >= hi - cut:
                m = 0.5 * (a + c + math.sqrt((c - a) ** 2 - 2.0 * dt * math.log(u_hi[k_hi])))
                k_hi += 1
                if m > top:
                    top = m
            if min(a, c) <= lo + cut:
                m = 0.5 * (a + c - math.sqrt((c - a) ** 2 - 2.0 * dt * math.log(u_lo[k_lo])))
                k_lo += 1
                if m < bot:
                    bot = m
        dmax[i] = top
        dmin[i] = bot


def _range_continuous(rng, reps, steps, chunk):
    """Running max and min of Brownian motion on [0, 1].

    A fine grid is refined by exact Brownian-bridge extrema: given endpoints
    ``a, c`` over a step of length ``dt`` the bridge maximum is
    ``(a + c + sqrt((c - a)^2 - 2 dt log U)) / 2``. Only steps whose
    endpoints come within ``8 sqrt(dt)`` of the discrete extreme are
    refined; missing a larger excursion has probability below ``exp(-128)``.
    The max and the min are refined independently, which ignores their
    joint law inside a single step.
    """
    dt = 1.0 / steps
    sd = math.sqrt(dt)
    cut = 8.0 * sd
    his, los = [], []
    w = np.empty((chunk, steps + 1))
    done = 0
    while done < reps:
        b = min(chunk, reps - done)
        z = rng.standard_normal((b, steps), dtype=np.float32)
        dmax = np.empty(b)
        dmin = np.empty(b)
        n_hi, n_lo = _bridge_candidates(z, sd, cut, w[:b], dmax, dmin)
        _bridge_extrema(w[:b], dt, cut, dmax, dmin, rng.random(n_hi), rng.random(n_lo))
        his.append(dmax)
        los.append(dmin)
        done += b
    return np.concatenate(his), np.concatenate(los)


def calibrate_lambda(m: int | None, reps: int = 100_000, seed: int = 0,
                     fine_steps: int = 10_000, chunk: int | None = None) -> tuple[float, float]:
    """Monte Carlo second moment of the range of a standard Brownian motion on
    ``[0, 1]`` observed at ``m + 1`` equidistant points (``m=None`` for
    continuous monitoring).

    Returns
    -------
    (lambda2m, mc_error)
        Estimate and its Monte Carlo standard error.
    """
    if reps < 1000:
        raise ValidationError("calibrate_lambda needs reps >= 1000")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    if m is None or (isinstance(m, float) and math.isinf(m)):
        if fine_steps < 10_000:
            raise ValidationError("continuous monitoring needs fine_steps >= 10000")
        hi, lo = _range_continuous(rng, reps, fine_steps, chunk or 500)
        s2 = (hi - lo) ** 2
        # E[max^2] = E[min^2] = 1 for Brownian motion on [0, 1]
        ctrl = np.column_stack([hi**2 - 1.0, lo**2 - 1.0])
        coef, *_ = np.linalg.lstsq(ctrl - ctrl.mean(axis=0), s2 - s2.mean(), rcond=None)
        adj = s2 - ctrl @ coef
        return float(adj.mean()), float(adj.std(ddof=3) / math.sqrt(reps))
    else:
        if int(m) < 1:
            raise ValidationError("m must be >= 1")
        s2 = _range_sq_discrete(rng, reps, int(m), chunk or max(1, 2_000_000 // int(m)))
    return float(s2.mean()), float(s2.std(ddof=1) / math.sqrt(reps))


def range_efficiency(m: int | None, reps: int = 50_000, seed: int = 0,
                     fine_steps: int = 10_000) -> float:
    """Monte Carlo ``Lambda_m = (lambda_4 - lambda_2^2) / lambda_2^2``, the
    variance of the squared Brownian range relative to its squared mean.

    ``n Var(RRV) / sigma^4`` converges to this constant for constant
    volatility. Its continuous-monitoring limit is about 0.4073.
    """
    if reps < 1000:
        raise ValidationError("range_efficiency needs reps >= 1000")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    if m is None:
        hi, lo = _range_continuous(rng, reps, fine_steps, 500)
        s2 = (hi - lo) ** 2
    else:
        s2 = _range_sq_discrete(rng, reps, int(m), max(1, 2_000_000 // int(m)))
    return float(np.var(s2) / np.mean(s2) ** 2)


@dataclass(frozen=True)
class EfficiencyReport:
    var_rv: float
    var_rrv: float
    ratio: float
    lambda_hat: float
    rv_asymptotic_ratio: float
    lambda2m: float


def efficiency_report(config: SimConfig, lambda2m: float | None = None,
                      lambda_reps: int = 200_000) -> EfficiencyReport:
    """Compare the across-day variances of RV and RRV on constant-volatility paths.

    ``lambda_hat = n Var(RRV) / sigma^4`` estimates the range efficiency
    constant and ``rv_asymptotic_ratio = n Var(RV) / (2 IQ)`` should be near 1.
    When ``lambda2m`` is omitted it is calibrated by :func:`calibrate_lambda`
    for the configured ``m``.
    """
    if config.dgp != "brownian":
        raise ValidationError("efficiency_report needs a constant-volatility brownian config")
    if lambda2m is None:
        lambda2m = 1.0 if config.m == 1 else calibrate_lambda(config.m, lambda_reps, config.seed + 1)[0]
    sim = simulate_intraday(config)
    scaling = RangeScaling(lambda2m, config.m)
    rv = np.array([realized_variance(g) for g in sim.grids])
    rrv = np.array([realized_range_volatility(g, scaling) for g in sim.grids])
    var_rv = float(np.var(rv, ddof=1))
    var_rrv = float(np.var(rrv, ddof=1))
    s4 = config.sigma**4
    return EfficiencyReport(
        var_rv=var_rv,
        var_rrv=var_rrv,
        ratio=var_rv / var_rrv,
        lambda_hat=config.n * var_rrv / s4,
        rv_asymptotic_ratio=config.n * var_rv / (2.0 * float(np.mean(sim.iq))),
        lambda2m=lambda2m,
    )
