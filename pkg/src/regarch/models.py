"""GARCH(1,1), GJR(1,1), EGARCH(1,1) and realized EGARCH variance filters.

Every filter is a deterministic single pass over the data. The returned
:class:`FilterOutput` carries the conditional variances, standardized
residuals, the REGARCH measurement residuals and the Gaussian
quasi-log-likelihood pieces.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields

import numpy as np

from . import _recursions as rec
from .errors import NumericalError, ParameterError, ValidationError
from .series import AlignedDataset, DailyReturnSeries

LOG_2PI = math.log(2.0 * math.pi)
E_ABS_Z = rec.SQRT_2_OVER_PI


@dataclass(frozen=True)
class GarchParams:
    omega: float
    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.omega > 0 and self.alpha >= 0 and self.beta >= 0):
            raise ParameterError(f"GARCH needs omega > 0, alpha >= 0, beta >= 0: {self}")


@dataclass(frozen=True)
class GjrParams:
    omega: float
    alpha: float
    beta: float
    tau: float

    def __post_init__(self):
        if not (self.omega > 0 and self.alpha >= 0 and self.beta >= 0 and self.tau >= 0):
            raise ParameterError(f"GJR needs omega > 0 and alpha, beta, tau >= 0: {self}")


@dataclass(frozen=True)
class EgarchParams:
    omega: float
    beta: float
    tau11: float
    tau12: float

    def __post_init__(self):
        if not abs(self.beta) < 1:
            raise ParameterError(f"EGARCH needs |beta| < 1, got {self.beta}")


def _vec(x, K, name):
    a = np.atleast_1d(np.asarray(x, dtype=float)).copy()
    if a.shape != (K,):
        raise ParameterError(f"{name} must have length K={K}, got shape {a.shape}")
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class RegarchParams:
    """Realized EGARCH with K measurement equations.

    ``sigma`` is the K x K covariance of the measurement errors.
    """

    omega: float
    beta: float
    tau1: float
    tau2: float
    gamma: np.ndarray
    xi: np.ndarray
    delta1: np.ndarray
    delta2: np.ndarray
    sigma: np.ndarray
    phi: np.ndarray = None

    def __post_init__(self):
        gamma = np.atleast_1d(np.asarray(self.gamma, dtype=float))
        K = gamma.size
        if K < 1:
            raise ParameterError("REGARCH needs at least one measure")
        object.__setattr__(self, "gamma", _vec(gamma, K, "gamma"))
        for name in ("xi", "delta1", "delta2"):
            object.__setattr__(self, name, _vec(getattr(self, name), K, name))
        phi = np.ones(K) if self.phi is None else self.phi
        object.__setattr__(self, "phi", _vec(phi, K, "phi"))
        sigma = np.atleast_2d(np.asarray(self.sigma, dtype=float)).copy()
        if sigma.shape != (K, K):
            raise ParameterError(f"sigma must be {K}x{K}, got {sigma.shape}")
        if not np.allclose(sigma, sigma.T, rtol=0, atol=1e-12):
            raise ParameterError("sigma must be symmetric")
        try:
            np.linalg.cholesky(sigma)
        except np.linalg.LinAlgError:
            raise ParameterError("sigma must be positive definite") from None
        sigma.setflags(write=False)
        object.__setattr__(self, "sigma", sigma)
        if not abs(self.beta) < 1:
            raise ParameterError(f"REGARCH needs |beta| < 1, got {self.beta}")
        for name in ("omega", "beta", "tau1", "tau2"):
            object.__setattr__(self, name, float(getattr(self, name)))

    @property
    def K(self) -> int:
        return self.gamma.size

    def __eq__(self, other):
        if not isinstance(other, RegarchParams):
            return NotImplemented
        return all(np.array_equal(getattr(self, f.name), getattr(other, f.name)) for f in fields(self))

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            out[f.name] = v.tolist() if isinstance(v, np.ndarray) else v
        return out


@dataclass(frozen=True, eq=False)
class FilterOutput:
    h: np.ndarray
    z: np.ndarray
    loglik_return: float
    u: np.ndarray = field(default_factory=lambda: np.empty((0, 0)))
    loglik_measurement: float = 0.0
    loglik_joint: float = float("nan")
    h_next: float = float("nan")

    def __post_init__(self):
        if math.isnan(self.loglik_joint):
            object.__setattr__(
                self, "loglik_joint", self.loglik_return + self.loglik_measurement
            )


def _returns_array(returns) -> np.ndarray:
    if isinstance(returns, DailyReturnSeries):
        return np.ascontiguousarray(returns.returns)
    if isinstance(returns, AlignedDataset):
        return np.ascontiguousarray(returns.returns.returns)
    return np.ascontiguousarray(np.asarray(returns, dtype=float))


def default_h1(r: np.ndarray) -> float:
    """In-sample return variance, the default initial conditional variance."""
    v = float(np.var(r)) if r.size > 1 else float(r @ r)
    return v if v > 0 else 1.0


def return_loglik_terms(h, r) -> np.ndarray:
    h = np.asarray(h, dtype=float)
    r = np.asarray(r, dtype=float)
    return -0.5 * (LOG_2PI + np.log(h) + r * r / h)


def return_loglik(h, returns) -> float:
    """Gaussian log-likelihood of returns given conditional variances."""
    r = _returns_array(returns)
    h = np.asarray(h, dtype=float)
    if h.shape != r.shape:
        raise ValidationError("h and returns differ in length")
    if np.any(h <= 0):
        raise ValidationError("conditional variances must be positive")
    return float(np.sum(return_loglik_terms(h, r)))


def _gjr(omega, alpha, beta, tau, r, h1):
    h = np.empty(r.size + 1)
    bad = rec.gjr_core(omega, alpha, beta, tau, r, h1, h)
    if bad >= 0:
        raise NumericalError(f"conditional variance left the finite range at index {bad}", bad)
    ht = h[:-1]
    return FilterOutput(
        h=ht, z=r / np.sqrt(ht), loglik_return=float(np.sum(return_loglik_terms(ht, r))), h_next=h[-1]
    )


def garch_filter(params: GarchParams, returns, h1: float | None = None) -> FilterOutput:
    """GARCH(1,1): ``h_t = omega + beta h_{t-1} + alpha r_{t-1}^2``."""
    r = _returns_array(returns)
    h1 = default_h1(r) if h1 is None else h1
    if not h1 > 0:
        raise ValidationError("h1 must be positive")
    return _gjr(params.omega, params.alpha, params.beta, 0.0, r, float(h1))


def gjr_filter(params: GjrParams, returns, h1: float | None = None) -> FilterOutput:
    """GJR(1,1): GARCH plus ``tau * 1{r_{t-1} < 0} r_{t-1}^2``."""
    r = _returns_array(returns)
    h1 = default_h1(r) if h1 is None else h1
    if not h1 > 0:
        raise ValidationError("h1 must be positive")
    return _gjr(params.omega, params.alpha, params.beta, params.tau, r, float(h1))


def egarch_filter(params: EgarchParams, returns, logh1: float | None = None) -> FilterOutput:
    """EGARCH(1,1) on the log variance with leverage ``tau11 z + tau12 (|z| - E|z|)``."""
    r = _returns_array(returns)
    logh1 = math.log(default_h1(r)) if logh1 is None else logh1
    logh = np.empty(r.size + 1)
    z = np.empty(r.size)
    bad = rec.egarch_core(params.omega, params.beta, params.tau11, params.tau12, r, float(logh1), logh, z)
    if bad >= 0:
        raise NumericalError(f"log variance left the finite range at index {bad}", bad)
    h = np.exp(logh[:-1])
    return FilterOutput(
        h=h, z=z, loglik_return=float(np.sum(return_loglik_terms(h, r))), h_next=math.exp(logh[-1])
    )


def run_regarch(params: RegarchParams, r: np.ndarray, logx: np.ndarray, logh1: float):
    """Raw structural recursion; returns ``(logh[T+1], z[T], u[K, T])``."""
    T = r.size
    logh = np.empty(T + 1)
    z = np.empty(T)
    u = np.empty((params.K, T))
    bad, _, _ = rec.regarch_core(
        params.omega, params.beta, params.tau1, params.tau2, params.gamma, params.xi,
        params.phi, params.delta1, params.delta2, r, logx, float(logh1), logh, z, u,
    )
    if bad >= 0:
        raise NumericalError(f"log variance left the finite range at index {bad}", bad)
    return logh, z, u


def measurement_loglik_terms(u: np.ndarray, sigma: np.ndarray) -> np.ndarray:
    """Per-day K-variate Gaussian log density of the measurement residuals."""
    K = u.shape[0]
    L = np.linalg.cholesky(sigma)
    w = np.linalg.solve(L, u)
    logdet = 2.0 * float(np.sum(np.log(np.diag(L))))
    return -0.5 * (K * LOG_2PI + logdet + np.sum(w * w, axis=0))


def regarch_filter(params: RegarchParams, data: AlignedDataset, logh1: float | None = None) -> FilterOutput:
    """Filter the realized EGARCH model through ``data``.

    For each day the standardized return and the measurement residuals are
    computed from the current log variance, and the residuals then feed the
    next day's log variance through ``gamma``.
    """
    if data.K != params.K:
        raise ValidationError(f"model has K={params.K} measures, data has {data.K}")
    r = _returns_array(data)
    logx = np.ascontiguousarray(data.log_measures())
    logh1 = math.log(default_h1(r)) if logh1 is None else logh1
    logh, z, u = run_regarch(params, r, logx, logh1)
    h = np.exp(logh[:-1])
    ll_r = float(np.sum(return_loglik_terms(h, r)))
    ll_m = float(np.sum(measurement_loglik_terms(u, params.sigma)))
    return FilterOutput(
        h=h, z=z, loglik_return=ll_r, u=u, loglik_measurement=ll_m,
        loglik_joint=ll_r + ll_m, h_next=math.exp(logh[-1]),
    )


def regarch_reduced_recursion(params: RegarchParams, logh_prev: float, z_prev: float, logx_prev) -> float:
    """One step of the GARCH equation with the measurement equation substituted in.

    The coefficient on the lagged log variance is ``beta - sum_k gamma_k phi_k``.
    """
    g = params.gamma
    logx_prev = np.asarray(logx_prev, dtype=float)
    q = z_prev * z_prev - 1.0
    return float(
        params.omega * (1.0 - params.beta)
        + g @ (logx_prev - params.xi)
        + (params.beta - g @ params.phi) * logh_prev
        + (params.tau1 - g @ params.delta1) * z_prev
        + (params.tau2 - g @ params.delta2) * q
    )
