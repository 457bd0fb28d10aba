"""Quasi-maximum-likelihood estimation with robust standard errors.

Parameters are optimised in an unconstrained space: ``exp`` for strictly
positive values, squares for values allowed to touch zero, logistic maps for
persistence. For the realized EGARCH the measurement covariance is
concentrated out as the residual second-moment matrix, which turns the
measurement block of the Gaussian likelihood into
``-T/2 (K log 2pi + log|S| + K)``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import optimize
from scipy.special import expit, logit

from . import _recursions as rec
from .errors import ConditioningError, ConvergenceError, InsufficientDataError, ValidationError
from .models import (
    LOG_2PI,
    EgarchParams,
    GarchParams,
    GjrParams,
    RegarchParams,
    default_h1,
    measurement_loglik_terms,
)
from .series import AlignedDataset, DailyReturnSeries

logger = logging.getLogger(__name__)

MODEL_KINDS = ("garch", "gjr", "egarch", "regarch")
_PENALTY = 1e10
# unconstrained coordinates beyond this are treated as infeasible; stops the
# simplex from expanding along flat directions at a boundary optimum
_THETA_BOUND = 50.0


@dataclass(frozen=True)
class FitOptions:
    """Knobs for :func:`fit`.

    ``start`` is an optional natural-parameter vector (in the order of
    ``param_names``) tried before the standard starting points.
    """

    seed: int = 0
    n_starts: int = 5
    tol_grad: float = 1e-4
    tol_obj: float = 1e-8
    stationarity: bool = True
    free_phi: bool = False
    min_obs: int = 50
    start: tuple | None = None
    compute_se: bool = True
    nm_maxiter: int | None = None
    bfgs_maxiter: int = 400
    perturb_scale: float = 0.25


@dataclass(frozen=True, eq=False)
class FitResult:
    model: str
    params: object
    names: tuple
    estimates: np.ndarray
    std_errors: np.ndarray
    loglik_joint: float
    loglik_return: float
    aic: float
    sbic: float
    n_params: int
    T: int
    converged: bool
    n_iterations: int
    grad_norm: float
    free_phi: bool = False
    objective_trace: tuple = field(default_factory=tuple)
    start_objectives: tuple = field(default_factory=tuple)

    def to_dict(self) -> dict:
        se = dict(zip(self.names, (float(s) for s in self.std_errors)))
        return {
            "model": self.model,
            "params": dict(zip(self.names, (float(v) for v in self.estimates))),
            "std_errors": se,
            "loglik_joint": self.loglik_joint,
            "loglik_return": self.loglik_return,
            "aic": self.aic,
            "sbic": self.sbic,
            "n_params": self.n_params,
            "T": self.T,
            "converged": self.converged,
            "n_iterations": self.n_iterations,
            "grad_norm": self.grad_norm,
            "free_phi": self.free_phi,
        }


def information_criteria(loglik: float, n_params: int, T: int) -> tuple[float, float]:
    """Akaike and Schwarz criteria ``(-2 lnL + 2n, -2 lnL + n ln T)``."""
    if T < 1:
        raise ValidationError("T must be >= 1")
    return -2.0 * loglik + 2.0 * n_params, -2.0 * loglik + n_params * math.log(T)


# --------------------------------------------------------------------------
# model specifications


class _Spec:
    kind: str
    names: tuple

    def __init__(self, data: AlignedDataset, opts: FitOptions):
        self.opts = opts
        self.r = np.ascontiguousarray(data.returns.returns)
        self.T = self.r.size
        self.h1 = default_h1(self.r)

    # natural <-> unconstrained
    def transform(self, x):
        raise NotImplementedError

    def untransform(self, theta):
        raise NotImplementedError

    def initial(self):
        raise NotImplementedError

    def loglik(self, x):
        """``(joint, return)`` log-likelihood at natural parameters ``x``."""
        raise NotImplementedError

    def terms(self, x_full):
        """Per-day log-likelihood contributions at full natural parameters."""
        raise NotImplementedError

    def full(self, x):
        """Natural vector extended with any concentrated parameters."""
        return np.asarray(x, dtype=float)

    @property
    def full_names(self):
        return self.names

    def n_params(self):
        return len(self.full_names)

    def make_params(self, x_full):
        raise NotImplementedError


class _GjrSpec(_Spec):
    kind = "gjr"
    names = ("omega", "alpha", "beta", "tau")

    def transform(self, x):
        w, a, b, t = x
        return np.array([math.log(w), math.sqrt(a), logit(b), math.sqrt(t)])

    def untransform(self, th):
        return np.array([math.exp(th[0]), th[1] ** 2, expit(th[2]), th[3] ** 2])

    def initial(self):
        a, t, b = 0.03, 0.05, 0.9
        return np.array([self.h1 * max(1 - a - t / 2 - b, 0.02), a, b, t])

    def _h(self, w, a, b, t):
        h = np.empty(self.T + 1)
        if rec.gjr_core(w, a, b, t, self.r, self.h1, h) >= 0:
            return None
        return h[:-1]

    def terms(self, x):
        h = self._h(*self._gjr_args(x))
        if h is None:
            return None
        return -0.5 * (LOG_2PI + np.log(h) + self.r**2 / h)

    def _gjr_args(self, x):
        return x[0], x[1], x[2], x[3]

    def loglik(self, x):
        lt = self.terms(x)
        if lt is None:
            return None
        ll = float(lt.sum())
        return ll, ll

    def make_params(self, x):
        return GjrParams(*map(float, x))


class _GarchSpec(_GjrSpec):
    kind = "garch"
    names = ("omega", "alpha", "beta")

    def transform(self, x):
        w, a, b = x
        if self.opts.stationarity:
            p = a + b
            share = min(max(a / p, 1e-12), 1 - 1e-12) if p > 0 else 0.5
            return np.array([math.log(w), logit(p), logit(share)])
        return np.array([math.log(w), math.sqrt(a), logit(b)])

    def untransform(self, th):
        if self.opts.stationarity:
            p = expit(th[1])
            a = p * expit(th[2])
            return np.array([math.exp(th[0]), a, p - a])
        return np.array([math.exp(th[0]), th[1] ** 2, expit(th[2])])

    def initial(self):
        a, b = 0.05, 0.9
        return np.array([self.h1 * (1 - a - b), a, b])

    def _gjr_args(self, x):
        return x[0], x[1], x[2], 0.0

    def make_params(self, x):
        return GarchParams(*map(float, x))


class _EgarchSpec(_Spec):
    kind = "egarch"
    names = ("omega", "beta", "tau11", "tau12")

    def transform(self, x):
        return np.array([x[0], logit(x[1]), x[2], x[3]])

    def untransform(self, th):
        return np.array([th[0], expit(th[1]), th[2], th[3]])

    def initial(self):
        return np.array([math.log(self.h1), 0.9, -0.05, 0.1])

    def terms(self, x):
        logh = np.empty(self.T + 1)
        z = np.empty(self.T)
        if rec.egarch_core(x[0], x[1], x[2], x[3], self.r, math.log(self.h1), logh, z) >= 0:
            return None
        return -0.5 * (LOG_2PI + logh[:-1] + z * z)

    def loglik(self, x):
        lt = self.terms(x)
        if lt is None:
            return None
        ll = float(lt.sum())
        return ll, ll

    def make_params(self, x):
        return EgarchParams(*map(float, x))


class _RegarchSpec(_Spec):
    kind = "regarch"

    def __init__(self, data: AlignedDataset, opts: FitOptions):
        super().__init__(data, opts)
        if data.K < 1:
            raise ValidationError("REGARCH needs at least one realized measure")
        self.K = K = data.K
        self.logx = np.ascontiguousarray(data.log_measures())
        self.logh1 = math.log(self.h1)
        self.free_phi = opts.free_phi
        idx = [f"{i}" for i in range(1, K + 1)]
        names = ["omega", "beta", "tau1", "tau2"]
        names += [f"gamma{i}" for i in idx] + [f"xi{i}" for i in idx]
        if self.free_phi:
            names += [f"phi{i}" for i in idx]
        names += [f"delta{i}1" for i in idx] + [f"delta{i}2" for i in idx]
        self.names = tuple(names)
        self._tril = np.tril_indices(K)
        self.sigma_names = tuple(f"sigma{j + 1}{i + 1}" for i, j in zip(*self._tril))
        self._buf = (np.empty(self.T + 1), np.empty(self.T), np.empty((K, self.T)))

    @property
    def full_names(self):
        return self.names + self.sigma_names

    def transform(self, x):
        th = np.array(x, dtype=float)
        th[1] = logit(x[1])
        return th

    def untransform(self, th):
        x = np.array(th, dtype=float)
        x[1] = expit(th[1])
        return x

    def _split(self, x):
        K = self.K
        w, b, t1, t2 = x[:4]
        pos = 4
        g = x[pos:pos + K]; pos += K
        xi = x[pos:pos + K]; pos += K
        if self.free_phi:
            phi = x[pos:pos + K]; pos += K
        else:
            phi = np.ones(K)
        d1 = x[pos:pos + K]; pos += K
        d2 = x[pos:pos + K]; pos += K
        return (w, b, t1, t2, np.ascontiguousarray(g), np.ascontiguousarray(xi),
                np.ascontiguousarray(phi), np.ascontiguousarray(d1), np.ascontiguousarray(d2)), pos

    def _run(self, x):
        (w, b, t1, t2, g, xi, phi, d1, d2), _ = self._split(x)
        logh, z, u = self._buf
        bad, s_logh, s_z2 = rec.regarch_core(
            w, b, t1, t2, g, xi, phi, d1, d2, self.r, self.logx, self.logh1, logh, z, u
        )
        if bad >= 0:
            return None
        return logh, z, u, s_logh, s_z2

    def initial(self):
        K = self.K
        x = [self.logh1, 0.9, -0.05, 0.05]
        x += [0.3 / K] * K
        x += list(self.logx.mean(axis=1) - self.logh1)
        if self.free_phi:
            x += [1.0] * K
        x += [0.0] * K + [0.0] * K
        return np.array(x)

    def loglik(self, x):
        out = self._run(x)
        if out is None:
            return None
        _, _, u, s_logh, s_z2 = out
        ll_r = -0.5 * (self.T * LOG_2PI + s_logh + s_z2)
        logdet = _logdet_second_moment(u)
        if logdet is None:
            return None
        ll_m = -0.5 * self.T * (self.K * LOG_2PI + logdet + self.K)
        return ll_r + ll_m, ll_r

    def profiled_sigma(self, x):
        u = self._run(x)[2]
        return (u @ u.T) / self.T

    def full(self, x):
        S = self.profiled_sigma(x)
        return np.concatenate([np.asarray(x, dtype=float), S[self._tril]])

    def _sigma_from(self, x_full):
        S = np.zeros((self.K, self.K))
        S[self._tril] = x_full[len(self.names):]
        return S + np.tril(S, -1).T

    def terms(self, x_full):
        out = self._run(x_full[: len(self.names)])
        if out is None:
            return None
        logh, z, u = out[:3]
        try:
            lm = measurement_loglik_terms(u, self._sigma_from(x_full))
        except np.linalg.LinAlgError:
            return None
        return -0.5 * (LOG_2PI + logh[:-1] + z * z) + lm

    def make_params(self, x_full):
        (w, b, t1, t2, g, xi, phi, d1, d2), _ = self._split(x_full[: len(self.names)])
        return RegarchParams(w, b, t1, t2, g.copy(), xi.copy(), d1.copy(), d2.copy(),
                             self._sigma_from(x_full), phi.copy())


def _logdet_second_moment(u):
    """``log det(u u' / T)``, or None when singular."""
    K, T = u.shape
    if K == 1:
        s = float(u[0] @ u[0]) / T
        return math.log(s) if s > 0 else None
    S = (u @ u.T) / T
    if K == 2:
        d = S[0, 0] * S[1, 1] - S[0, 1] ** 2
        return math.log(d) if d > 0 and S[0, 0] > 0 else None
    sign, logdet = np.linalg.slogdet(S)
    return logdet if sign > 0 and np.isfinite(logdet) else None


_SPECS = {"garch": _GarchSpec, "gjr": _GjrSpec, "egarch": _EgarchSpec, "regarch": _RegarchSpec}


def _as_dataset(data) -> AlignedDataset:
    if isinstance(data, DailyReturnSeries):
        return AlignedDataset(data)
    if isinstance(data, AlignedDataset):
        return data
    raise ValidationError("data must be an AlignedDataset or DailyReturnSeries")


def make_spec(model_kind: str, data, options: FitOptions | None = None) -> _Spec:
    if model_kind not in _SPECS:
        raise ValidationError(f"unknown model {model_kind!r}; choose from {MODEL_KINDS}")
    return _SPECS[model_kind](_as_dataset(data), options or FitOptions())


# --------------------------------------------------------------------------
# numerical derivatives


def _steps(x, rel=1e-5):
    return rel * np.maximum(1.0, np.abs(x))


def central_gradient(f, x, rel=1e-6):
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    hs = _steps(x, rel)
    for i, h in enumerate(hs):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def central_jacobian(f, x, rel=1e-5):
    """Jacobian of a vector-valued ``f`` by central differences, shape (m, p)."""
    x = np.asarray(x, dtype=float)
    hs = _steps(x, rel)
    cols = []
    for i, h in enumerate(hs):
        e = np.zeros_like(x)
        e[i] = h
        cols.append((f(x + e) - f(x - e)) / (2 * h))
    return np.column_stack(cols)


def central_hessian(f, x, rel=1e-4):
    x = np.asarray(x, dtype=float)
    p = x.size
    hs = _steps(x, rel)
    H = np.empty((p, p))
    f0 = f(x)
    for i in range(p):
        ei = np.zeros(p)
        ei[i] = hs[i]
        H[i, i] = (f(x + ei) - 2 * f0 + f(x - ei)) / hs[i] ** 2
        for j in range(i):
            ej = np.zeros(p)
            ej[j] = hs[j]
            H[i, j] = H[j, i] = (
                f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)
            ) / (4 * hs[i] * hs[j])
    return H


# --------------------------------------------------------------------------
# fitting


def _objective(spec: _Spec):
    T = spec.T

    def f(theta):
        if not np.all(np.abs(theta) < _THETA_BOUND):
            return _PENALTY
        try:
            ll = spec.loglik(spec.untransform(theta))
        except (FloatingPointError, OverflowError, ValueError, np.linalg.LinAlgError):
            return _PENALTY
        if ll is None or not math.isfinite(ll[0]):
            return _PENALTY
        return -ll[0] / T

    return f


def _starts(spec: _Spec, opts: FitOptions, f):
    base = spec.transform(spec.initial())
    rng = np.random.default_rng(opts.seed)
    out = []
    if opts.start is not None:
        warm = spec.transform(np.asarray(opts.start, dtype=float))
        if np.all(np.isfinite(warm)):
            out.append(np.clip(warm, -0.9 * _THETA_BOUND, 0.9 * _THETA_BOUND))
    out.append(base)
    for _ in range(max(opts.n_starts - 1, 0)):
        step = rng.normal(0.0, opts.perturb_scale, base.size)
        # halve infeasible perturbations back toward the base start
        for _ in range(8):
            if f(base + step) < _PENALTY:
                break
            step *= 0.5
        out.append(base + step)
    return out


def _optimize_from(f, theta0, opts: FitOptions):
    p = theta0.size
    nm = optimize.minimize(
        f, theta0, method="Nelder-Mead",
        options={
            "maxiter": opts.nm_maxiter or 200 * p,
            "xatol": 1e-2, "fatol": 1e-4, "adaptive": p > 4,
        },
    )
    grad = lambda th: central_gradient(f, th)
    qn = optimize.minimize(
        f, nm.x, jac=grad, method="BFGS",
        options={"gtol": opts.tol_grad * 0.1, "maxiter": opts.bfgs_maxiter},
    )
    best = qn if qn.fun <= nm.fun else nm
    g = grad(best.x)
    return best.x, float(best.fun), float(np.max(np.abs(g))), int(nm.nit + qn.nit)


def fit(model_kind: str, data, options: FitOptions | None = None, **overrides) -> FitResult:
    """Maximise the Gaussian quasi-likelihood of ``model_kind`` on ``data``.

    Parameters
    ----------
    model_kind : {"garch", "gjr", "egarch", "regarch"}
    data : AlignedDataset or DailyReturnSeries
        REGARCH uses every measure in the dataset.
    options : FitOptions, optional
        Keyword ``overrides`` replace individual option fields.

    Raises
    ------
    ConvergenceError
        No start produced a gradient-certified optimum. ``best`` carries the
        best uncertified :class:`FitResult`.
    """
    opts = replace(options or FitOptions(), **overrides)
    data = _as_dataset(data)
    if data.T < opts.min_obs:
        raise InsufficientDataError(f"need at least {opts.min_obs} observations, got {data.T}")
    spec = make_spec(model_kind, data, opts)
    f = _objective(spec)

    starts = _starts(spec, opts, f)
    start_obj = tuple(f(s) for s in starts)
    results = []
    for s in starts:
        results.append(_optimize_from(f, s, opts))
    trace = tuple(r[1] for r in results)
    # lowest objective wins, earliest start on ties
    best_i = min(range(len(results)), key=lambda i: (results[i][1], i))
    theta, fun, gnorm, nit = results[best_i]
    if gnorm >= opts.tol_grad:
        # one more polish from the incumbent before giving up
        theta2, fun2, gnorm2, nit2 = _optimize_from(f, theta, opts)
        if fun2 <= fun:
            theta, fun, gnorm, nit = theta2, fun2, gnorm2, nit + nit2

    x = spec.untransform(theta)
    joint, ret = spec.loglik(x)
    x_full = spec.full(x)
    n = spec.n_params()
    aic, sbic = information_criteria(joint, n, spec.T)
    converged = bool(gnorm < opts.tol_grad and math.isfinite(joint))
    result = FitResult(
        model=model_kind,
        params=spec.make_params(x_full),
        names=spec.full_names,
        estimates=x_full,
        std_errors=np.full(n, np.nan),
        loglik_joint=float(joint),
        loglik_return=float(ret),
        aic=aic,
        sbic=sbic,
        n_params=n,
        T=spec.T,
        converged=converged,
        n_iterations=nit,
        grad_norm=gnorm,
        free_phi=bool(getattr(spec, "free_phi", False)),
        objective_trace=trace,
        start_objectives=start_obj,
    )
    if not converged:
        raise ConvergenceError(
            f"{model_kind}: gradient norm {gnorm:.3g} above {opts.tol_grad:g} after all starts",
            best=result,
        )
    if opts.compute_se:
        try:
            result = replace(result, std_errors=robust_std_errors(result, data))
        except ConditioningError as exc:
            logger.warning("%s: standard errors unavailable (%s)", model_kind, exc)
    return result


# --------------------------------------------------------------------------
# inference


def _spec_for(fit_result: FitResult, data) -> _Spec:
    return make_spec(fit_result.model, data, FitOptions(free_phi=fit_result.free_phi))


def loglik_terms(fit_result: FitResult, data, x_full=None) -> np.ndarray:
    """Per-day log-likelihood contributions, Sigma explicit for REGARCH."""
    spec = _spec_for(fit_result, data)
    lt = spec.terms(fit_result.estimates if x_full is None else np.asarray(x_full, dtype=float))
    if lt is None:
        raise ValidationError("parameters produce a non-finite filter")
    return lt


def covariance_matrices(fit_result: FitResult, data) -> tuple[np.ndarray, np.ndarray]:
    """Sandwich and inverse-Hessian covariance of the natural parameters.

    The Hessian of the mean log-likelihood and the per-day scores are both
    taken by central finite differences at the estimate.
    """
    data = _as_dataset(data)
    spec = _spec_for(fit_result, data)
    x = np.asarray(fit_result.estimates, dtype=float)
    T = spec.T

    def terms(v):
        lt = spec.terms(v)
        if lt is None:
            raise ConditioningError("likelihood undefined next to the estimate")
        return lt

    scores = central_jacobian(terms, x)
    H = central_hessian(lambda v: float(np.mean(terms(v))), x)
    cond = float(np.linalg.cond(H))
    if not np.isfinite(cond) or cond > 1e14:
        raise ConditioningError(f"Hessian is singular (condition number {cond:.3g})", cond)
    Hinv = np.linalg.inv(H)
    S = scores.T @ scores / T
    sandwich = Hinv @ S @ Hinv / T
    return sandwich, -Hinv / T


def robust_std_errors(fit_result: FitResult, data) -> np.ndarray:
    """QML (sandwich) standard errors, one per entry of ``fit_result.names``."""
    sandwich, _ = covariance_matrices(fit_result, data)
    var = np.diag(sandwich)
    if not np.all(var > 0):
        raise ConditioningError("sandwich covariance has a nonpositive diagonal")
    return np.sqrt(var)


def hessian_std_errors(fit_result: FitResult, data) -> np.ndarray:
    """Standard errors from the inverse Hessian alone (correct specification)."""
    _, inv_h = covariance_matrices(fit_result, data)
    var = np.diag(inv_h)
    if not np.all(var > 0):
        raise ConditioningError("inverse Hessian has a nonpositive diagonal")
    return np.sqrt(var)
