"""Compiled variance recursions.

Each kernel fills caller-allocated output arrays and returns -1 on success or
the first index at which the state left the finite range.
"""
import math

import numpy as np
from numba import njit

SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)
LOGH_BOUND = 700.0


@njit(cache=True)
def gjr_core(omega, alpha, beta, tau, r, h1, h):
    """h has length T + 1; h[T] is the one-step-ahead variance."""
    T = r.shape[0]
    h[0] = h1
    for t in range(1, T + 1):
        e2 = r[t - 1] * r[t - 1]
        a = alpha + tau if r[t - 1] < 0.0 else alpha
        h[t] = omega + beta * h[t - 1] + a * e2
        if not (h[t] > 0.0 and h[t] < 1e300):
            return t
    return -1


@njit(cache=True)
def egarch_core(omega, beta, tau11, tau12, r, logh1, logh, z):
    """logh has length T + 1, z has length T."""
    T = r.shape[0]
    logh[0] = logh1
    for t in range(T):
        if not abs(logh[t]) < LOGH_BOUND:
            return t
        z[t] = r[t] * math.exp(-0.5 * logh[t])
        logh[t + 1] = (
            omega
            + beta * (logh[t] - omega)
            + tau11 * z[t]
            + tau12 * (abs(z[t]) - SQRT_2_OVER_PI)
        )
    if not abs(logh[T]) < LOGH_BOUND:
        return T
    return -1


@njit(cache=True)
def regarch_core(omega, beta, tau1, tau2, gamma, xi, phi, delta1, delta2, r, logx, logh1, logh, z, u):
    """Structural two-equation recursion.

    logx and u are K x T; logh has length T + 1. Returns ``(status,
    sum log h_t, sum z_t^2)`` over the T sample days.
    """
    K = logx.shape[0]
    T = r.shape[0]
    logh[0] = logh1
    s_logh = 0.0
    s_z2 = 0.0
    for t in range(T):
        lh = logh[t]
        if not abs(lh) < LOGH_BOUND:
            return t, s_logh, s_z2
        zt = r[t] * math.exp(-0.5 * lh)
        z[t] = zt
        s_logh += lh
        s_z2 += zt * zt
        q = zt * zt - 1.0
        nxt = omega + beta * (lh - omega) + tau1 * zt + tau2 * q
        for k in range(K):
            uk = logx[k, t] - xi[k] - phi[k] * lh - delta1[k] * zt - delta2[k] * q
            u[k, t] = uk
            nxt += gamma[k] * uk
        logh[t + 1] = nxt
    if not abs(logh[T]) < LOGH_BOUND:
        return T, s_logh, s_z2
    return -1, s_logh, s_z2


def warmup():
    """Trigger compilation of every kernel on tiny inputs."""
    r = np.array([0.1, -0.2])
    gjr_core(0.1, 0.1, 0.8, 0.0, r, 1.0, np.empty(3))
    egarch_core(0.0, 0.9, 0.0, 0.0, r, 0.0, np.empty(3), np.empty(2))
    one = np.ones(1)
    regarch_core(0.0, 0.9, 0.0, 0.0, one, one, one, one, one, r, np.zeros((1, 2)), 0.0,
                 np.empty(3), np.empty(2), np.empty((1, 2)))
