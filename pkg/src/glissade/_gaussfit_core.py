"""Compiled inner loop for the gaussian-sum fitter.

Mirrors the damping schedule, acceptance rule and box guards of the
pure-python loop in gaussfit.fit_gauss3 exactly; only the per-iteration
overhead differs. The solve can raise LinAlgError on a singular damped
normal matrix, in which case the caller falls back to the python loop
(which retries with a larger damping factor instead).
"""
from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def eval_packed(p, x):
    out = np.empty(x.size)
    for j in range(x.size):
        u1 = (x[j] - p[3]) / p[6]
        u2 = (x[j] - p[4]) / p[7]
        u3 = (x[j] - p[5]) / p[8]
        out[j] = (p[0] * np.exp(-u1 * u1) + p[1] * np.exp(-u2 * u2)
                  + p[2] * np.exp(-u3 * u3))
    return out


@njit(cache=True)
def jac_packed(p, x):
    J = np.empty((x.size, 9))
    for j in range(x.size):
        for i in range(3):
            a, b, c = p[i], p[3 + i], p[6 + i]
            u = (x[j] - b) / c
            e = np.exp(-u * u)
            J[j, i] = e
            J[j, 3 + i] = a * e * 2.0 * u / c
            J[j, 6 + i] = a * e * 2.0 * u * u / c
    return J


@njit(cache=True)
def lm_core(x, y, p0, tol, step_tol, max_iter, lambda0):
    """Run the damped least-squares loop.

    Returns (p, iterations, converged, ok) where ok is False when the
    initial residual is not finite (caller raises).
    """
    n = x.size
    p = p0.copy()
    for i in range(6, 9):
        p[i] = abs(p[i])
    x_lo, x_hi = 0.0, float(n - 1)
    a_cap = 1.5 * np.max(np.abs(y))

    r = y - eval_packed(p, x)
    S = 0.0
    for j in range(n):
        S += r[j] * r[j]
    if not np.isfinite(S):
        return p, 0, False, False
    rmse_prev = np.sqrt(S / n)

    lam = lambda0
    it = 0
    converged = False
    need_jac = True
    J = np.empty((n, 9))
    g = np.empty(9)
    H = np.empty((9, 9))
    d = np.empty(9)
    while it < max_iter:
        it += 1
        if need_jac:
            J = jac_packed(p, x)
            g = J.T @ r
            H = J.T @ J
            for i in range(9):
                d[i] = H[i, i] if H[i, i] >= 1e-12 else 1e-12
            need_jac = False
        A = H.copy()
        for i in range(9):
            A[i, i] += lam * d[i]
        step = np.linalg.solve(A, g)
        if np.linalg.norm(step) < step_tol:
            converged = True
            break
        p_try = p + step
        for i in range(6, 9):
            p_try[i] = abs(p_try[i])
        r_try = y - eval_packed(p_try, x)
        S_try = 0.0
        for j in range(n):
            S_try += r_try[j] * r_try[j]
        in_box = True
        for i in range(3, 6):
            if not (x_lo <= p_try[i] <= x_hi):
                in_box = False
        for i in range(3):
            if abs(p_try[i]) > a_cap:
                in_box = False
        if np.isfinite(S_try) and S_try < S and in_box:
            p, r, S = p_try, r_try, S_try
            lam = max(lam / 10.0, 1e-12)
            need_jac = True
            rmse_now = np.sqrt(S / n)
            if abs(rmse_prev - rmse_now) < tol * max(rmse_prev, 1e-300):
                converged = True
                break
            rmse_prev = rmse_now
        else:
            lam *= 10.0
            if lam > 1e12:
                break
    return p, it, converged, True
