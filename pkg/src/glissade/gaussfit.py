"""Gaussian-sum modeling of velocity profiles.

The model is the third partial sum of the Gauss series,

    y(x) = sum_{i=1..3} a_i * exp(-((x - b_i) / c_i)^2)

fitted per profile by damped least squares over the packed parameter
vector [a1, a2, a3, b1, b2, b3, c1, c2, c3]. The x coordinate is the
0-based sample index within the profile.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _gaussfit_core as _core
from .errors import (DegenerateProfile, EmptyInput, LengthMismatch,
                     NonFiniteResidual, TooFewPoints)


@dataclass
class Gauss3Params:
    """Amplitudes, centroid locations and widths of the three components.

    b and c are in sample index units; c must be positive.
    """

    a: tuple[float, float, float]
    b: tuple[float, float, float]
    c: tuple[float, float, float]

    def packed(self) -> np.ndarray:
        return np.array([*self.a, *self.b, *self.c], dtype=float)

    @classmethod
    def from_packed(cls, p) -> "Gauss3Params":
        p = np.asarray(p, dtype=float)
        return cls(a=tuple(p[0:3]), b=tuple(p[3:6]), c=tuple(p[6:9]))

    def validate(self):
        p = self.packed()
        if not np.all(np.isfinite(p)):
            raise ValueError("parameters must be finite")
        if any(ci <= 0 for ci in self.c):
            raise ValueError("widths must be positive")


@dataclass
class FitOptions:
    tol: float = 1e-8           # relative RMSE change per accepted step
    step_tol: float = 1e-10     # step norm
    max_iter: int = 200
    lambda0: float = 1e-3


@dataclass
class FitResult:
    params: Gauss3Params
    rmse: float
    iterations: int
    converged: bool
    initial_rmse: float


def _eval_packed(p: np.ndarray, x: np.ndarray) -> np.ndarray:
    u1 = (x - p[3]) / p[6]
    u2 = (x - p[4]) / p[7]
    u3 = (x - p[5]) / p[8]
    return (p[0] * np.exp(-u1 * u1) + p[1] * np.exp(-u2 * u2)
            + p[2] * np.exp(-u3 * u3))


def _jac_packed(p: np.ndarray, x: np.ndarray) -> np.ndarray:
    J = np.empty((x.size, 9))
    for i in range(3):
        a, b, c = p[i], p[3 + i], p[6 + i]
        u = (x - b) / c
        e = np.exp(-u * u)
        J[:, i] = e
        J[:, 3 + i] = a * e * 2.0 * u / c
        J[:, 6 + i] = a * e * 2.0 * u * u / c
    return J


def gauss3_eval(params: Gauss3Params, x):
    """Evaluate the model at x (scalar or array of sample indices)."""
    scalar = np.isscalar(x)
    y = _eval_packed(params.packed(), np.atleast_1d(np.asarray(x, dtype=float)))
    return float(y[0]) if scalar else y


def gauss3_gradient(params: Gauss3Params, x):
    """Partial derivatives of the model with respect to each parameter.

    Column order matches the packed layout [a1..a3, b1..b3, c1..c3]:

        dy/da_i = exp(-u^2)
        dy/db_i = a_i * exp(-u^2) * 2u / c_i
        dy/dc_i = a_i * exp(-u^2) * 2u^2 / c_i      u = (x - b_i) / c_i

    Returns a length-9 vector for scalar x, an (n, 9) matrix otherwise.
    """
    scalar = np.isscalar(x)
    J = _jac_packed(params.packed(), np.atleast_1d(np.asarray(x, dtype=float)))
    return J[0] if scalar else J


def rmse(observed, predicted) -> float:
    """Root mean squared error, sqrt(sum((y - yhat)^2) / n)."""
    observed = np.asarray(observed, dtype=float)
    predicted = np.asarray(predicted, dtype=float)
    if observed.shape != predicted.shape:
        raise LengthMismatch(
            f"length {observed.size} vs {predicted.size}")
    if observed.size == 0:
        raise EmptyInput("empty sequences")
    diff = observed - predicted
    return float(np.sqrt(diff @ diff / observed.size))


def _half_width(values: np.ndarray, peak: int) -> float:
    """Distance from the peak to the half-maximum crossing, in samples."""
    half = values[peak] / 2.0
    right = None
    for i in range(peak + 1, values.size):
        if values[i] < half:
            right = i - peak
            break
    if right is None:
        for i in range(peak - 1, -1, -1):
            if values[i] < half:
                right = peak - i
                break
    if right is None:
        return values.size / 6.0 * np.sqrt(np.log(2.0))  # cancels below
    return float(right)


def _secondary_max(values: np.ndarray, peak: int, floor: float) -> int | None:
    """Largest interior local maximum after the main peak, if any."""
    best = None
    for i in range(peak + 1, values.size - 1):
        if (values[i] >= floor and values[i] > values[i - 1]
                and values[i] >= values[i + 1]):
            if best is None or values[i] > values[best]:
                best = i
    return best


def initial_guess(profile) -> Gauss3Params:
    """Starting parameters for a profile fit.

    Component 1 sits on the main peak with a width taken from the
    half-maximum crossing. Component 2 goes on the secondary local
    maximum after the peak when one exists (at least 5% of the peak
    high); otherwise one width to the right of the peak, which keeps the
    guess inside the cluster for profiles without a second bump.
    Component 3 starts just left of the peak as a small shoulder term.

    Raises DegenerateProfile when the profile has no positive peak.
    """
    values = np.asarray(getattr(profile, "values", profile), dtype=float)
    if values.size == 0 or values.max() <= 0:
        raise DegenerateProfile("profile has no positive peak")
    n = values.size
    peak = int(np.argmax(values))
    a1 = float(values[peak])
    b1 = float(peak)
    c1 = max(_half_width(values, peak) / np.sqrt(np.log(2.0)), 1.0)

    sec = _secondary_max(values, peak, floor=0.05 * a1)
    if sec is not None:
        b2 = float(sec)
        a2 = float(values[sec])
    else:
        b2 = min(b1 + c1, n - 1.0)
        a2 = float(values[int(round(b2))])
    c2 = max(c1 / 2.0, 1.0)

    b3 = max(b1 - c1 / 2.0, 0.0)
    a3 = a1 / 4.0
    c3 = max(c1 / 2.0, 1.0)
    return Gauss3Params(a=(a1, a2, a3), b=(b1, b2, b3), c=(c1, c2, c3))


def fit_gauss3(profile, init: Gauss3Params,
               opts: FitOptions | None = None) -> FitResult:
    """Fit the gauss3 model to one velocity profile.

    Levenberg-Marquardt with lambda * diag(JtJ) damping: lambda starts at
    opts.lambda0, grows x10 on a rejected step and shrinks /10 on an
    accepted one. Only steps that reduce the sum of squared residuals are
    accepted. Two kinds of steps are rejected outright even when they
    reduce the residual: moving a centroid outside the profile's sample
    range (a component parked outside the window can only model
    background, which this signal does not have), and growing any
    amplitude beyond 1.5x the profile's peak magnitude (for sums of
    nonnegative components every a_i is bounded by the observed peak, so
    larger values only arise from pairs of huge canceling components, a
    degenerate direction that otherwise diverges). Widths are reflected
    to |c| after every step.

    Terminates when the relative RMSE change of an accepted step falls
    below opts.tol, when the proposed step norm falls below
    opts.step_tol, or after opts.max_iter iterations (converged=False).

    Raises TooFewPoints for profiles shorter than 9 samples and
    NonFiniteResidual when the initial evaluation is not finite.
    """
    opts = opts or FitOptions()
    y = np.asarray(getattr(profile, "values", profile), dtype=float)
    n = y.size
    if n < 9:
        raise TooFewPoints(f"need at least 9 samples, got {n}")
    x = np.arange(n, dtype=float)

    p0 = init.packed()
    p0[6:9] = np.abs(p0[6:9])
    r0 = y - _eval_packed(p0, x)
    if not np.all(np.isfinite(r0)):
        raise NonFiniteResidual("initial residuals are not finite")
    initial_rmse = float(np.sqrt((r0 @ r0) / n))

    try:
        p, it, converged, ok = _core.lm_core(
            x, y, p0, opts.tol, opts.step_tol, opts.max_iter, opts.lambda0)
        if not ok:
            raise NonFiniteResidual("initial residuals are not finite")
    except np.linalg.LinAlgError:
        # singular damped system: the python loop retries with a larger
        # damping factor instead of giving up
        p, it, converged = _lm_python(x, y, p0, opts)

    fitted = Gauss3Params.from_packed(p)
    final = rmse(y, _eval_packed(p, x))
    return FitResult(params=fitted, rmse=final, iterations=it,
                     converged=converged, initial_rmse=initial_rmse)


def _lm_python(x: np.ndarray, y: np.ndarray, p0: np.ndarray,
               opts: FitOptions) -> tuple[np.ndarray, int, bool]:
    """Reference implementation of the damped least-squares loop."""
    n = y.size
    x_lo, x_hi = 0.0, float(n - 1)
    a_cap = 1.5 * float(np.max(np.abs(y)))

    p = p0.copy()
    r = y - _eval_packed(p, x)
    S = float(r @ r)
    rmse_prev = float(np.sqrt(S / n))

    lam = opts.lambda0
    it = 0
    converged = False
    need_jac = True
    while it < opts.max_iter:
        it += 1
        if need_jac:
            J = _jac_packed(p, x)
            g = J.T @ r
            H = J.T @ J
            d = np.diag(H).copy()
            d[d < 1e-12] = 1e-12
            need_jac = False
        try:
            step = np.linalg.solve(H + lam * np.diag(d), g)
        except np.linalg.LinAlgError:
            lam = min(lam * 10.0, 1e12)
            continue
        if np.linalg.norm(step) < opts.step_tol:
            converged = True
            break
        p_try = p + step
        p_try[6:9] = np.abs(p_try[6:9])
        r_try = y - _eval_packed(p_try, x)
        S_try = float(r_try @ r_try)
        in_box = (np.all((p_try[3:6] >= x_lo) & (p_try[3:6] <= x_hi))
                  and np.all(np.abs(p_try[0:3]) <= a_cap))
        if np.isfinite(S_try) and S_try < S and in_box:
            p, r, S = p_try, r_try, S_try
            lam = max(lam / 10.0, 1e-12)
            need_jac = True
            rmse_now = float(np.sqrt(S / n))
            if abs(rmse_prev - rmse_now) < opts.tol * max(rmse_prev, 1e-300):
                converged = True
                break
            rmse_prev = rmse_now
        else:
            lam *= 10.0
            if lam > 1e12:
                break

    return p, it, converged
