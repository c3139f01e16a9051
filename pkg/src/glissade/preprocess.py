"""Position denoising, Lanczos-11 differentiation, rectification.

The chain median_filter -> lanczos11_derivative -> rectify turns a raw
position channel into the nonnegative velocity signal that segmentation
works on.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.ndimage

from .errors import EmptyInput, EvenWindow, NonPositiveStep, TooShort

# Weights of the 11-point low-noise differentiator: the inner products
# k * (f[i+k] - f[i-k]) for k = 1..5, normalized by 110*h.
_LANCZOS_K = np.arange(-5, 6, dtype=float)  # correlation kernel, see below


@dataclass
class VelocitySignal:
    """Rectified derivative of a position channel."""

    values: np.ndarray
    sample_period_s: float
    source_offset: int = 0

    def __len__(self) -> int:
        return len(self.values)


def median_filter(samples, window: int):
    """Centered running median with edge replication.

    Parameters
    ----------
    samples:
        Position samples in degrees.
    window:
        Odd window length; (window-1)/2 copies of the first and last
        sample pad the ends, so output length equals input length.
    """
    if window < 1 or window % 2 == 0:
        raise EvenWindow(f"window must be odd and >= 1, got {window}")
    samples = np.asarray(samples, dtype=float)
    if samples.size == 0:
        raise EmptyInput("empty signal")
    if window == 1:
        return samples.copy()
    # mode='nearest' replicates the edge sample, matching explicit padding
    return scipy.ndimage.median_filter(samples, size=window, mode="nearest")


def lanczos11_derivative(samples, h: float):
    """Differentiate with the 11-point Lanczos low-noise operator.

    interior: f'[i] = sum_{k=1..5} k*(f[i+k] - f[i-k]) / (110*h)

    The five samples at each end are computed on the edge-replicated
    extension, so the output has the same length as the input. Exact on
    linear signals at interior points (the numerator telescopes to
    110*m*h for slope m).

    Parameters
    ----------
    samples:
        Signal in degrees.
    h:
        Sampling step in seconds, > 0.

    Returns
    -------
    ndarray of deg/s, same length as input.
    """
    if h <= 0:
        raise NonPositiveStep(f"h must be > 0, got {h}")
    samples = np.asarray(samples, dtype=float)
    if samples.size < 11:
        raise TooShort(f"need at least 11 samples, got {samples.size}")
    padded = np.concatenate([np.repeat(samples[0], 5), samples,
                             np.repeat(samples[-1], 5)])
    # correlate aligns k=-5..5 against the window around each sample
    return np.correlate(padded, _LANCZOS_K, mode="valid") / (110.0 * h)


def rectify(velocities):
    """Elementwise absolute value."""
    return np.abs(np.asarray(velocities, dtype=float))


def velocity_signal(record, median_window: int = 15,
                    step_override_s: float | None = None) -> VelocitySignal:
    """Run the full preprocessing chain on one record."""
    h = step_override_s if step_override_s is not None else record.sample_period_s
    filtered = median_filter(record.horizontal, median_window)
    vel = rectify(lanczos11_derivative(filtered, h))
    return VelocitySignal(values=vel, sample_period_s=h)
