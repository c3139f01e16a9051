"""Locating saccades in a velocity signal and cutting it into profiles.

find_peaks(): local maxima above a height floor with a minimum spacing.
find_onset(): backward search from a peak to the movement start.
find_onsets(): onset per peak, never crossing the previous peak.
split_profiles(): cut the signal at the onsets into VelocityProfile slices.
segment(): the whole chain with default tunables.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyOnsets
from .preprocess import VelocitySignal

DEFAULT_MIN_HEIGHT = 30.0      # deg/s, physiological floor for saccadic peaks
DEFAULT_MIN_DISTANCE = 40      # samples, 200 ms at 200 Hz
DEFAULT_ONSET_FRACTION = 0.1
DEFAULT_NEIGHBORHOOD = 5


@dataclass
class VelocityProfile:
    """One saccade's slice of the velocity signal, possibly with a glissade."""

    values: np.ndarray
    start_index: int            # position of values[0] in the parent signal
    peak_index: int             # parent coordinates
    sample_period_s: float

    def __len__(self) -> int:
        return len(self.values)

    @property
    def local_peak(self) -> int:
        return self.peak_index - self.start_index


def find_peaks(signal, min_height: float = DEFAULT_MIN_HEIGHT,
               min_distance: int = DEFAULT_MIN_DISTANCE) -> list[int]:
    """Detect saccadic peaks.

    A peak is an interior sample with signal[i] >= min_height that rises
    strictly from the left and does not rise to the right
    (signal[i] > signal[i-1] and signal[i] >= signal[i+1]). When two
    candidates are closer than min_distance the higher one survives,
    ties going to the lower index.

    Returns a sorted list of indices; empty when nothing qualifies.
    """
    if min_distance < 1:
        raise ValueError(f"min_distance must be >= 1, got {min_distance}")
    signal = np.asarray(signal, dtype=float)
    n = signal.size
    candidates = [i for i in range(1, n - 1)
                  if signal[i] >= min_height
                  and signal[i] > signal[i - 1]
                  and signal[i] >= signal[i + 1]]
    if not candidates:
        return []
    # greedy suppression, strongest first
    order = sorted(candidates, key=lambda i: (-signal[i], i))
    kept: list[int] = []
    for i in order:
        if all(abs(i - j) >= min_distance for j in kept):
            kept.append(i)
    return sorted(kept)


def find_onset(signal, peak_index: int,
               threshold_fraction: float = DEFAULT_ONSET_FRACTION,
               neighborhood: int = DEFAULT_NEIGHBORHOOD,
               lower_bound: int = 0) -> int:
    """Backward search for the start of the movement ending at a peak.

    Walks from the peak toward lower indices while the signal stays at or
    above threshold_fraction * peak value. The stopping position is the
    last index still at or above that threshold (or lower_bound when the
    walk exhausts the range). The onset is the index of the minimum value
    within `neighborhood` samples centered on the stopping position,
    clamped to [lower_bound, peak_index]; ties go to the lowest index.
    """
    signal = np.asarray(signal, dtype=float)
    if not 0 <= peak_index < signal.size:
        raise IndexError(f"peak_index {peak_index} out of range")
    threshold = threshold_fraction * signal[peak_index]
    stop = peak_index
    while stop > lower_bound and signal[stop - 1] >= threshold:
        stop -= 1
    half = neighborhood // 2
    lo = max(stop - half, lower_bound)
    hi = min(stop + half, peak_index)
    window = signal[lo:hi + 1]
    return lo + int(np.argmin(window))


def find_onsets(signal, peaks: list[int],
                threshold_fraction: float = DEFAULT_ONSET_FRACTION,
                neighborhood: int = DEFAULT_NEIGHBORHOOD) -> list[int]:
    """Onset for every peak; the search never crosses the previous peak."""
    onsets = []
    for j, p in enumerate(peaks):
        lb = peaks[j - 1] + 1 if j > 0 else 0
        onsets.append(find_onset(signal, p, threshold_fraction,
                                 neighborhood, lower_bound=lb))
    return onsets


def split_profiles(signal: VelocitySignal, onsets: list[int]) -> list[VelocityProfile]:
    """Cut the signal at the onsets.

    Profile k spans [onset_k, onset_{k+1}); the final profile runs to the
    end of the signal. Peaks are recomputed as the argmax of each span.

    Raises EmptyOnsets when the onset list is empty.
    """
    if not onsets:
        raise EmptyOnsets("need at least one onset")
    values = np.asarray(signal.values, dtype=float)
    n = values.size
    if list(onsets) != sorted(set(onsets)) or onsets[0] < 0 or onsets[-1] >= n:
        raise ValueError("onsets must be strictly increasing and within bounds")
    bounds = list(onsets) + [n]
    profiles = []
    for k in range(len(onsets)):
        lo, hi = bounds[k], bounds[k + 1]
        chunk = values[lo:hi].copy()
        profiles.append(VelocityProfile(
            values=chunk,
            start_index=lo,
            peak_index=lo + int(np.argmax(chunk)),
            sample_period_s=signal.sample_period_s,
        ))
    return profiles


def segment(signal: VelocitySignal,
            min_height: float = DEFAULT_MIN_HEIGHT,
            min_distance: int = DEFAULT_MIN_DISTANCE,
            threshold_fraction: float = DEFAULT_ONSET_FRACTION,
            neighborhood: int = DEFAULT_NEIGHBORHOOD) -> list[VelocityProfile]:
    """Peaks, onsets, then profile splitting; [] when no peaks found."""
    peaks = find_peaks(signal.values, min_height, min_distance)
    if not peaks:
        return []
    onsets = find_onsets(signal.values, peaks, threshold_fraction, neighborhood)
    return split_profiles(signal, onsets)
