"""Ground-truth EOG record generation.

Records are built kinematically: each saccade is a smooth erf step of
the position channel, so its derivative is exactly gaussian, and a
glissadic saccade appends a delayed, smaller, opposite-signed erf step
(the eye drifting back after overshooting). The stimulus channel is an
ideal square wave leading each saccade by a fixed latency.

Velocity shape constants: an erf step of amplitude A with time constant
tau has peak speed A / (tau * sqrt(pi)); tau = 1 / (30 * sqrt(pi)) s
gives the main-sequence-like default of 30 * A deg/s.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import erf

from .errors import InvalidConfig
from .signal_io import EogRecord

TAU_S = 1.0 / (30.0 * math.sqrt(math.pi))   # main saccade time constant
GLISSADE_TAU_S = 1.25 * TAU_S               # glissades are a bit slower
STIMULUS_LEAD_S = 0.150                     # stimulus precedes the movement
SACCADE_SPACING_S = 2.0     # long enough that adjacent movements never blur
FIRST_SACCADE_S = 0.5
TAIL_S = 0.5

TRUTH_HEADER = "record_id,saccade_idx,onset,peak,glissade,glissade_peak"


@dataclass(frozen=True)
class SynthConfig:
    n_saccades: int = 5
    amplitude_deg: float = 10.0
    sample_rate_hz: float = 200.0
    glissade_probability: float = 0.5
    glissade_delay_ms: tuple[float, float] = (60.0, 120.0)
    glissade_amplitude_ratio: tuple[float, float] = (0.1, 0.3)
    noise_std_deg: float = 0.0
    seed: object = 0    # int, or a sequence for derived streams

    def validate(self):
        if self.n_saccades < 1:
            raise InvalidConfig("n_saccades must be >= 1")
        if self.amplitude_deg not in (10.0, 20.0, 30.0):
            raise InvalidConfig("amplitude_deg must be 10, 20 or 30")
        if self.sample_rate_hz <= 0:
            raise InvalidConfig("sample_rate_hz must be positive")
        if not 0.0 <= self.glissade_probability <= 1.0:
            raise InvalidConfig("glissade_probability must be in [0,1]")
        for name, (lo, hi) in (("glissade_delay_ms", self.glissade_delay_ms),
                               ("glissade_amplitude_ratio",
                                self.glissade_amplitude_ratio)):
            if not (0 < lo < hi):
                raise InvalidConfig(f"{name} must be a positive range")
        if self.noise_std_deg < 0:
            raise InvalidConfig("noise_std_deg must be >= 0")


@dataclass
class SaccadeTruth:
    onset: int
    peak: int
    glissade: bool
    glissade_peak: int = -1     # -1 when no glissade


@dataclass
class GroundTruth:
    entries: list[SaccadeTruth]


def _erf_step(t, center_s: float, amplitude: float, tau_s: float):
    return amplitude * 0.5 * (1.0 + erf((t - center_s) / tau_s))


def synth_record(config: SynthConfig) -> tuple[EogRecord, GroundTruth]:
    """Generate one record and the truth of what was injected.

    Deterministic for a fixed config (the seed drives glissade flags,
    delays, amplitude ratios and the noise).
    """
    config.validate()
    rng = np.random.default_rng(config.seed)
    fs = config.sample_rate_hz
    dur = FIRST_SACCADE_S + (config.n_saccades - 1) * SACCADE_SPACING_S + TAIL_S
    n = int(round(dur * fs)) + 1
    t = np.arange(n) / fs

    position = np.zeros(n)
    stimulus = np.zeros(n)
    target = 0.0
    entries = []
    c_samples = TAU_S * fs
    for k in range(config.n_saccades):
        t0 = FIRST_SACCADE_S + k * SACCADE_SPACING_S
        direction = 1.0 if k % 2 == 0 else -1.0
        amp = direction * config.amplitude_deg
        position += _erf_step(t, t0, amp, TAU_S)
        target += amp
        stimulus[t >= t0 - STIMULUS_LEAD_S] = target

        glissade = bool(rng.random() < config.glissade_probability)
        delay_s = rng.uniform(*config.glissade_delay_ms) / 1000.0
        ratio = rng.uniform(*config.glissade_amplitude_ratio)
        peak_idx = int(round(t0 * fs))
        onset_idx = max(int(round(t0 * fs - 3.0 * c_samples)), 0)
        if glissade:
            # corrective displacement sized so the bump's peak speed is
            # ratio * the main peak speed
            delta = ratio * config.amplitude_deg * (GLISSADE_TAU_S / TAU_S)
            position += _erf_step(t, t0 + delay_s, -direction * delta,
                                  GLISSADE_TAU_S)
            g_peak = int(round((t0 + delay_s) * fs))
            entries.append(SaccadeTruth(onset_idx, peak_idx, True, g_peak))
        else:
            entries.append(SaccadeTruth(onset_idx, peak_idx, False))

    if config.noise_std_deg > 0:
        position = position + rng.normal(0.0, config.noise_std_deg, n)

    record = EogRecord(sample_period_s=1.0 / fs, time=t, horizontal=position,
                       stimulus=stimulus, stimulus_amplitude_deg=config.amplitude_deg)
    return record, GroundTruth(entries)


def synth_corpus(config: SynthConfig, n_records: int) -> list[tuple[EogRecord, GroundTruth]]:
    """Independent records, each from a seed derived as (seed, index)."""
    config.validate()
    if n_records < 1:
        raise InvalidConfig("n_records must be >= 1")
    out = []
    for k in range(n_records):
        rec_config = replace(config, seed=[_as_int_seed(config.seed), k])
        out.append(synth_record(rec_config))
    return out


def _as_int_seed(seed) -> int:
    if isinstance(seed, (list, tuple)):
        # fold derived seeds so corpora of corpora stay deterministic
        acc = 0
        for s in seed:
            acc = (acc * 1000003 + int(s)) % (2 ** 63)
        return acc
    return int(seed)


def write_ground_truth(truths: list[GroundTruth]) -> str:
    """Sidecar CSV; one row per saccade, -1 marks no glissade peak."""
    buf = io.StringIO()
    buf.write(TRUTH_HEADER + "\n")
    for rid, gt in enumerate(truths):
        for si, e in enumerate(gt.entries):
            buf.write(f"{rid},{si},{e.onset},{e.peak},{int(e.glissade)},"
                      f"{e.glissade_peak}\n")
    return buf.getvalue()


def read_ground_truth(text: str) -> list[GroundTruth]:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if lines and lines[0] == TRUTH_HEADER:
        lines = lines[1:]
    per_record: dict[int, list[SaccadeTruth]] = {}
    for ln in lines:
        rid, _si, onset, peak, flag, gpeak = ln.split(",")
        per_record.setdefault(int(rid), []).append(
            SaccadeTruth(int(onset), int(peak), bool(int(flag)), int(gpeak)))
    return [GroundTruth(per_record[r]) for r in sorted(per_record)]
