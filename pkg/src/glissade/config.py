"""Pipeline configuration: defaults, config file parsing, validation.

The config file is flat ``key = value`` lines; ``#`` starts a comment.
Precedence everywhere is CLI flag, then config file, then the built-in
default. Range values are written as two comma separated numbers.
"""
from __future__ import annotations

from dataclasses import dataclass, fields

from .errors import InvalidConfig


@dataclass
class PipelineConfig:
    # preprocessing
    median_window: int = 15
    step_override_ms: float | None = None
    # segmentation
    min_peak_height: float = 30.0
    min_peak_distance: int = 40
    onset_fraction: float = 0.1
    onset_neighborhood: int = 5
    # fitting
    fit_tol: float = 1e-8
    fit_step_tol: float = 1e-10
    fit_max_iter: int = 200
    fit_lambda0: float = 1e-3
    # labeling
    bi_threshold: float = 10.0
    split_fraction: float = 0.5
    # models
    model: str = "forest"
    knn_k: int = 4
    cart_max_depth: int | None = None
    cart_min_leaf: int = 1
    trees: int = 100
    features_per_split: int = 2
    folds: int = 10
    repeats: int = 10
    # synthesis
    records: int = 10
    saccades: int = 5
    amplitude: float = 10.0
    sample_rate_hz: float = 200.0
    glissade_probability: float = 0.5
    glissade_delay_ms: tuple[float, float] = (60.0, 120.0)
    glissade_ratio: tuple[float, float] = (0.1, 0.3)
    noise_std_deg: float = 0.0
    # global
    seed: int = 0
    jobs: int = 1

    def validate(self):
        if self.median_window < 1 or self.median_window % 2 == 0:
            raise InvalidConfig("median_window must be odd and >= 1")
        if self.step_override_ms is not None and self.step_override_ms <= 0:
            raise InvalidConfig("step_override_ms must be positive")
        if self.min_peak_distance < 1:
            raise InvalidConfig("min_peak_distance must be >= 1")
        if not 0 < self.onset_fraction < 1:
            raise InvalidConfig("onset_fraction must be in (0,1)")
        if self.onset_neighborhood < 1:
            raise InvalidConfig("onset_neighborhood must be >= 1")
        if self.fit_max_iter < 1:
            raise InvalidConfig("fit_max_iter must be >= 1")
        if self.fit_tol <= 0 or self.fit_step_tol <= 0 or self.fit_lambda0 <= 0:
            raise InvalidConfig("fit tolerances must be positive")
        if self.bi_threshold <= 0:
            raise InvalidConfig("bi_threshold must be positive")
        if not 0 < self.split_fraction < 1:
            raise InvalidConfig("split_fraction must be in (0,1)")
        if self.model not in ("knn", "cart", "forest"):
            raise InvalidConfig(f"unknown model {self.model!r}")
        if self.knn_k < 1 or self.trees < 1 or self.cart_min_leaf < 1:
            raise InvalidConfig("model counts must be positive")
        if self.features_per_split < 1:
            raise InvalidConfig("features_per_split must be >= 1")
        if self.folds < 2:
            raise InvalidConfig("folds must be >= 2")
        if self.repeats < 1:
            raise InvalidConfig("repeats must be >= 1")
        if self.records < 1 or self.saccades < 1:
            raise InvalidConfig("records and saccades must be >= 1")
        if self.amplitude not in (10.0, 20.0, 30.0):
            raise InvalidConfig("amplitude must be 10, 20 or 30")
        if self.sample_rate_hz <= 0:
            raise InvalidConfig("sample_rate_hz must be positive")
        if not 0 <= self.glissade_probability <= 1:
            raise InvalidConfig("glissade_probability must be in [0,1]")
        for name in ("glissade_delay_ms", "glissade_ratio"):
            lo, hi = getattr(self, name)
            if not 0 < lo < hi:
                raise InvalidConfig(f"{name} must be a positive lo,hi range")
        if self.noise_std_deg < 0:
            raise InvalidConfig("noise_std_deg must be >= 0")
        if self.jobs < 1:
            raise InvalidConfig("jobs must be >= 1")
        return self


_OPTIONAL_INT = {"cart_max_depth"}
_OPTIONAL_FLOAT = {"step_override_ms"}
_RANGES = {"glissade_delay_ms", "glissade_ratio"}


def _parse_value(name: str, raw: str, kind: type):
    raw = raw.strip()
    if name in _RANGES:
        parts = raw.split(",")
        if len(parts) != 2:
            raise InvalidConfig(f"{name} needs two comma separated values")
        return (float(parts[0]), float(parts[1]))
    if name in _OPTIONAL_INT or name in _OPTIONAL_FLOAT:
        if raw.lower() in ("none", ""):
            return None
        return int(raw) if name in _OPTIONAL_INT else float(raw)
    if kind is bool:
        return raw.lower() in ("1", "true", "yes")
    try:
        return kind(raw)
    except ValueError:
        raise InvalidConfig(f"bad value for {name}: {raw!r}") from None


def load_config(path: str | None) -> PipelineConfig:
    """Config from a key=value file; missing path means pure defaults."""
    cfg = PipelineConfig()
    if path is None:
        return cfg.validate()
    by_name = {f.name: f for f in fields(PipelineConfig)}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InvalidConfig(f"{path}:{lineno}: expected key = value")
            key, _, raw = line.partition("=")
            key = key.strip()
            if key not in by_name:
                raise InvalidConfig(f"{path}:{lineno}: unknown key {key!r}")
            base = type(getattr(cfg, key)) if getattr(cfg, key) is not None else float
            setattr(cfg, key, _parse_value(key, raw, base))
    return cfg.validate()
