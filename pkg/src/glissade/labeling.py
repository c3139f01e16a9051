"""The centroid-difference rule and training dataset assembly.

A fitted profile with all three centroids clustered together is a plain
saccade; once any pairwise separation reaches the threshold, a second
movement is being modeled and the profile is labeled glissadic.
"""
from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .errors import (EmptyInput, LengthMismatch, MalformedRow,
                     NonPositiveThreshold, Unconverged)
from .gaussfit import FitResult, Gauss3Params

DEFAULT_BI_THRESHOLD = 10.0  # index units, 50 ms at 200 Hz

DATASET_HEADER = "rmse,b1,b2,b3,label"


@dataclass
class LabeledSample:
    features: list[float]       # [rmse, b1, b2, b3]
    label: int                  # 1 = glissade present, 0 = none
    provenance: str = ""


@dataclass
class Dataset:
    samples: list[LabeledSample] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.samples)

    def feature_matrix(self) -> np.ndarray:
        return np.array([s.features for s in self.samples], dtype=float)

    def labels(self) -> np.ndarray:
        return np.array([s.label for s in self.samples], dtype=int)


def bi_differences(params: Gauss3Params) -> tuple[float, float, float]:
    """Absolute pairwise differences (|b1-b2|, |b1-b3|, |b2-b3|)."""
    b1, b2, b3 = params.b
    return (abs(b1 - b2), abs(b1 - b3), abs(b2 - b3))


def rule_classify(params: Gauss3Params,
                  threshold: float = DEFAULT_BI_THRESHOLD) -> int:
    """0 when all three centroid differences stay below the threshold,
    1 otherwise."""
    if threshold <= 0:
        raise NonPositiveThreshold(f"threshold must be > 0, got {threshold}")
    return 0 if all(d < threshold for d in bi_differences(params)) else 1


def build_sample(fit: FitResult, threshold: float = DEFAULT_BI_THRESHOLD,
                 manual_label: int | None = None,
                 provenance: str = "") -> LabeledSample:
    """Feature vector [rmse, b1, b2, b3] plus a class label.

    The label comes from the rule unless a manual annotation overrides
    it. Raises Unconverged for fits that did not converge.
    """
    if not fit.converged:
        raise Unconverged(f"fit did not converge ({provenance or 'profile'})")
    label = manual_label if manual_label is not None \
        else rule_classify(fit.params, threshold)
    features = [fit.rmse, *fit.params.b]
    return LabeledSample(features=[float(v) for v in features],
                         label=int(label), provenance=provenance)


def build_dataset(fits: list[FitResult], labels: list[int],
                  split_fraction: float, seed: int = 0) -> tuple[Dataset, Dataset]:
    """Split labeled fits into train and holdout partitions.

    The split is a seeded shuffle cut at round(n * split_fraction);
    both partitions keep each sample's provenance (its input position).
    """
    if not 0 < split_fraction < 1:
        raise ValueError(f"split_fraction must be in (0,1), got {split_fraction}")
    if not fits:
        raise EmptyInput("no fits")
    if len(labels) != len(fits):
        raise LengthMismatch(f"{len(fits)} fits vs {len(labels)} labels")
    samples = [build_sample(f, manual_label=labels[i], provenance=str(i))
               for i, f in enumerate(fits)]
    order = np.random.default_rng(seed).permutation(len(samples))
    n_train = int(round(len(samples) * split_fraction))
    train = Dataset([samples[i] for i in order[:n_train]])
    holdout = Dataset([samples[i] for i in order[n_train:]])
    return train, holdout


def write_dataset(dataset: Dataset) -> str:
    buf = io.StringIO()
    buf.write(DATASET_HEADER + "\n")
    for s in dataset.samples:
        buf.write(",".join(repr(float(v)) for v in s.features))
        buf.write(f",{s.label}\n")
    return buf.getvalue()


def read_dataset(text: str) -> Dataset:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if lines and lines[0].strip() == DATASET_HEADER:
        lines = lines[1:]
    if not lines:
        raise EmptyInput("no dataset rows")
    samples = []
    for i, ln in enumerate(lines):
        parts = ln.split(",")
        if len(parts) != 5:
            raise MalformedRow(i, f"expected 5 fields, got {len(parts)}")
        try:
            feats = [float(v) for v in parts[:4]]
            label = int(parts[4])
        except ValueError as exc:
            raise MalformedRow(i, str(exc)) from None
        samples.append(LabeledSample(features=feats, label=label,
                                     provenance=str(i)))
    return Dataset(samples)


def read_annotations(text: str) -> dict[str, int]:
    """Manual labels, CSV rows of profile_id,label. Overrides the rule."""
    out: dict[str, int] = {}
    lines = [ln for ln in text.splitlines() if ln.strip()]
    for i, ln in enumerate(lines):
        parts = [p.strip() for p in ln.split(",")]
        if parts[0] == "profile_id":
            continue
        if len(parts) != 2:
            raise MalformedRow(i, f"expected 2 fields, got {len(parts)}")
        try:
            out[parts[0]] = int(parts[1])
        except ValueError as exc:
            raise MalformedRow(i, str(exc)) from None
    return out
