"""Glissadic overshoot detection for saccadic EOG records.

The pipeline: parse a record, estimate a rectified velocity profile,
segment it into per-saccade windows, fit a three-term gaussian sum to
each window, label windows by the spread of the fitted centers, and
train or evaluate classifiers on the resulting feature vectors.
"""
from .config import PipelineConfig, load_config
from .errors import (
    DegenerateProfile,
    EmptyInput,
    EmptyOnsets,
    GlissadeError,
    InvalidConfig,
    MalformedRow,
    Unconverged,
)
from .gaussfit import (
    FitOptions,
    FitResult,
    Gauss3Params,
    fit_gauss3,
    gauss3_eval,
    gauss3_gradient,
    initial_guess,
    rmse,
)
from .labeling import (
    Dataset,
    LabeledSample,
    bi_differences,
    build_dataset,
    build_sample,
    read_dataset,
    rule_classify,
    write_dataset,
)
from .ml import (
    CvReport,
    ModelSpec,
    accuracy,
    cross_validate,
    knn_k_sweep,
    load_model,
    predict,
    save_model,
    train,
)
from .preprocess import (
    VelocitySignal,
    lanczos11_derivative,
    median_filter,
    rectify,
    velocity_signal,
)
from .segmentation import (
    VelocityProfile,
    find_onset,
    find_onsets,
    find_peaks,
    segment,
    split_profiles,
)
from .signal_io import EogRecord, Study, load_record, parse_record, serialize_record
from .synth import GroundTruth, SaccadeTruth, SynthConfig, synth_corpus, synth_record

__version__ = "1.0.0"

__all__ = [
    "PipelineConfig", "load_config",
    "GlissadeError", "MalformedRow", "EmptyInput", "EmptyOnsets",
    "DegenerateProfile", "Unconverged", "InvalidConfig",
    "Gauss3Params", "FitOptions", "FitResult",
    "gauss3_eval", "gauss3_gradient", "rmse", "initial_guess", "fit_gauss3",
    "Dataset", "LabeledSample", "bi_differences", "rule_classify",
    "build_sample", "build_dataset", "read_dataset", "write_dataset",
    "ModelSpec", "CvReport", "train", "predict", "accuracy",
    "cross_validate", "knn_k_sweep", "save_model", "load_model",
    "VelocitySignal", "median_filter", "lanczos11_derivative", "rectify",
    "velocity_signal",
    "VelocityProfile", "find_peaks", "find_onset", "find_onsets",
    "split_profiles", "segment",
    "EogRecord", "Study", "parse_record", "serialize_record", "load_record",
    "SynthConfig", "SaccadeTruth", "GroundTruth", "synth_record",
    "synth_corpus",
    "__version__",
]
