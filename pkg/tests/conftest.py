"""Shared builders for the test suite."""
from glissade import (Dataset, LabeledSample, SynthConfig, fit_gauss3,
                      initial_guess, segment, synth_corpus, velocity_signal)


def corpus_dataset(seed, n_records, noise=0.0, delay=(60.0, 120.0),
                   ratio=(0.1, 0.3), probability=0.5, n_saccades=5):
    """Synthesize records, run the pipeline, label with generator truth.

    Returns (dataset, n_unconverged). Records where segmentation does
    not yield exactly one profile per injected saccade are skipped so
    truth entries always align with profiles.
    """
    config = SynthConfig(n_saccades=n_saccades,
                         glissade_probability=probability,
                         noise_std_deg=noise, glissade_delay_ms=delay,
                         glissade_amplitude_ratio=ratio, seed=seed)
    samples = []
    unconverged = 0
    for record, truth in synth_corpus(config, n_records):
        profiles = segment(velocity_signal(record))
        if len(profiles) != len(truth.entries):
            continue
        for profile, entry in zip(profiles, truth.entries):
            fit = fit_gauss3(profile, initial_guess(profile))
            if not fit.converged:
                unconverged += 1
                continue
            samples.append(LabeledSample(
                features=[fit.rmse, *fit.params.b],
                label=int(entry.glissade), provenance=""))
    return Dataset(samples), unconverged
