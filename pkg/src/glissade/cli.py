"""Command line surface for the glissade pipeline.

Commands mirror the pipeline stages: synth, preprocess, segment, fit,
label, train, evaluate, predict, export-plot. Every command reads the
previous stage's file format and writes its own; identical inputs,
flags and seeds give bit-identical outputs.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import gaussfit, labeling, ml, preprocess, segmentation, signal_io, synth
from .config import PipelineConfig, load_config
from .errors import GlissadeError, UnknownKind
from .gaussfit import FitOptions

FITS_HEADER = ("subject,test,profile,a1,a2,a3,b1,b2,b3,c1,c2,c3,"
               "rmse,iterations,converged")


def _fmt(v) -> str:
    return repr(float(v))


def _resolve(args, cfg: PipelineConfig, name: str):
    """CLI flag wins over config file value."""
    val = getattr(args, name, None)
    return getattr(cfg, name) if val is None else val


def _input_files(path: str, suffix: str = ".csv") -> list[str]:
    if os.path.isdir(path):
        names = sorted(os.listdir(path))
        return [os.path.join(path, n) for n in names
                if n.endswith(suffix) and n != "ground_truth.csv"]
    if not os.path.exists(path):
        raise GlissadeError(f"no such file: {path}")
    return [path]


def _stem(path: str, strip: str = "") -> str:
    base = os.path.splitext(os.path.basename(path))[0]
    if strip and base.endswith(strip):
        base = base[:-len(strip)]
    return base


# --- stage file formats ---

def _write_velocity(path: str, values):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("velocity_deg_s\n")
        for v in values:
            fh.write(_fmt(v) + "\n")


def _read_velocity(path: str) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if lines and lines[0] == "velocity_deg_s":
        lines = lines[1:]
    return np.array([float(v) for v in lines])


def _write_profiles(path: str, profiles):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("profile,sample_index,velocity_deg_s\n")
        for k, pr in enumerate(profiles):
            for j, v in enumerate(pr.values):
                fh.write(f"{k},{pr.start_index + j},{_fmt(v)}\n")


def _read_profiles(path: str, sample_period_s: float = 0.005):
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for ln in fh:
            ln = ln.strip()
            if not ln or ln.startswith("profile,"):
                continue
            k, idx, v = ln.split(",")
            rows.append((int(k), int(idx), float(v)))
    profiles = []
    for k in sorted({r[0] for r in rows}):
        chunk = [(idx, v) for kk, idx, v in rows if kk == k]
        values = np.array([v for _, v in chunk])
        start = chunk[0][0]
        profiles.append(segmentation.VelocityProfile(
            values=values, start_index=start,
            peak_index=start + int(np.argmax(values)),
            sample_period_s=sample_period_s))
    return profiles


def _fit_row(subject, test, k, fr) -> str:
    p = fr.params
    cells = [subject, test, str(k)]
    cells += [_fmt(v) for v in (*p.a, *p.b, *p.c)]
    cells += [_fmt(fr.rmse), str(fr.iterations), str(int(fr.converged))]
    return ",".join(cells)


def _write_fits_csv(path: str, rows: list[str]):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(FITS_HEADER + "\n")
        for r in rows:
            fh.write(r + "\n")


def _write_fits_json(path: str, fits):
    docs = []
    for subject, test, k, fr in fits:
        docs.append({"subject": subject, "test": test, "profile": k,
                     "a": list(fr.params.a), "b": list(fr.params.b),
                     "c": list(fr.params.c), "rmse": fr.rmse,
                     "iterations": fr.iterations,
                     "converged": bool(fr.converged)})
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"format": "glissade-fits", "version": 1, "fits": docs}, fh)
        fh.write("\n")


def _read_fits_csv(path: str):
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for ln in fh:
            ln = ln.strip()
            if not ln or ln.startswith("subject,"):
                continue
            cells = ln.split(",")
            subject, test, k = cells[0], cells[1], int(cells[2])
            nums = [float(v) for v in cells[3:12]]
            params = gaussfit.Gauss3Params(a=tuple(nums[0:3]),
                                           b=tuple(nums[3:6]),
                                           c=tuple(nums[6:9]))
            fr = gaussfit.FitResult(params=params, rmse=float(cells[12]),
                                    iterations=int(cells[13]),
                                    converged=bool(int(cells[14])),
                                    initial_rmse=float("nan"))
            out.append((subject, test, k, fr))
    return out


# --- commands ---

def cmd_synth(args, cfg: PipelineConfig) -> int:
    os.makedirs(args.out, exist_ok=True)
    sc = synth.SynthConfig(
        n_saccades=int(_resolve(args, cfg, "saccades")),
        amplitude_deg=float(_resolve(args, cfg, "amplitude")),
        sample_rate_hz=float(_resolve(args, cfg, "sample_rate_hz")),
        glissade_probability=float(_resolve(args, cfg, "glissade_probability")),
        glissade_delay_ms=_resolve(args, cfg, "glissade_delay_ms"),
        glissade_amplitude_ratio=_resolve(args, cfg, "glissade_ratio"),
        noise_std_deg=float(_resolve(args, cfg, "noise_std_deg")),
        seed=int(_resolve(args, cfg, "seed")))
    n_records = int(_resolve(args, cfg, "records"))
    corpus = synth.synth_corpus(sc, n_records)
    truths = []
    for k, (rec, gt) in enumerate(corpus):
        out = os.path.join(args.out, f"record_{k:04d}.csv")
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(signal_io.serialize_record(rec))
        truths.append(gt)
    with open(os.path.join(args.out, "ground_truth.csv"), "w",
              encoding="utf-8") as fh:
        fh.write(synth.write_ground_truth(truths))
    n_sacc = sum(len(t.entries) for t in truths)
    print(f"wrote {n_records} records ({n_sacc} saccades) to {args.out}")
    return 0


def cmd_preprocess(args, cfg: PipelineConfig) -> int:
    os.makedirs(args.out, exist_ok=True)
    window = int(_resolve(args, cfg, "median_window"))
    override_ms = _resolve(args, cfg, "step_override_ms")
    override_s = None if override_ms is None else float(override_ms) / 1000.0
    n = 0
    for path in _input_files(args.input):
        record = signal_io.load_record(path)
        vs = preprocess.velocity_signal(record, window, override_s)
        out = os.path.join(args.out, _stem(path) + "_velocity.csv")
        _write_velocity(out, vs.values)
        n += 1
    print(f"preprocessed {n} record(s) into {args.out}")
    return 0


def cmd_segment(args, cfg: PipelineConfig) -> int:
    os.makedirs(args.out, exist_ok=True)
    height = float(_resolve(args, cfg, "min_peak_height"))
    distance = int(_resolve(args, cfg, "min_peak_distance"))
    fraction = float(_resolve(args, cfg, "onset_fraction"))
    hood = int(_resolve(args, cfg, "onset_neighborhood"))
    n_profiles = 0
    for path in _input_files(args.input):
        values = _read_velocity(path)
        vs = preprocess.VelocitySignal(values=values, sample_period_s=0.005)
        profiles = segmentation.segment(vs, height, distance, fraction, hood)
        out = os.path.join(args.out, _stem(path, "_velocity") + "_profiles.csv")
        _write_profiles(out, profiles)
        n_profiles += len(profiles)
    print(f"segmented {n_profiles} profile(s) into {args.out}")
    return 0


def cmd_fit(args, cfg: PipelineConfig) -> int:
    opts = FitOptions(tol=float(_resolve(args, cfg, "fit_tol")),
                      step_tol=float(_resolve(args, cfg, "fit_step_tol")),
                      max_iter=int(_resolve(args, cfg, "fit_max_iter")),
                      lambda0=float(_resolve(args, cfg, "fit_lambda0")))
    all_fits = []
    for path in _input_files(args.input):
        test = _stem(path, "_profiles")
        for k, pr in enumerate(_read_profiles(path)):
            init = gaussfit.initial_guess(pr)
            fr = gaussfit.fit_gauss3(pr, init, opts)
            all_fits.append((args.subject, test, k, fr))
    fmt = args.format or ("json" if args.out.endswith(".json") else "csv")
    if fmt == "json":
        _write_fits_json(args.out, all_fits)
    else:
        _write_fits_csv(args.out, [_fit_row(s, t, k, f)
                                   for s, t, k, f in all_fits])
    n_conv = sum(1 for *_x, f in all_fits if f.converged)
    print(f"fitted {len(all_fits)} profile(s), {n_conv} converged -> {args.out}")
    return 0


def cmd_label(args, cfg: PipelineConfig) -> int:
    threshold = float(_resolve(args, cfg, "bi_threshold"))
    annotations = {}
    if args.annotations:
        with open(args.annotations, "r", encoding="utf-8") as fh:
            annotations = labeling.read_annotations(fh.read())
    fits = _read_fits_csv(args.fits)
    samples = []
    skipped = 0
    for subject, test, k, fr in fits:
        pid = f"{test}:{k}"
        if not fr.converged:
            skipped += 1
            continue
        samples.append(labeling.build_sample(
            fr, threshold, manual_label=annotations.get(pid),
            provenance=pid))
    if skipped:
        print(f"skipped {skipped} unconverged fit(s)", file=sys.stderr)
    dataset = labeling.Dataset(samples)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(labeling.write_dataset(dataset))
    n1 = sum(s.label for s in samples)
    print(f"labeled {len(samples)} profile(s) ({n1} glissadic) -> {args.out}")
    return 0


def _model_spec(args, cfg: PipelineConfig) -> ml.ModelSpec:
    return ml.ModelSpec(
        kind=_resolve(args, cfg, "model"),
        knn_k=int(_resolve(args, cfg, "knn_k")),
        cart_max_depth=_resolve(args, cfg, "cart_max_depth"),
        cart_min_leaf=int(_resolve(args, cfg, "cart_min_leaf")),
        forest_trees=int(_resolve(args, cfg, "trees")),
        forest_features_per_split=int(_resolve(args, cfg, "features_per_split")),
        seed=int(_resolve(args, cfg, "seed")))


def _load_dataset(path: str) -> labeling.Dataset:
    with open(path, "r", encoding="utf-8") as fh:
        return labeling.read_dataset(fh.read())


def cmd_train(args, cfg: PipelineConfig) -> int:
    spec = _model_spec(args, cfg)
    model = ml.train(spec, _load_dataset(args.data))
    ml.save_model(model, args.out)
    print(f"trained {spec.kind} model -> {args.out}")
    return 0


def cmd_evaluate(args, cfg: PipelineConfig) -> int:
    data = _load_dataset(args.data)
    folds = int(_resolve(args, cfg, "folds"))
    repeats = int(_resolve(args, cfg, "repeats"))
    seed = int(_resolve(args, cfg, "seed"))
    if args.knn_sweep:
        lo, _, hi = args.knn_sweep.partition(":")
        reports = ml.knn_k_sweep(data, range(int(lo), int(hi) + 1),
                                 folds, repeats, seed)
        print("k,mean,std")
        for k, rep in reports.items():
            print(f"{k},{_fmt(rep.mean)},{_fmt(rep.std)}")
        return 0
    spec = _model_spec(args, cfg)
    report = ml.cross_validate(spec, data, folds, repeats, seed)
    print(f"model: {spec.kind}")
    print(f"folds: {report.folds}  repeats: {report.repeats}")
    print(f"mean: {_fmt(report.mean)}")
    print(f"std: {_fmt(report.std)}")
    print("fold_scores: " + ",".join(_fmt(s) for s in report.fold_scores))
    return 0


def cmd_predict(args, cfg: PipelineConfig) -> int:
    model = ml.load_model(args.model)
    with open(args.input, "r", encoding="utf-8") as fh:
        first = fh.readline().strip()
    if first.startswith("subject,"):
        fits = _read_fits_csv(args.input)
        feats = [[fr.rmse, *fr.params.b] for *_x, fr in fits]
    else:
        data = _load_dataset(args.input)
        feats = [s.features for s in data.samples]
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write("index,label\n")
        for i, f in enumerate(feats):
            fh.write(f"{i},{ml.predict(model, f)}\n")
    print(f"predicted {len(feats)} label(s) -> {args.out}")
    return 0


def cmd_export_plot(args, cfg: PipelineConfig) -> int:
    kind = args.kind
    if kind not in ("velocity", "peaks", "onsets", "fit", "scores"):
        raise UnknownKind(f"unknown export kind {kind!r}")
    if kind in ("velocity", "peaks", "onsets"):
        record = signal_io.load_record(args.input)
        window = int(_resolve(args, cfg, "median_window"))
        vs = preprocess.velocity_signal(record, window)
        with open(args.out, "w", encoding="utf-8") as fh:
            if kind == "velocity":
                fh.write("x,velocity_deg_s\n")
                for i, v in enumerate(vs.values):
                    fh.write(f"{i},{_fmt(v)}\n")
            else:
                height = float(_resolve(args, cfg, "min_peak_height"))
                distance = int(_resolve(args, cfg, "min_peak_distance"))
                peaks = segmentation.find_peaks(vs.values, height, distance)
                if kind == "peaks":
                    fh.write("peak_index,velocity_deg_s\n")
                    for p in peaks:
                        fh.write(f"{p},{_fmt(vs.values[p])}\n")
                else:
                    fraction = float(_resolve(args, cfg, "onset_fraction"))
                    hood = int(_resolve(args, cfg, "onset_neighborhood"))
                    onsets = segmentation.find_onsets(vs.values, peaks,
                                                      fraction, hood)
                    fh.write("onset_index,velocity_deg_s\n")
                    for o in onsets:
                        fh.write(f"{o},{_fmt(vs.values[o])}\n")
    elif kind == "fit":
        profiles = _read_profiles(args.input)
        if not 0 <= args.profile < len(profiles):
            raise GlissadeError(f"profile {args.profile} out of range "
                                f"(file has {len(profiles)})")
        pr = profiles[args.profile]
        fr = gaussfit.fit_gauss3(pr, gaussfit.initial_guess(pr))
        x = np.arange(len(pr.values), dtype=float)
        predicted = gaussfit.gauss3_eval(fr.params, x)
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write("x,observed,predicted\n")
            for i in range(len(x)):
                fh.write(f"{i},{_fmt(pr.values[i])},{_fmt(predicted[i])}\n")
    else:  # scores
        data = _load_dataset(args.input)
        folds = int(_resolve(args, cfg, "folds"))
        repeats = int(_resolve(args, cfg, "repeats"))
        seed = int(_resolve(args, cfg, "seed"))
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write("model,repeat,accuracy\n")
            for token in args.models.split(","):
                name, _, kparam = token.partition(":")
                spec = ml.ModelSpec(kind=name, seed=seed)
                if kparam:
                    spec.knn_k = int(kparam)
                report = ml.cross_validate(spec, data, folds, repeats, seed)
                per_repeat = np.array(report.fold_scores).reshape(repeats, folds)
                for r, row in enumerate(per_repeat):
                    fh.write(f"{token},{r},{_fmt(row.mean())}\n")
    print(f"exported {kind} data -> {args.out}")
    return 0


# --- parser ---

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value config file")
    common.add_argument("--seed", type=int, help="global random seed")
    common.add_argument("--jobs", type=int, help="worker count (stages are "
                        "deterministic regardless)")
    ap = argparse.ArgumentParser(
        prog="glissade", parents=[common],
        description="Detect glissadic overshoot in saccadic EOG records.")
    sub = ap.add_subparsers(dest="command", required=True)

    def add_parser(name, **kw):
        return sub.add_parser(name, parents=[common], **kw)

    p = add_parser("synth", help="generate a ground-truth corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--records", type=int)
    p.add_argument("--saccades", type=int)
    p.add_argument("--amplitude", type=float)
    p.add_argument("--sample-rate-hz", dest="sample_rate_hz", type=float)
    p.add_argument("--glissade-probability", dest="glissade_probability",
                   type=float)
    p.add_argument("--glissade-delay-ms", dest="glissade_delay_ms",
                   type=_range_arg)
    p.add_argument("--glissade-ratio", dest="glissade_ratio", type=_range_arg)
    p.add_argument("--noise-std", dest="noise_std_deg", type=float)
    p.set_defaults(func=cmd_synth)

    p = add_parser("preprocess", help="filter, differentiate, rectify")
    p.add_argument("--input", required=True, help="record CSV or directory")
    p.add_argument("--out", required=True)
    p.add_argument("--median-window", dest="median_window", type=int)
    p.add_argument("--step-override-ms", dest="step_override_ms", type=float)
    p.set_defaults(func=cmd_preprocess)

    p = add_parser("segment", help="find peaks and split into profiles")
    p.add_argument("--input", required=True, help="velocity CSV or directory")
    p.add_argument("--out", required=True)
    p.add_argument("--min-peak-height", dest="min_peak_height", type=float)
    p.add_argument("--min-peak-distance", dest="min_peak_distance", type=int)
    p.add_argument("--onset-fraction", dest="onset_fraction", type=float)
    p.add_argument("--onset-neighborhood", dest="onset_neighborhood", type=int)
    p.set_defaults(func=cmd_segment)

    p = add_parser("fit", help="fit the gaussian-sum model per profile")
    p.add_argument("--input", required=True, help="profiles CSV or directory")
    p.add_argument("--out", required=True, help="fits CSV or JSON path")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--subject", default="")
    p.add_argument("--fit-tol", dest="fit_tol", type=float)
    p.add_argument("--fit-max-iter", dest="fit_max_iter", type=int)
    p.set_defaults(func=cmd_fit)

    p = add_parser("label", help="apply the centroid rule, build dataset")
    p.add_argument("--fits", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--bi-threshold", dest="bi_threshold", type=float)
    p.add_argument("--annotations", help="profile_id,label CSV overriding "
                   "the rule")
    p.set_defaults(func=cmd_label)

    p = add_parser("train", help="train a classifier on a dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    _model_flags(p)
    p.set_defaults(func=cmd_train)

    p = add_parser("evaluate", help="repeated k-fold cross-validation")
    p.add_argument("--data", required=True)
    _model_flags(p)
    p.add_argument("--folds", type=int)
    p.add_argument("--repeats", type=int)
    p.add_argument("--knn-sweep", dest="knn_sweep", metavar="LO:HI",
                   help="report a k sweep instead of one model")
    p.set_defaults(func=cmd_evaluate)

    p = add_parser("predict", help="label new profiles with a model")
    p.add_argument("--model", required=True, help="model JSON path")
    p.add_argument("--input", required=True, help="dataset or fits CSV")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = add_parser("export-plot", help="emit plot-ready columnar data")
    p.add_argument("--kind", required=True,
                   help="velocity | peaks | onsets | fit | scores")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--profile", type=int, default=0,
                   help="profile index for --kind fit")
    p.add_argument("--models", default="knn:1,knn:4,cart,forest",
                   help="comma list for --kind scores")
    p.add_argument("--median-window", dest="median_window", type=int)
    p.add_argument("--min-peak-height", dest="min_peak_height", type=float)
    p.add_argument("--min-peak-distance", dest="min_peak_distance", type=int)
    p.add_argument("--onset-fraction", dest="onset_fraction", type=float)
    p.add_argument("--onset-neighborhood", dest="onset_neighborhood", type=int)
    p.add_argument("--folds", type=int)
    p.add_argument("--repeats", type=int)
    p.set_defaults(func=cmd_export_plot)
    return ap


def _range_arg(raw: str) -> tuple[float, float]:
    lo, _, hi = raw.partition(",")
    return (float(lo), float(hi))


def _model_flags(p):
    p.add_argument("--model", choices=("knn", "cart", "forest"))
    p.add_argument("--knn-k", dest="knn_k", type=int)
    p.add_argument("--trees", type=int)
    p.add_argument("--features-per-split", dest="features_per_split", type=int)
    p.add_argument("--cart-max-depth", dest="cart_max_depth", type=int)
    p.add_argument("--cart-min-leaf", dest="cart_min_leaf", type=int)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg.seed = args.seed
        if args.jobs is not None:
            cfg.jobs = args.jobs
        cfg.validate()
        return args.func(args, cfg)
    except (GlissadeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
