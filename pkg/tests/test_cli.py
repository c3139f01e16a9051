import os

import pytest

from glissade import Dataset, LabeledSample, write_dataset
from glissade.cli import main


def run(capsys, *argv):
    rc = main(list(argv))
    out, err = capsys.readouterr()
    return rc, out, err


def synth_small(capsys, tmp_path, records=6, seed="0"):
    rec_dir = tmp_path / "records"
    rc, out, _ = run(capsys, "synth", "--out", str(rec_dir),
                     "--records", str(records), "--saccades", "3",
                     "--seed", seed)
    assert rc == 0 and f"wrote {records} records" in out
    return rec_dir


def test_full_chain(capsys, tmp_path):
    rec_dir = synth_small(capsys, tmp_path)
    assert (rec_dir / "ground_truth.csv").exists()
    assert len(list(rec_dir.glob("record_*.csv"))) == 6

    vel_dir = tmp_path / "velocity"
    rc, out, _ = run(capsys, "preprocess", "--input", str(rec_dir),
                     "--out", str(vel_dir))
    assert rc == 0 and "preprocessed 6 record(s)" in out
    assert len(list(vel_dir.glob("*_velocity.csv"))) == 6

    prof_dir = tmp_path / "profiles"
    rc, out, _ = run(capsys, "segment", "--input", str(vel_dir),
                     "--out", str(prof_dir))
    assert rc == 0 and "segmented 18 profile(s)" in out

    fits_path = tmp_path / "fits.csv"
    rc, out, _ = run(capsys, "fit", "--input", str(prof_dir),
                     "--out", str(fits_path))
    assert rc == 0 and "fitted 18 profile(s)" in out
    header = fits_path.read_text().splitlines()[0]
    assert header.startswith("subject,test,profile,")

    data_path = tmp_path / "dataset.csv"
    rc, out, _ = run(capsys, "label", "--fits", str(fits_path),
                     "--out", str(data_path))
    assert rc == 0 and "labeled" in out
    n_samples = len(data_path.read_text().splitlines()) - 1
    assert n_samples <= 18

    model_path = tmp_path / "model.json"
    rc, out, _ = run(capsys, "train", "--data", str(data_path),
                     "--out", str(model_path), "--trees", "10")
    assert rc == 0 and model_path.exists()

    rc, out, _ = run(capsys, "evaluate", "--data", str(data_path),
                     "--folds", "3", "--repeats", "2", "--trees", "10")
    assert rc == 0
    assert "model: forest" in out and "mean: " in out
    scores_line = [ln for ln in out.splitlines()
                   if ln.startswith("fold_scores:")][0]
    assert len(scores_line.split(" ", 1)[1].split(",")) == 6

    pred_path = tmp_path / "pred.csv"
    rc, out, _ = run(capsys, "predict", "--model", str(model_path),
                     "--input", str(data_path), "--out", str(pred_path))
    assert rc == 0
    lines = pred_path.read_text().splitlines()
    assert lines[0] == "index,label"
    assert len(lines) - 1 == n_samples

    # fits files are accepted directly as prediction input
    rc, out, _ = run(capsys, "predict", "--model", str(model_path),
                     "--input", str(fits_path), "--out", str(pred_path))
    assert rc == 0
    assert len(pred_path.read_text().splitlines()) - 1 == 18


def test_preprocess_keeps_row_count(capsys, tmp_path):
    rec_dir = synth_small(capsys, tmp_path, records=1)
    vel_dir = tmp_path / "velocity"
    rc, _, _ = run(capsys, "preprocess", "--input", str(rec_dir),
                   "--out", str(vel_dir))
    assert rc == 0
    rec_rows = len((rec_dir / "record_0000.csv").read_text().splitlines()) - 1
    vel_rows = len((vel_dir / "record_0000_velocity.csv")
                   .read_text().splitlines()) - 1
    assert vel_rows == rec_rows


def test_missing_input_reports_path(capsys, tmp_path):
    missing = tmp_path / "nope"
    rc, _, err = run(capsys, "preprocess", "--input", str(missing),
                     "--out", str(tmp_path / "v"))
    assert rc == 1
    assert err.startswith("error:") and str(missing) in err


def test_constant_record_gives_zero_velocity(capsys, tmp_path):
    path = tmp_path / "flat.csv"
    rows = ["time_ms,horizontal_deg,stimulus_deg"]
    rows += [f"{5 * i},3.25,0.0" for i in range(60)]
    path.write_text("\n".join(rows) + "\n")
    vel_dir = tmp_path / "v"
    rc, _, _ = run(capsys, "preprocess", "--input", str(path),
                   "--out", str(vel_dir))
    assert rc == 0
    body = (vel_dir / "flat_velocity.csv").read_text().splitlines()[1:]
    assert len(body) == 60
    assert all(float(v) == 0.0 for v in body)


def test_train_rejects_single_class(capsys, tmp_path):
    data_path = tmp_path / "one_class.csv"
    samples = [LabeledSample(features=[1.0, 2.0, 3.0, 4.0], label=0,
                             provenance=f"p{i}") for i in range(8)]
    data_path.write_text(write_dataset(Dataset(samples)))
    rc, _, err = run(capsys, "train", "--data", str(data_path),
                     "--out", str(tmp_path / "m.json"))
    assert rc == 1 and "single class" in err


def test_export_fit_and_peaks(capsys, tmp_path):
    rec_dir = synth_small(capsys, tmp_path, records=1)

    vel_dir, prof_dir = tmp_path / "v", tmp_path / "p"
    run(capsys, "preprocess", "--input", str(rec_dir), "--out", str(vel_dir))
    run(capsys, "segment", "--input", str(vel_dir), "--out", str(prof_dir))

    fit_csv = tmp_path / "fit_plot.csv"
    rc, _, _ = run(capsys, "export-plot", "--kind", "fit",
                   "--input", str(prof_dir / "record_0000_profiles.csv"),
                   "--out", str(fit_csv), "--profile", "1")
    assert rc == 0
    assert fit_csv.read_text().splitlines()[0] == "x,observed,predicted"

    peaks_csv = tmp_path / "peaks.csv"
    rc, _, _ = run(capsys, "export-plot", "--kind", "peaks",
                   "--input", str(rec_dir / "record_0000.csv"),
                   "--out", str(peaks_csv))
    assert rc == 0
    lines = peaks_csv.read_text().splitlines()
    assert lines[0] == "peak_index,velocity_deg_s"
    assert len(lines) - 1 == 3  # one peak per injected saccade


def test_export_scores_rows(capsys, tmp_path):
    rec_dir = synth_small(capsys, tmp_path)
    vel_dir, prof_dir = tmp_path / "v", tmp_path / "p"
    run(capsys, "preprocess", "--input", str(rec_dir), "--out", str(vel_dir))
    run(capsys, "segment", "--input", str(vel_dir), "--out", str(prof_dir))
    run(capsys, "fit", "--input", str(prof_dir),
        "--out", str(tmp_path / "fits.csv"))
    run(capsys, "label", "--fits", str(tmp_path / "fits.csv"),
        "--out", str(tmp_path / "data.csv"))

    scores_csv = tmp_path / "scores.csv"
    rc, _, _ = run(capsys, "export-plot", "--kind", "scores",
                   "--input", str(tmp_path / "data.csv"),
                   "--out", str(scores_csv), "--models", "knn:1,cart",
                   "--folds", "3", "--repeats", "2")
    assert rc == 0
    lines = scores_csv.read_text().splitlines()
    assert lines[0] == "model,repeat,accuracy"
    assert len(lines) - 1 == 4  # 2 models x 2 repeats
    assert lines[1].startswith("knn:1,0,")

    rc, _, err = run(capsys, "export-plot", "--kind", "spiral",
                     "--input", str(tmp_path / "data.csv"),
                     "--out", str(tmp_path / "x.csv"))
    assert rc == 1 and "unknown export kind" in err


def test_evaluate_knn_sweep_output(capsys, tmp_path):
    rec_dir = synth_small(capsys, tmp_path)
    vel_dir, prof_dir = tmp_path / "v", tmp_path / "p"
    run(capsys, "preprocess", "--input", str(rec_dir), "--out", str(vel_dir))
    run(capsys, "segment", "--input", str(vel_dir), "--out", str(prof_dir))
    run(capsys, "fit", "--input", str(prof_dir),
        "--out", str(tmp_path / "fits.csv"))
    run(capsys, "label", "--fits", str(tmp_path / "fits.csv"),
        "--out", str(tmp_path / "data.csv"))

    rc, out, _ = run(capsys, "evaluate", "--data", str(tmp_path / "data.csv"),
                     "--knn-sweep", "1:6", "--folds", "3", "--repeats", "2")
    assert rc == 0
    lines = out.strip().splitlines()
    assert lines[0] == "k,mean,std"
    assert len(lines) - 1 == 6
    assert [int(ln.split(",")[0]) for ln in lines[1:]] == list(range(1, 7))


def test_config_file_with_flag_override(capsys, tmp_path):
    cfg = tmp_path / "pipeline.cfg"
    cfg.write_text("records = 2\nsaccades = 3\n# comment line\n")

    d1 = tmp_path / "d1"
    rc, out, _ = run(capsys, "synth", "--config", str(cfg), "--out", str(d1))
    assert rc == 0 and "wrote 2 records" in out
    assert len(list(d1.glob("record_*.csv"))) == 2

    d2 = tmp_path / "d2"
    rc, out, _ = run(capsys, "synth", "--config", str(cfg), "--out", str(d2),
                     "--records", "4")
    assert rc == 0 and "wrote 4 records" in out
    assert len(list(d2.glob("record_*.csv"))) == 4

    bad = tmp_path / "bad.cfg"
    bad.write_text("bogus_key = 1\n")
    rc, _, err = run(capsys, "synth", "--config", str(bad),
                     "--out", str(tmp_path / "d3"))
    assert rc == 1 and "error:" in err and "bogus_key" in err


def test_synth_is_byte_deterministic(capsys, tmp_path):
    d1 = synth_small(capsys, tmp_path / "a", records=2, seed="42")
    d2 = synth_small(capsys, tmp_path / "b", records=2, seed="42")
    for name in ("record_0000.csv", "record_0001.csv", "ground_truth.csv"):
        assert (d1 / name).read_bytes() == (d2 / name).read_bytes()
