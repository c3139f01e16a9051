import numpy as np
import pytest

from glissade import (Dataset, Gauss3Params, bi_differences, build_dataset,
                      build_sample, read_dataset, rule_classify, write_dataset)
from glissade.errors import (EmptyInput, LengthMismatch, MalformedRow,
                             NonPositiveThreshold, Unconverged)
from glissade.gaussfit import FitResult
from glissade.labeling import read_annotations


def make_fit(rmse=1.0, b=(5.0, 6.0, 7.0), converged=True):
    return FitResult(params=Gauss3Params(a=(10, 10, 10), b=b, c=(2, 2, 2)),
                     rmse=rmse, iterations=3, converged=converged,
                     initial_rmse=rmse * 2)


def test_bi_differences_reference_values():
    params = Gauss3Params(a=(1, 1, 1), b=(48.9, 24.8, 52.8), c=(1, 1, 1))
    d12, d13, d23 = bi_differences(params)
    assert d12 == pytest.approx(24.1)
    assert d13 == pytest.approx(3.9)
    assert d23 == pytest.approx(28.0)


def test_bi_differences_identical_centers():
    params = Gauss3Params(a=(1, 1, 1), b=(7.7, 7.7, 7.7), c=(1, 1, 1))
    assert bi_differences(params) == (0.0, 0.0, 0.0)


def test_bi_differences_permutation_invariant():
    rng = np.random.default_rng(40)
    for _ in range(100):
        b = rng.uniform(-50, 50, 3)
        perm = rng.permutation(3)
        p = Gauss3Params(a=(1, 1, 1), b=tuple(b), c=(1, 1, 1))
        q = Gauss3Params(a=(1, 1, 1), b=tuple(b[perm]), c=(1, 1, 1))
        assert sorted(bi_differences(p)) == pytest.approx(
            sorted(bi_differences(q)))


def test_rule_classify():
    loose = Gauss3Params(a=(1, 1, 1), b=(48.9, 24.8, 52.8), c=(1, 1, 1))
    tight = Gauss3Params(a=(1, 1, 1), b=(10, 11, 12), c=(1, 1, 1))
    same = Gauss3Params(a=(1, 1, 1), b=(5, 5, 5), c=(1, 1, 1))
    assert rule_classify(loose, 10.0) == 1
    assert rule_classify(tight, 10.0) == 0
    assert rule_classify(same, 0.001) == 0


def test_rule_threshold_validated():
    params = Gauss3Params(a=(1, 1, 1), b=(1, 2, 3), c=(1, 1, 1))
    for bad in (0.0, -1.0):
        with pytest.raises(NonPositiveThreshold):
            rule_classify(params, bad)


def test_rule_invariances():
    rng = np.random.default_rng(41)
    for _ in range(1000):
        b = rng.uniform(-80, 80, 3)
        threshold = float(rng.uniform(0.5, 30))
        base = rule_classify(Gauss3Params(a=(1, 1, 1), b=tuple(b),
                                          c=(1, 1, 1)), threshold)
        perm = rng.permutation(3)
        offset = float(rng.uniform(-100, 100))
        moved = Gauss3Params(a=(1, 1, 1), b=tuple(b[perm] + offset),
                             c=(1, 1, 1))
        assert rule_classify(moved, threshold) == base


def test_build_sample_feature_order():
    sample = build_sample(make_fit(rmse=21.8, b=(48.9, 24.8, 52.8)), 10.0)
    assert sample.features == pytest.approx([21.8, 48.9, 24.8, 52.8])
    assert sample.label == 1


def test_build_sample_clustered_centers():
    assert build_sample(make_fit(b=(5.0, 6.0, 7.0)), 10.0).label == 0


def test_build_sample_manual_override():
    sample = build_sample(make_fit(b=(5.0, 6.0, 7.0)), 10.0, manual_label=1,
                          provenance="r0:3")
    assert sample.label == 1
    assert sample.provenance == "r0:3"


def test_build_sample_unconverged():
    with pytest.raises(Unconverged):
        build_sample(make_fit(converged=False))


def test_build_dataset_split_sizes():
    fits = [make_fit() for _ in range(1000)]
    labels = [i % 2 for i in range(1000)]
    train, holdout = build_dataset(fits, labels, 0.507)
    assert len(train) == 507 and len(holdout) == 493
    train, holdout = build_dataset(fits[:2], labels[:2], 0.5)
    assert len(train) == 1 and len(holdout) == 1


def test_build_dataset_deterministic_and_disjoint():
    fits = [make_fit(rmse=float(i)) for i in range(40)]
    labels = [i % 2 for i in range(40)]
    a_train, a_hold = build_dataset(fits, labels, 0.6, seed=5)
    b_train, b_hold = build_dataset(fits, labels, 0.6, seed=5)
    assert [s.provenance for s in a_train.samples] == \
        [s.provenance for s in b_train.samples]
    seen = sorted(int(s.provenance) for s in
                  a_train.samples + a_hold.samples)
    assert seen == list(range(40))


def test_build_dataset_validates():
    with pytest.raises(EmptyInput):
        build_dataset([], [], 0.5)
    with pytest.raises(LengthMismatch):
        build_dataset([make_fit()], [0, 1], 0.5)
    with pytest.raises(ValueError):
        build_dataset([make_fit()], [0], 1.5)


def test_dataset_round_trip():
    data = Dataset([build_sample(make_fit(rmse=float(i), b=(i, i + 1.0,
                                                            i + 20.0)))
                    for i in range(10)])
    back = read_dataset(write_dataset(data))
    assert len(back) == 10
    assert np.allclose(back.feature_matrix(), data.feature_matrix())
    assert np.array_equal(back.labels(), data.labels())


def test_read_dataset_errors():
    with pytest.raises(EmptyInput):
        read_dataset("rmse,b1,b2,b3,label\n")
    with pytest.raises(MalformedRow):
        read_dataset("1.0,2.0,3.0\n")
    with pytest.raises(MalformedRow):
        read_dataset("1.0,2.0,3.0,4.0,zebra\n")


def test_read_annotations():
    text = "profile_id,label\nrec0:0,1\nrec0:1,0\n"
    assert read_annotations(text) == {"rec0:0": 1, "rec0:1": 0}
    with pytest.raises(MalformedRow):
        read_annotations("rec0:0,nope\n")
