"""KNN, CART and Random Forest classifiers with repeated k-fold CV.

All three are written against the same small dataset of 4-feature
samples. Determinism is part of the contract: fixed seeds give
bit-identical models, fold splits and reports. Tie policy everywhere:
vote ties resolve to label 0, split ties to the lowest feature index
then lowest threshold, distance ties to the lowest training index.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import _tree
from .errors import (EmptyData, LengthMismatch, NonFiniteFeature, NotTrained,
                     SingleClassData, TooFewSamples, EmptyInput)
from .labeling import Dataset, LabeledSample

MODEL_KINDS = ("knn", "cart", "forest")
MODEL_FORMAT = "glissade-model"
MODEL_VERSION = 1


@dataclass
class ModelSpec:
    """What to train.

    forest_bootstrap and tree_seeds are mostly for testing: disabling
    the bootstrap with one tree and all features reduces the forest to a
    plain CART, and explicit per-tree seeds allow duplicate trees.
    """

    kind: str = "forest"
    knn_k: int = 4
    cart_max_depth: int | None = None
    cart_min_leaf: int = 1
    forest_trees: int = 100
    forest_features_per_split: int = 2
    seed: int = 0
    forest_bootstrap: bool = True
    tree_seeds: list | None = None

    def validate(self):
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        if self.knn_k < 1 or self.forest_trees < 1 or self.cart_min_leaf < 1:
            raise ValueError("counts must be positive")
        if self.forest_features_per_split < 1:
            raise ValueError("features_per_split must be positive")


@dataclass
class CvReport:
    fold_scores: list[float]
    mean: float
    std: float
    repeats: int
    folds: int


def _check_training_data(data: Dataset) -> tuple[np.ndarray, np.ndarray]:
    if len(data) == 0:
        raise EmptyData("no training samples")
    X = data.feature_matrix()
    y = data.labels()
    if len(np.unique(y)) < 2:
        raise SingleClassData("training data has a single class")
    return X, y


def _check_query(features) -> np.ndarray:
    q = np.asarray(features, dtype=float).ravel()
    if not np.all(np.isfinite(q)):
        raise NonFiniteFeature("query features must be finite")
    return q


class KnnModel:
    def __init__(self, k: int, X: np.ndarray, y: np.ndarray):
        self.k = min(k, len(y))
        self.mu = X.mean(axis=0)
        sd = X.std(axis=0)
        sd[sd == 0] = 1.0  # constant feature carries no distance
        self.sd = sd
        self.Xs = (X - self.mu) / self.sd
        self.y = y
        self.trained = True

    def predict(self, features) -> int:
        return int(self.predict_batch(_check_query(features)[None, :])[0])

    def predict_batch(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if not np.all(np.isfinite(X)):
            raise NonFiniteFeature("query features must be finite")
        Q = (X - self.mu) / self.sd
        # squared distances order the same as distances
        d2 = ((Q[:, None, :] - self.Xs[None, :, :]) ** 2).sum(axis=2)
        near = np.argsort(d2, axis=1, kind="mergesort")[:, :self.k]
        votes = self.y[near].sum(axis=1)
        return (votes * 2 > self.k).astype(int)


class CartModel:
    def __init__(self, nodes):
        self.feature, self.thresh, self.left, self.right, self.label = nodes
        self.trained = True

    def predict(self, features) -> int:
        q = _check_query(features)
        return int(self.predict_batch(q[None, :])[0])

    def predict_batch(self, X) -> np.ndarray:
        X = np.ascontiguousarray(np.asarray(X, dtype=float))
        return _tree.evaluate(self.feature, self.thresh, self.left,
                              self.right, self.label, X)


class ForestModel:
    def __init__(self, trees: list[CartModel]):
        self.trees = trees
        self.trained = True

    def tree_predictions(self, X) -> np.ndarray:
        """(n_trees, n_queries) matrix of individual tree votes."""
        return np.stack([t.predict_batch(X) for t in self.trees])

    def predict(self, features) -> int:
        q = _check_query(features)
        return int(self.predict_batch(q[None, :])[0])

    def predict_batch(self, X) -> np.ndarray:
        votes = self.tree_predictions(np.asarray(X, dtype=float)).sum(axis=0)
        return (votes * 2 > len(self.trees)).astype(int)


def _grow_cart(X, y, max_depth, min_leaf, feat_rand=None, n_feat_split=None):
    n_features = X.shape[1]
    if feat_rand is None:
        # a single increasing row makes every node consider all features
        feat_rand = (np.arange(n_features, dtype=float) / n_features)[None, :]
    if n_feat_split is None:
        n_feat_split = n_features
    idx = np.arange(X.shape[0], dtype=np.int64)
    depth = -1 if max_depth is None else int(max_depth)
    return _tree.grow(np.ascontiguousarray(X), y.astype(np.int64), idx,
                      depth, int(min_leaf), feat_rand, int(n_feat_split))


def train(spec: ModelSpec, data: Dataset):
    """Train the model described by spec on the dataset.

    Raises EmptyData on an empty dataset and SingleClassData when only
    one class is present.
    """
    spec.validate()
    X, y = _check_training_data(data)
    if spec.kind == "knn":
        return KnnModel(spec.knn_k, X, y)
    if spec.kind == "cart":
        return CartModel(_grow_cart(X, y, spec.cart_max_depth,
                                    spec.cart_min_leaf))
    # forest
    n = X.shape[0]
    n_features = X.shape[1]
    n_split = min(spec.forest_features_per_split, n_features)
    Xc = np.ascontiguousarray(X)
    y64 = y.astype(np.int64)
    trees = []
    for t in range(spec.forest_trees):
        if spec.tree_seeds is not None:
            rng = np.random.default_rng(spec.tree_seeds[t])
        else:
            rng = np.random.default_rng([spec.seed, t])
        if spec.forest_bootstrap:
            idx = rng.integers(0, n, n).astype(np.int64)
        else:
            idx = np.arange(n, dtype=np.int64)
        feat_rand = rng.random((64, n_features))
        nodes = _tree.grow(Xc, y64, idx, -1 if spec.cart_max_depth is None
                           else int(spec.cart_max_depth),
                           int(spec.cart_min_leaf), feat_rand, n_split)
        trees.append(CartModel(nodes))
    return ForestModel(trees)


def predict(model, features) -> int:
    """Class label for one 4-feature query."""
    if not getattr(model, "trained", False):
        raise NotTrained("model has not been trained")
    return model.predict(features)


def accuracy(predicted, actual) -> float:
    predicted = np.asarray(predicted)
    actual = np.asarray(actual)
    if predicted.shape != actual.shape:
        raise LengthMismatch(f"{predicted.size} vs {actual.size} labels")
    if predicted.size == 0:
        raise EmptyInput("no labels")
    return float(np.mean(predicted == actual))


def cross_validate(spec, data: Dataset, folds: int = 10, repeats: int = 10,
                   seed: int = 0) -> CvReport:
    """Repeated k-fold cross-validation.

    Each repeat shuffles the sample order with a seed derived from
    (seed, repeat), splits it into `folds` near-equal contiguous parts,
    trains on folds-1 parts and scores accuracy on the held-out part.
    fold_scores is ordered repeat-major.

    `spec` may be a ModelSpec or a callable Dataset -> model, where the
    model only needs a predict(features) method. mean is the arithmetic
    mean of all fold scores and std their population standard deviation.
    """
    if folds < 2:
        raise ValueError(f"folds must be >= 2, got {folds}")
    n = len(data)
    if n < folds:
        raise TooFewSamples(f"{n} samples for {folds} folds")
    factory = spec if callable(spec) else (lambda d: train(spec, d))

    scores: list[float] = []
    samples = data.samples
    for r in range(repeats):
        perm = np.random.default_rng([seed, r]).permutation(n)
        parts = np.array_split(perm, folds)
        for f in range(folds):
            test_idx = parts[f]
            train_idx = np.concatenate([parts[j] for j in range(folds) if j != f])
            model = factory(Dataset([samples[i] for i in train_idx]))
            feats = np.array([samples[i].features for i in test_idx])
            if hasattr(model, "predict_batch"):
                predicted = model.predict_batch(feats)
            else:
                predicted = [model.predict(f) for f in feats]
            actual = [samples[i].label for i in test_idx]
            scores.append(accuracy(predicted, actual))
    return CvReport(fold_scores=scores, mean=float(np.mean(scores)),
                    std=float(np.std(scores)), repeats=repeats, folds=folds)


def knn_k_sweep(data: Dataset, k_values=range(1, 16), folds: int = 10,
                repeats: int = 2, seed: int = 0) -> dict[int, CvReport]:
    """Cross-validated accuracy for each neighbor count.

    Gives the same reports as running cross_validate once per k with a
    knn ModelSpec; the per-fold distance ranking is computed once and
    shared by every k, which keeps wide sweeps cheap.
    """
    if folds < 2:
        raise ValueError(f"folds must be >= 2, got {folds}")
    n = len(data)
    if n < folds:
        raise TooFewSamples(f"{n} samples for {folds} folds")
    ks = [int(k) for k in k_values]
    X = data.feature_matrix()
    ylab = np.asarray(data.labels())
    scores: dict[int, list[float]] = {k: [] for k in ks}
    for r in range(repeats):
        perm = np.random.default_rng([seed, r]).permutation(n)
        parts = np.array_split(perm, folds)
        for f in range(folds):
            test_idx = parts[f]
            train_idx = np.concatenate([parts[j] for j in range(folds) if j != f])
            Xtr = X[train_idx]
            ytr = ylab[train_idx]
            mu = Xtr.mean(axis=0)
            sd = Xtr.std(axis=0)
            sd[sd == 0] = 1.0
            Xs = (Xtr - mu) / sd
            Q = (X[test_idx] - mu) / sd
            d2 = ((Q[:, None, :] - Xs[None, :, :]) ** 2).sum(axis=2)
            ranked = np.argsort(d2, axis=1, kind="mergesort")
            actual = ylab[test_idx]
            for k in ks:
                kk = min(k, train_idx.size)
                votes = ytr[ranked[:, :kk]].sum(axis=1)
                predicted = (votes * 2 > kk).astype(int)
                scores[k].append(float(np.mean(predicted == actual)))
    return {k: CvReport(fold_scores=scores[k], mean=float(np.mean(scores[k])),
                        std=float(np.std(scores[k])), repeats=repeats,
                        folds=folds)
            for k in ks}


# --- persistence: versioned, human-readable, no pickle ---

def _tree_payload(tree: CartModel) -> dict:
    return {
        "feature": tree.feature.tolist(),
        "thresh": tree.thresh.tolist(),
        "left": tree.left.tolist(),
        "right": tree.right.tolist(),
        "label": tree.label.tolist(),
    }


def _tree_from_payload(payload: dict) -> CartModel:
    return CartModel((
        np.asarray(payload["feature"], dtype=np.int64),
        np.asarray(payload["thresh"], dtype=np.float64),
        np.asarray(payload["left"], dtype=np.int64),
        np.asarray(payload["right"], dtype=np.int64),
        np.asarray(payload["label"], dtype=np.int64),
    ))


def save_model(model, path: str):
    if isinstance(model, KnnModel):
        payload = {"kind": "knn", "k": model.k, "mu": model.mu.tolist(),
                   "sd": model.sd.tolist(), "Xs": model.Xs.tolist(),
                   "y": model.y.tolist()}
    elif isinstance(model, CartModel):
        payload = {"kind": "cart", "tree": _tree_payload(model)}
    elif isinstance(model, ForestModel):
        payload = {"kind": "forest",
                   "trees": [_tree_payload(t) for t in model.trees]}
    else:
        raise NotTrained(f"cannot serialize {type(model).__name__}")
    doc = {"format": MODEL_FORMAT, "version": MODEL_VERSION, **payload}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_model(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format") != MODEL_FORMAT or doc.get("version") != MODEL_VERSION:
        raise ValueError(f"not a version-{MODEL_VERSION} {MODEL_FORMAT} file")
    kind = doc["kind"]
    if kind == "knn":
        model = KnnModel.__new__(KnnModel)
        model.k = int(doc["k"])
        model.mu = np.asarray(doc["mu"], dtype=float)
        model.sd = np.asarray(doc["sd"], dtype=float)
        model.Xs = np.asarray(doc["Xs"], dtype=float)
        model.y = np.asarray(doc["y"], dtype=int)
        model.trained = True
        return model
    if kind == "cart":
        return _tree_from_payload(doc["tree"])
    if kind == "forest":
        return ForestModel([_tree_from_payload(t) for t in doc["trees"]])
    raise ValueError(f"unknown model kind {kind!r}")
