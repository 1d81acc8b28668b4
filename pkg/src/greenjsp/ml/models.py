"""Seven from-scratch classifier families behind one fit/predict surface.

Every family trains deterministically from (hyperparams, seed, data) and
serializes to a versioned JSON payload, so identical inputs produce
byte-identical model files.  Families needing comparable feature scales
(logistic, knn, mlp) standardize with train-set statistics stored in the
model; the tree families and naive Bayes see raw features.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .datasets import ClassTooSmall, LabeledDataset, NonFiniteFeature
from .trees import (
    build_classification_tree,
    build_regression_tree,
    classify_counts,
    regress,
)

MODEL_FORMAT_VERSION = 1

FAMILIES = (
    "logistic",
    "gaussian_nb",
    "decision_tree",
    "knn",
    "random_forest",
    "gradient_boosted_trees",
    "mlp",
)

_STANDARDIZED = {"logistic", "knn", "mlp"}

DEFAULT_HYPERPARAMS: dict[str, dict] = {
    "logistic": {"l2": 1e-4, "learning_rate": 0.1, "epochs": 500},
    "gaussian_nb": {"var_smoothing": 1e-9},
    "decision_tree": {"max_depth": 12, "min_samples_split": 2},
    "knn": {"k": 5},
    "random_forest": {"n_trees": 100, "max_depth": 12, "min_samples_split": 2, "max_features": 4, "bootstrap": True},
    "gradient_boosted_trees": {"rounds": 100, "max_depth": 4, "learning_rate": 0.1},
    "mlp": {"hidden": 64, "learning_rate": 0.01, "epochs": 200},
}


class UnknownFamily(ValueError):
    pass


class DimensionMismatch(ValueError):
    """Feature vectors must match the model's trained dimension."""


@dataclass(frozen=True, slots=True)
class ModelSpec:
    """A model family with hyperparameter overrides and a training seed."""

    family: str
    hyperparams: Mapping = field(default_factory=dict)
    seed: int = 0

    def resolved_hyperparams(self) -> dict:
        if self.family not in FAMILIES:
            raise UnknownFamily(f"unknown model family {self.family!r}")
        merged = dict(DEFAULT_HYPERPARAMS[self.family])
        unknown = set(self.hyperparams) - set(merged)
        if unknown:
            raise ValueError(f"unknown hyperparameters for {self.family}: {sorted(unknown)}")
        merged.update(self.hyperparams)
        return merged


@dataclass(frozen=True, slots=True)
class Standardizer:
    """Column-wise z-scoring with train statistics; constant columns map to 0."""

    mean: tuple[float, ...]
    std: tuple[float, ...]

    def transform(self, X: np.ndarray) -> np.ndarray:
        mean = np.asarray(self.mean)
        std = np.asarray(self.std)
        out = np.zeros_like(X, dtype=np.float64)
        nonzero = std > 0.0
        out[:, nonzero] = (X[:, nonzero] - mean[nonzero]) / std[nonzero]
        return out

    @staticmethod
    def fit(X: np.ndarray) -> "Standardizer":
        return Standardizer(
            mean=tuple(float(v) for v in X.mean(axis=0)),
            std=tuple(float(v) for v in X.std(axis=0)),
        )


@dataclass(frozen=True, slots=True)
class TrainedModel:
    family: str
    hyperparams: dict
    seed: int
    labels: tuple[str, ...]
    n_features: int
    standardizer: Standardizer | None
    params: dict
    format_version: int = MODEL_FORMAT_VERSION


def _softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def _onehot(y: np.ndarray, k: int) -> np.ndarray:
    out = np.zeros((len(y), k), dtype=np.float64)
    out[np.arange(len(y)), y] = 1.0
    return out


def _fit_logistic(X: np.ndarray, y: np.ndarray, k: int, hp: dict, rng: np.random.Generator) -> dict:
    """Softmax regression by full-batch gradient descent from zero weights."""
    del rng
    n, d = X.shape
    W = np.zeros((d, k))
    b = np.zeros(k)
    Y = _onehot(y, k)
    for _ in range(hp["epochs"]):
        P = _softmax(X @ W + b)
        G = (P - Y) / n
        W -= hp["learning_rate"] * (X.T @ G + hp["l2"] * W)
        b -= hp["learning_rate"] * G.sum(axis=0)
    return {"weights": W.tolist(), "bias": b.tolist()}


def _score_logistic(params: dict, X: np.ndarray) -> np.ndarray:
    return X @ np.asarray(params["weights"]) + np.asarray(params["bias"])


def _fit_gaussian_nb(X: np.ndarray, y: np.ndarray, k: int, hp: dict, rng: np.random.Generator) -> dict:
    del rng
    n, _ = X.shape
    smoothing = hp["var_smoothing"] * float(X.var(axis=0).max())
    means, variances, priors = [], [], []
    for c in range(k):
        rows = X[y == c]
        means.append(rows.mean(axis=0).tolist())
        variances.append((rows.var(axis=0) + smoothing).tolist())
        priors.append(len(rows) / n)
    return {"means": means, "variances": variances, "log_priors": [math.log(p) for p in priors]}


def _score_gaussian_nb(params: dict, X: np.ndarray) -> np.ndarray:
    means = np.asarray(params["means"])
    variances = np.asarray(params["variances"])
    log_priors = np.asarray(params["log_priors"])
    diff = X[:, None, :] - means[None, :, :]
    log_lik = -0.5 * (np.log(2.0 * math.pi * variances)[None] + diff**2 / variances[None]).sum(axis=2)
    return log_priors[None, :] + log_lik


def _fit_decision_tree(X: np.ndarray, y: np.ndarray, k: int, hp: dict, rng: np.random.Generator) -> dict:
    del rng
    tree = build_classification_tree(
        X, y, k, max_depth=hp["max_depth"], min_samples_split=hp["min_samples_split"]
    )
    return {"tree": tree}


def _score_decision_tree(params: dict, X: np.ndarray) -> np.ndarray:
    return classify_counts(params["tree"], X)


def _fit_knn(X: np.ndarray, y: np.ndarray, k: int, hp: dict, rng: np.random.Generator) -> dict:
    del k, rng
    return {"points": X.tolist(), "classes": [int(c) for c in y], "k": hp["k"]}


def _score_knn(params: dict, X: np.ndarray) -> np.ndarray:
    """Vote counts of the k nearest stored rows (distance ties: lower row first)."""
    points = np.asarray(params["points"])
    classes = np.asarray(params["classes"])
    k = min(int(params["k"]), len(points))
    n_classes = int(classes.max()) + 1
    scores = np.zeros((X.shape[0], n_classes))
    for i, row in enumerate(X):
        dist = ((points - row) ** 2).sum(axis=1)
        nearest = np.argsort(dist, kind="stable")[:k]
        for c in classes[nearest]:
            scores[i, c] += 1.0
    return scores


def _fit_random_forest(X: np.ndarray, y: np.ndarray, k: int, hp: dict, rng: np.random.Generator) -> dict:
    n, d = X.shape
    max_features = min(hp["max_features"], d)
    trees = []
    for _ in range(hp["n_trees"]):
        idx = rng.integers(0, n, size=n) if hp["bootstrap"] else np.arange(n)
        trees.append(
            build_classification_tree(
                X[idx], y[idx], k,
                max_depth=hp["max_depth"],
                min_samples_split=hp["min_samples_split"],
                max_features=max_features if max_features < d else None,
                rng=rng,
            )
        )
    return {"trees": trees}


def _score_random_forest(params: dict, X: np.ndarray) -> np.ndarray:
    """Majority vote over per-tree leaf-majority classes (first max on ties)."""
    votes: np.ndarray | None = None
    for tree in params["trees"]:
        counts = classify_counts(tree, X)
        picks = counts.argmax(axis=1)
        hot = np.zeros_like(counts)
        hot[np.arange(len(picks)), picks] = 1.0
        votes = hot if votes is None else votes + hot
    assert votes is not None
    return votes


def _fit_gbt(X: np.ndarray, y: np.ndarray, k: int, hp: dict, rng: np.random.Generator) -> dict:
    """Boosted depth-limited regression trees on softmax residuals.

    Scores start at the log class priors; each round fits one tree per class
    to (onehot - probability) with Newton leaf values, added at the
    learning rate.
    """
    del rng
    n = X.shape[0]
    Y = _onehot(y, k)
    priors = Y.mean(axis=0)
    init = [math.log(p) if p > 0 else -1e9 for p in priors]
    F = np.tile(init, (n, 1))
    rounds: list[list[dict]] = []
    for _ in range(hp["rounds"]):
        P = _softmax(F)
        round_trees: list[dict] = []
        for c in range(k):
            residual = Y[:, c] - P[:, c]
            hessian = P[:, c] * (1.0 - P[:, c])

            def newton_value(idx: np.ndarray) -> float:
                return float(residual[idx].sum() / (hessian[idx].sum() + 1e-9))

            tree = build_regression_tree(
                X, residual, max_depth=hp["max_depth"], leaf_value=newton_value
            )
            round_trees.append(tree)
            F[:, c] += hp["learning_rate"] * regress(tree, X)
        rounds.append(round_trees)
    return {"init_scores": init, "rounds": rounds, "learning_rate": hp["learning_rate"]}


def _score_gbt(params: dict, X: np.ndarray) -> np.ndarray:
    scores = np.tile(params["init_scores"], (X.shape[0], 1))
    lr = params["learning_rate"]
    for round_trees in params["rounds"]:
        for c, tree in enumerate(round_trees):
            scores[:, c] += lr * regress(tree, X)
    return scores


def _mlp_init(d: int, hidden: int, k: int, rng: np.random.Generator) -> dict:
    limit1 = 1.0 / math.sqrt(d)
    limit2 = 1.0 / math.sqrt(hidden)
    return {
        "W1": rng.uniform(-limit1, limit1, size=(d, hidden)),
        "b1": np.zeros(hidden),
        "W2": rng.uniform(-limit2, limit2, size=(hidden, k)),
        "b2": np.zeros(k),
    }


def mlp_loss(params: Mapping[str, np.ndarray], X: np.ndarray, Y: np.ndarray) -> float:
    """Mean cross-entropy of the one-hidden-layer ReLU network."""
    hidden = np.maximum(0.0, X @ params["W1"] + params["b1"])
    P = _softmax(hidden @ params["W2"] + params["b2"])
    return float(-(Y * np.log(np.clip(P, 1e-300, None))).sum() / X.shape[0])


def mlp_gradients(params: Mapping[str, np.ndarray], X: np.ndarray, Y: np.ndarray) -> dict[str, np.ndarray]:
    """Analytic gradients of mlp_loss with respect to every parameter."""
    n = X.shape[0]
    pre1 = X @ params["W1"] + params["b1"]
    hidden = np.maximum(0.0, pre1)
    P = _softmax(hidden @ params["W2"] + params["b2"])
    delta2 = (P - Y) / n
    delta1 = (delta2 @ params["W2"].T) * (pre1 > 0.0)
    return {
        "W1": X.T @ delta1,
        "b1": delta1.sum(axis=0),
        "W2": hidden.T @ delta2,
        "b2": delta2.sum(axis=0),
    }


def _fit_mlp(X: np.ndarray, y: np.ndarray, k: int, hp: dict, rng: np.random.Generator) -> dict:
    params = _mlp_init(X.shape[1], hp["hidden"], k, rng)
    Y = _onehot(y, k)
    for _ in range(hp["epochs"]):
        grads = mlp_gradients(params, X, Y)
        for key in params:
            params[key] = params[key] - hp["learning_rate"] * grads[key]
    return {key: value.tolist() for key, value in params.items()}


def _score_mlp(params: dict, X: np.ndarray) -> np.ndarray:
    hidden = np.maximum(0.0, X @ np.asarray(params["W1"]) + np.asarray(params["b1"]))
    return hidden @ np.asarray(params["W2"]) + np.asarray(params["b2"])


_FIT = {
    "logistic": _fit_logistic,
    "gaussian_nb": _fit_gaussian_nb,
    "decision_tree": _fit_decision_tree,
    "knn": _fit_knn,
    "random_forest": _fit_random_forest,
    "gradient_boosted_trees": _fit_gbt,
    "mlp": _fit_mlp,
}

_SCORE = {
    "logistic": _score_logistic,
    "gaussian_nb": _score_gaussian_nb,
    "decision_tree": _score_decision_tree,
    "knn": _score_knn,
    "random_forest": _score_random_forest,
    "gradient_boosted_trees": _score_gbt,
    "mlp": _score_mlp,
}


def fit(spec: ModelSpec, dataset: LabeledDataset) -> TrainedModel:
    """Train one model; deterministic in (spec, dataset)."""
    hp = spec.resolved_hyperparams()
    dataset.require_finite()
    labels = dataset.label_table
    if len(labels) < 2:
        raise ClassTooSmall(f"training needs at least 2 classes, got {len(labels)}")
    code = {label: i for i, label in enumerate(labels)}
    y = np.array([code[label] for label in dataset.labels], dtype=np.int64)
    X = dataset.features
    standardizer = None
    if spec.family in _STANDARDIZED:
        standardizer = Standardizer.fit(X)
        X = standardizer.transform(X)
    rng = np.random.default_rng(spec.seed)
    params = _FIT[spec.family](X, y, len(labels), hp, rng)
    return TrainedModel(
        family=spec.family,
        hyperparams=hp,
        seed=spec.seed,
        labels=labels,
        n_features=dataset.n_features,
        standardizer=standardizer,
        params=params,
    )


def _scores_for(model: TrainedModel, X: np.ndarray) -> np.ndarray:
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise DimensionMismatch(
            f"model expects {model.n_features} features, got {X.shape[1] if X.ndim == 2 else 'non-matrix input'}"
        )
    if not np.isfinite(X).all():
        raise NonFiniteFeature("feature matrix contains non-finite values")
    if model.standardizer is not None:
        X = model.standardizer.transform(X)
    return _SCORE[model.family](model.params, X)


def predict_many(model: TrainedModel, X: Sequence[Sequence[float]] | np.ndarray) -> list[str]:
    """Predicted label per row; score ties go to the earlier label."""
    scores = _scores_for(model, np.asarray(X, dtype=np.float64))
    return [model.labels[i] for i in scores.argmax(axis=1)]


def predict(model: TrainedModel, features: Sequence[float]) -> str:
    """Predicted label for one feature vector."""
    row = np.asarray(features, dtype=np.float64)
    if row.ndim != 1:
        raise DimensionMismatch("predict takes a single flat feature vector")
    return predict_many(model, row[None, :])[0]


def save_model(model: TrainedModel, path: str | Path) -> None:
    """Write a model as canonical JSON; identical models give identical bytes."""
    payload = {
        "format_version": model.format_version,
        "family": model.family,
        "hyperparams": model.hyperparams,
        "seed": model.seed,
        "labels": list(model.labels),
        "n_features": model.n_features,
        "standardizer": None if model.standardizer is None else {
            "mean": list(model.standardizer.mean),
            "std": list(model.standardizer.std),
        },
        "params": model.params,
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> TrainedModel:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValueError(f"not a valid model file: {path}") from exc
    version = payload.get("format_version")
    if version != MODEL_FORMAT_VERSION:
        raise ValueError(f"unsupported model format version {version!r} in {path}")
    std = payload["standardizer"]
    return TrainedModel(
        family=payload["family"],
        hyperparams=payload["hyperparams"],
        seed=payload["seed"],
        labels=tuple(payload["labels"]),
        n_features=payload["n_features"],
        standardizer=None if std is None else Standardizer(mean=tuple(std["mean"]), std=tuple(std["std"])),
        params=payload["params"],
    )
