"""Shared CART engine for the tree, forest, and boosting families.

Trees are nested dicts (JSON-ready): internal nodes carry a feature index
and a midpoint threshold with left = "less or equal"; leaves carry class
counts (classification) or a value (regression).  Split search is exact and
vectorized: every boundary between distinct sorted feature values is scored
via cumulative statistics.  All ties resolve to the first candidate in scan
order (features ascending, thresholds ascending), so builds are repeatable.
"""

from __future__ import annotations

import numpy as np


def _gini_best_split(
    X: np.ndarray, onehot: np.ndarray, feature: int
) -> tuple[float, float] | None:
    """Best (impurity, threshold) for one feature, or None without a boundary."""
    values = X[:, feature]
    order = np.argsort(values, kind="stable")
    sv = values[order]
    boundaries = np.flatnonzero(sv[:-1] < sv[1:])
    if boundaries.size == 0:
        return None
    counts = np.cumsum(onehot[order], axis=0)
    total = counts[-1]
    n = float(X.shape[0])
    left = counts[boundaries].astype(np.float64)
    right = total.astype(np.float64) - left
    n_left = left.sum(axis=1)
    n_right = right.sum(axis=1)
    gini_left = 1.0 - ((left / n_left[:, None]) ** 2).sum(axis=1)
    gini_right = 1.0 - ((right / n_right[:, None]) ** 2).sum(axis=1)
    weighted = (n_left * gini_left + n_right * gini_right) / n
    best = int(np.argmin(weighted))
    threshold = (sv[boundaries[best]] + sv[boundaries[best] + 1]) / 2.0
    return float(weighted[best]), threshold


def _node_gini(onehot: np.ndarray) -> float:
    counts = onehot.sum(axis=0).astype(np.float64)
    n = counts.sum()
    return float(1.0 - ((counts / n) ** 2).sum())


def build_classification_tree(
    X: np.ndarray,
    y: np.ndarray,
    n_classes: int,
    max_depth: int,
    min_samples_split: int = 2,
    max_features: int | None = None,
    rng: np.random.Generator | None = None,
) -> dict:
    """Gini-greedy CART classifier tree over integer class codes."""
    onehot = np.zeros((len(y), n_classes), dtype=np.int64)
    onehot[np.arange(len(y)), y] = 1

    def grow(idx: np.ndarray, depth: int) -> dict:
        sub_hot = onehot[idx]
        counts = sub_hot.sum(axis=0)
        leaf = {"counts": [int(c) for c in counts]}
        if depth >= max_depth or idx.size < min_samples_split or _node_gini(sub_hot) == 0.0:
            return leaf
        n_feat = X.shape[1]
        if max_features is not None and max_features < n_feat:
            assert rng is not None, "feature subsampling needs an rng"
            candidates = np.sort(rng.choice(n_feat, size=max_features, replace=False))
        else:
            candidates = np.arange(n_feat)
        parent = _node_gini(sub_hot)
        best: tuple[float, int, float] | None = None
        sub_X = X[idx]
        for feature in candidates:
            found = _gini_best_split(sub_X, sub_hot, int(feature))
            if found is None:
                continue
            impurity, threshold = found
            if impurity < parent and (best is None or impurity < best[0]):
                best = (impurity, int(feature), threshold)
        if best is None:
            return leaf
        _, feature, threshold = best
        mask = X[idx, feature] <= threshold
        return {
            "feature": feature,
            "threshold": threshold,
            "left": grow(idx[mask], depth + 1),
            "right": grow(idx[~mask], depth + 1),
        }

    return grow(np.arange(X.shape[0]), 0)


def _mse_best_split(X: np.ndarray, y: np.ndarray, feature: int) -> tuple[float, float] | None:
    values = X[:, feature]
    order = np.argsort(values, kind="stable")
    sv = values[order]
    boundaries = np.flatnonzero(sv[:-1] < sv[1:])
    if boundaries.size == 0:
        return None
    sy = y[order]
    cum = np.cumsum(sy)
    cum2 = np.cumsum(sy * sy)
    n = float(len(y))
    n_left = (boundaries + 1).astype(np.float64)
    n_right = n - n_left
    sum_left = cum[boundaries]
    sum_right = cum[-1] - sum_left
    sse_left = cum2[boundaries] - sum_left**2 / n_left
    sse_right = (cum2[-1] - cum2[boundaries]) - sum_right**2 / n_right
    weighted = (sse_left + sse_right) / n
    best = int(np.argmin(weighted))
    threshold = (sv[boundaries[best]] + sv[boundaries[best] + 1]) / 2.0
    return float(weighted[best]), threshold


def build_regression_tree(
    X: np.ndarray,
    y: np.ndarray,
    max_depth: int,
    min_samples_split: int = 2,
    leaf_value=None,
) -> dict:
    """Squared-error CART regression tree; leaf_value may override leaf means.

    leaf_value, when given, maps the row-index array of a leaf to its value
    (boosting uses this for Newton leaf weights).
    """

    def default_leaf(idx: np.ndarray) -> float:
        return float(y[idx].mean())

    value_of = leaf_value if leaf_value is not None else default_leaf

    def grow(idx: np.ndarray, depth: int) -> dict:
        sub_y = y[idx]
        if depth >= max_depth or idx.size < min_samples_split or float(sub_y.var()) == 0.0:
            return {"value": float(value_of(idx))}
        parent = float(sub_y.var())
        sub_X = X[idx]
        best: tuple[float, int, float] | None = None
        for feature in range(X.shape[1]):
            found = _mse_best_split(sub_X, sub_y, feature)
            if found is None:
                continue
            mse, threshold = found
            if mse < parent and (best is None or mse < best[0]):
                best = (mse, feature, threshold)
        if best is None:
            return {"value": float(value_of(idx))}
        _, feature, threshold = best
        mask = X[idx, feature] <= threshold
        return {
            "feature": feature,
            "threshold": threshold,
            "left": grow(idx[mask], depth + 1),
            "right": grow(idx[~mask], depth + 1),
        }

    return grow(np.arange(X.shape[0]), 0)


def tree_apply(tree: dict, X: np.ndarray) -> list[dict]:
    """Leaf dict reached by every row of X."""
    out: list[dict] = []
    for row in X:
        node = tree
        while "feature" in node:
            node = node["left"] if row[node["feature"]] <= node["threshold"] else node["right"]
        out.append(node)
    return out


def classify_counts(tree: dict, X: np.ndarray) -> np.ndarray:
    """Leaf class-count matrix (rows x classes) for classification trees."""
    return np.array([leaf["counts"] for leaf in tree_apply(tree, X)], dtype=np.float64)


def regress(tree: dict, X: np.ndarray) -> np.ndarray:
    return np.array([leaf["value"] for leaf in tree_apply(tree, X)], dtype=np.float64)
