"""Labeled feature matrices with stratified splitting and folding.

Splits keep per-class proportions within one row of exact and are driven
entirely by the given seed: each class's rows are shuffled independently,
then dealt to the test set or to folds round-robin.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class ClassTooSmall(ValueError):
    """A class has too few rows for the requested split or fold count."""


class NonFiniteFeature(ValueError):
    """The feature matrix contains NaN or infinite entries."""


@dataclass(frozen=True)
class LabeledDataset:
    """Feature matrix plus one string label per row."""

    features: np.ndarray
    labels: tuple[str, ...]

    def __post_init__(self) -> None:
        X = np.asarray(self.features, dtype=np.float64)
        object.__setattr__(self, "features", X)
        if X.ndim != 2 or X.shape[0] == 0:
            raise ValueError("features must be a non-empty 2-D matrix")
        if X.shape[0] != len(self.labels):
            raise ValueError("features and labels disagree on row count")

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def label_table(self) -> tuple[str, ...]:
        return tuple(sorted(set(self.labels)))

    def class_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for label in self.labels:
            counts[label] = counts.get(label, 0) + 1
        return counts

    def take(self, indices: np.ndarray) -> "LabeledDataset":
        return LabeledDataset(
            features=self.features[indices],
            labels=tuple(self.labels[i] for i in indices),
        )

    def require_finite(self) -> None:
        if not np.isfinite(self.features).all():
            raise NonFiniteFeature("feature matrix contains non-finite values")


def _class_indices(dataset: LabeledDataset, seed: int) -> dict[str, np.ndarray]:
    """Per-class row indices, each independently shuffled by the seed."""
    rng = np.random.default_rng(seed)
    out: dict[str, np.ndarray] = {}
    for label in dataset.label_table:
        idx = np.array([i for i, lab in enumerate(dataset.labels) if lab == label], dtype=np.int64)
        rng.shuffle(idx)
        out[label] = idx
    return out


def stratified_split(
    dataset: LabeledDataset, test_fraction: float = 0.2, seed: int = 0
) -> tuple[LabeledDataset, LabeledDataset]:
    """Disjoint, exhaustive train/test split with per-class proportions.

    Each class contributes round(count * test_fraction) test rows, clamped so
    both sides keep at least one row of the class.  Classes with fewer than
    two rows raise ClassTooSmall.
    """
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must lie strictly between 0 and 1")
    for label, count in dataset.class_counts().items():
        if count < 2:
            raise ClassTooSmall(f"class {label!r} has {count} row(s); need at least 2")
    test_idx: list[int] = []
    train_idx: list[int] = []
    for label, idx in _class_indices(dataset, seed).items():
        n_test = int(np.floor(len(idx) * test_fraction + 0.5))
        n_test = max(1, min(len(idx) - 1, n_test))
        test_idx.extend(idx[:n_test])
        train_idx.extend(idx[n_test:])
    return dataset.take(np.array(sorted(train_idx))), dataset.take(np.array(sorted(test_idx)))


def kfold(dataset: LabeledDataset, k: int = 5, seed: int = 0) -> list[tuple[LabeledDataset, LabeledDataset]]:
    """Stratified k folds: (train, validation) pairs covering every row once.

    Per-class fold sizes differ by at most one row.  Raises ClassTooSmall
    when any class has fewer rows than folds.
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    for label, count in dataset.class_counts().items():
        if count < k:
            raise ClassTooSmall(f"class {label!r} has {count} row(s); need at least {k}")
    assignments: dict[int, int] = {}
    for label, idx in _class_indices(dataset, seed).items():
        for pos, row in enumerate(idx):
            assignments[int(row)] = pos % k
    folds: list[tuple[LabeledDataset, LabeledDataset]] = []
    for fold in range(k):
        val = np.array(sorted(row for row, f in assignments.items() if f == fold))
        train = np.array(sorted(row for row, f in assignments.items() if f != fold))
        folds.append((dataset.take(train), dataset.take(val)))
    return folds
