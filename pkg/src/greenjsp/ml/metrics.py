"""Evaluation: confusion matrices, per-class and macro metrics, CV, sweep.

Precision of a class nobody predicted is defined as 0 and the class is named
in the report, so macro averages stay total functions.  Cross-validation and
the family sweep are deterministic in (data, seed) and the sweep orders
families by mean validation accuracy.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .datasets import LabeledDataset, kfold
from .models import FAMILIES, ModelSpec, TrainedModel, fit, predict_many


@dataclass(frozen=True, slots=True)
class EvalReport:
    labels: tuple[str, ...]
    confusion: tuple[tuple[int, ...], ...]
    accuracy: float
    precision: tuple[float, ...]
    recall: tuple[float, ...]
    macro_precision: float
    macro_recall: float
    unpredicted_labels: tuple[str, ...]


@dataclass(frozen=True, slots=True)
class CVResult:
    family: str
    fold_accuracies: tuple[float, ...]
    mean_accuracy: float
    std_accuracy: float


def report_from_confusion(labels: Sequence[str], confusion: Sequence[Sequence[int]]) -> EvalReport:
    """All metrics from a square confusion matrix (rows true, columns predicted)."""
    matrix = np.asarray(confusion, dtype=np.int64)
    k = len(labels)
    if matrix.shape != (k, k):
        raise ValueError(f"confusion matrix must be {k}x{k} for {k} labels")
    total = int(matrix.sum())
    if total == 0:
        raise ValueError("confusion matrix is empty")
    correct = int(np.trace(matrix))
    col_sums = matrix.sum(axis=0)
    row_sums = matrix.sum(axis=1)
    precision = [
        float(matrix[c, c] / col_sums[c]) if col_sums[c] > 0 else 0.0 for c in range(k)
    ]
    recall = [
        float(matrix[c, c] / row_sums[c]) if row_sums[c] > 0 else 0.0 for c in range(k)
    ]
    return EvalReport(
        labels=tuple(labels),
        confusion=tuple(tuple(int(v) for v in row) for row in matrix),
        accuracy=correct / total,
        precision=tuple(precision),
        recall=tuple(recall),
        macro_precision=float(sum(precision) / k),
        macro_recall=float(sum(recall) / k),
        unpredicted_labels=tuple(labels[c] for c in range(k) if col_sums[c] == 0),
    )


def evaluate(model: TrainedModel, dataset: LabeledDataset) -> EvalReport:
    """Score a model on labeled data; rows with labels the model never saw are errors."""
    unknown = set(dataset.labels) - set(model.labels)
    if unknown:
        raise ValueError(f"dataset contains labels the model was not trained on: {sorted(unknown)}")
    predicted = predict_many(model, dataset.features)
    code = {label: i for i, label in enumerate(model.labels)}
    k = len(model.labels)
    matrix = np.zeros((k, k), dtype=np.int64)
    for true, pred in zip(dataset.labels, predicted):
        matrix[code[true], code[pred]] += 1
    return report_from_confusion(model.labels, matrix)


def majority_accuracy(train: LabeledDataset, test: LabeledDataset) -> float:
    """Accuracy of always answering the training majority class (ties: label order)."""
    counts = train.class_counts()
    majority = max(sorted(counts), key=lambda label: counts[label])
    return sum(1 for label in test.labels if label == majority) / test.n_rows


def cross_validate(spec: ModelSpec, dataset: LabeledDataset, k: int = 5, seed: int = 0) -> CVResult:
    """Stratified k-fold validation accuracy of one family."""
    accuracies: list[float] = []
    for train, val in kfold(dataset, k=k, seed=seed):
        model = fit(spec, train)
        report = evaluate(model, val)
        accuracies.append(report.accuracy)
    mean = sum(accuracies) / len(accuracies)
    std = float(np.sqrt(sum((a - mean) ** 2 for a in accuracies) / len(accuracies)))
    return CVResult(
        family=spec.family,
        fold_accuracies=tuple(accuracies),
        mean_accuracy=mean,
        std_accuracy=std,
    )


def sweep(
    dataset: LabeledDataset,
    k: int = 5,
    seed: int = 0,
    families: Sequence[str] = FAMILIES,
) -> list[CVResult]:
    """Cross-validate every family; sorted by mean accuracy (desc), then name."""
    results = [cross_validate(ModelSpec(family=family, seed=seed), dataset, k=k, seed=seed) for family in families]
    results.sort(key=lambda r: (-r.mean_accuracy, r.family))
    return results


SWEEP_HEADER = ("family", "mean_accuracy", "std_accuracy", "fold_accuracies")


def write_sweep_csv(results: Sequence[CVResult], path: str | Path) -> None:
    from ..harness import fmt_real

    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(SWEEP_HEADER)
        for r in results:
            writer.writerow([
                r.family,
                fmt_real(r.mean_accuracy),
                fmt_real(r.std_accuracy),
                " ".join(fmt_real(a) for a in r.fold_accuracies),
            ])
