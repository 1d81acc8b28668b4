"""From-scratch classifier suite and the solver-selection layer."""

from .datasets import ClassTooSmall, LabeledDataset, NonFiniteFeature, kfold, stratified_split
from .metrics import (
    CVResult,
    EvalReport,
    cross_validate,
    evaluate,
    majority_accuracy,
    report_from_confusion,
    sweep,
    write_sweep_csv,
)
from .models import (
    DEFAULT_HYPERPARAMS,
    FAMILIES,
    DimensionMismatch,
    ModelSpec,
    Standardizer,
    TrainedModel,
    UnknownFamily,
    fit,
    load_model,
    predict,
    predict_many,
    save_model,
)
from .selector import select_and_solve, select_solver

__all__ = [
    "CVResult",
    "ClassTooSmall",
    "DEFAULT_HYPERPARAMS",
    "DimensionMismatch",
    "EvalReport",
    "FAMILIES",
    "LabeledDataset",
    "ModelSpec",
    "NonFiniteFeature",
    "Standardizer",
    "TrainedModel",
    "UnknownFamily",
    "cross_validate",
    "evaluate",
    "fit",
    "kfold",
    "load_model",
    "majority_accuracy",
    "predict",
    "predict_many",
    "report_from_confusion",
    "save_model",
    "select_and_solve",
    "select_solver",
    "stratified_split",
    "sweep",
    "write_sweep_csv",
]
