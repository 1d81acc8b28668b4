"""The composed selector: features in, chosen solver out, optional solve."""

from __future__ import annotations

from ..core import Instance, SolveOutcome, SolverId
from ..features import FeatureVector, extract_features
from ..harness import instance_budget
from ..solvers import solve
from .models import TrainedModel, predict


def select_solver(model: TrainedModel, instance: Instance) -> tuple[SolverId, FeatureVector]:
    """Extract features and ask the model which portfolio member to run."""
    features = extract_features(instance)
    label = predict(model, features.as_tuple())
    return SolverId(label), features


def select_and_solve(
    model: TrainedModel,
    instance: Instance,
    budget_ms: int | None = None,
    seed: int = 0,
) -> tuple[SolverId, FeatureVector, SolveOutcome]:
    """Pick a solver for the instance and run it under the usual budget rules."""
    solver, features = select_solver(model, instance)
    budget = instance_budget(instance, override_ms=budget_ms)
    outcome = solve(instance, solver, budget, seed=seed)
    return solver, features, outcome
