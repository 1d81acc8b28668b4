"""Train a selector and let it choose solvers for instances it never saw.

Run with `python demos/pick_solver.py`. Builds a training corpus, fits the
classifier, then compares its per-instance picks against running every
portfolio member on fresh instances.
"""

from __future__ import annotations

import tempfile
from pathlib import Path

from greenjsp.generation import BenchmarkGrid, GeneratorConfig, enumerate_grid, generate_instance
from greenjsp.harness import features_for_dir, generate_to_dir, label_rows, run_matrix, to_labeled
from greenjsp.ml.models import ModelSpec, fit
from greenjsp.ml.selector import select_and_solve, select_solver
from greenjsp.solvers import SOLVER_ORDER, solve

root = Path(tempfile.mkdtemp(prefix="greenjsp_selector_"))

# Training corpus: 54 small instances across window levels and speeds.
grid = BenchmarkGrid(
    jobs=(3,),
    machines=(3, 4),
    rddd=(0, 1, 2),
    speeds=(1, 2),
    distributions=("uniform", "normal", "exponential"),
    seeds_per_cell=2,
)
generate_to_dir(enumerate_grid(grid, master_seed=0), root / "instances")
rows = run_matrix(
    root / "instances",
    budget_override_ms=150,
    journal_path=root / "runs.jsonl",
    base_seed=0,
)
labeled, _ = label_rows(rows, features_for_dir(root / "instances"))
model = fit(ModelSpec(family="gradient_boosted_trees", seed=0), to_labeled(labeled))
print(f"trained on {len(labeled)} labeled rows")

# Fresh instances from grid cells the model has seen the shape of but with
# unseen seeds (different master seed).
print("\nper-instance picks vs the whole portfolio (150 ms budget):")
total_chosen = 0.0
total_best = 0.0
for seed in range(6):
    instance = generate_instance(
        GeneratorConfig(
            n_jobs=3,
            n_machines=3 + seed % 2,
            rddd_level=seed % 3,
            n_speeds=1 + seed % 2,
            distribution=("uniform", "normal", "exponential")[seed % 3],
            seed=1000 + seed,
        )
    )
    choice, features = select_solver(model, instance)
    outcomes = {s: solve(instance, s, budget_ms=150, seed=0) for s in SOLVER_ORDER}
    values = {s.value: o.objective.scalarized for s, o in outcomes.items()}
    best = min(values.values())
    chosen = values[choice.value]
    total_chosen += chosen
    total_best += best
    flag = "=" if abs(chosen - best) <= 1e-12 else " "
    print(f"  {instance.id:34s} pick={choice.value:3s} value={chosen:.4f} "
          f"best={best:.4f} {flag}")

print(f"\nmean objective: picked={total_chosen / 6:.4f} virtual-best={total_best / 6:.4f}")

# select_and_solve wraps the whole thing: features, prediction, budget, run.
instance = generate_instance(
    GeneratorConfig(
        n_jobs=4, n_machines=4, rddd_level=2, n_speeds=2, distribution="uniform", seed=77
    )
)
solver, _, outcome = select_and_solve(model, instance, budget_ms=200, seed=0)
print(f"\nselect_and_solve on {instance.id}: ran {solver.value}, "
      f"status={outcome.status.value}, value={outcome.objective.scalarized:.4f}")
