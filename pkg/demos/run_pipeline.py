"""End-to-end experiment: generate, solve, label, and train, all on disk.

Run with `python demos/run_pipeline.py`. Builds a small corpus in a
temporary folder, runs the portfolio over it resumably, writes every file
the full-scale experiment writes, and trains a model on the result.
"""

from __future__ import annotations

import tempfile
from pathlib import Path

from greenjsp.generation import BenchmarkGrid, enumerate_grid
from greenjsp.harness import (
    features_for_dir,
    generate_to_dir,
    label_rows,
    run_matrix,
    summarize_means,
    summarize_status,
    to_labeled,
    write_dataset,
    write_means_csv,
    write_results,
    write_status_csv,
)
from greenjsp.ml.metrics import evaluate
from greenjsp.ml.models import ModelSpec, fit

root = Path(tempfile.mkdtemp(prefix="greenjsp_pipeline_"))

# 1. A small corpus: 3x3 instances across window levels, speeds, and
#    distributions, two seeds per cell = 36 instances.
grid = BenchmarkGrid(
    jobs=(3,),
    machines=(3,),
    rddd=(0, 1, 2),
    speeds=(1, 2),
    distributions=("uniform", "normal", "exponential"),
    seeds_per_cell=2,
)
paths = generate_to_dir(enumerate_grid(grid, master_seed=0), root / "instances")
print(f"generated {len(paths)} instances under {root / 'instances'}")

# 2. Run all three solvers on every instance. The journal makes this
#    resumable: killing the process and rerunning reuses finished cells.
journal = root / "runs.jsonl"
rows = run_matrix(
    root / "instances", budget_override_ms=150, journal_path=journal, base_seed=0
)
print(f"ran matrix: {len(rows)} rows x {len(rows[0].cells)} solvers, journal at {journal}")

rerun = run_matrix(
    root / "instances", budget_override_ms=150, journal_path=journal, base_seed=0
)
assert len(rerun) == len(rows)
print("rerun with a warm journal did no new solver work")

# 3. Persist the outcome tables.
write_results(rows, root / "results.csv")
write_status_csv(summarize_status(rows), root / "status_counts.csv")
write_means_csv(summarize_means(rows), root / "means_by_jm.csv")
print(f"wrote results.csv, status_counts.csv, means_by_jm.csv under {root}")
print("status counts:")
for solver, counts in summarize_status(rows).items():
    rendered = " ".join(f"{status.value}={n}" for status, n in counts.items())
    print(f"  {solver.value:3s} {rendered}")

# 4. Label each row with its winning solver and attach features.
labeled, dropped = label_rows(rows, features_for_dir(root / "instances"))
write_dataset(labeled, root / "dataset.csv")
winners = {}
for row in labeled:
    winners[row.label.value] = winners.get(row.label.value, 0) + 1
print(f"\nlabeled {len(labeled)} rows (dropped {dropped}); winners: {winners}")

# 5. Train a selector model. With only 36 rows this is a smoke test, so we
#    score it on its own training data; the real experiment holds data out.
dataset = to_labeled(labeled)
model = fit(ModelSpec(family="gradient_boosted_trees", seed=0), dataset)
report = evaluate(model, dataset)
print(f"resubstitution accuracy: {report.accuracy:.3f}")
print(f"confusion (labels {report.labels}):")
for label, row in zip(report.labels, report.confusion):
    print(f"  {label:3s} {list(row)}")
