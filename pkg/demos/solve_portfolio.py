"""Run the three portfolio solvers on one instance and compare their answers.

Run with `python demos/solve_portfolio.py`. Shows statuses, objectives,
incumbent traces, and the exhaustive optimum for a small instance.
"""

from __future__ import annotations

from greenjsp.core import check_feasibility, normalized_objective
from greenjsp.generation import GeneratorConfig, generate_instance
from greenjsp.solvers import SOLVER_ORDER, SearchStats, brute_force_optimum, construct, solve

# A 3x3 instance with two speed levels: small enough to enumerate, big
# enough that the searches have real work to do.
instance = generate_instance(
    GeneratorConfig(
        n_jobs=3, n_machines=3, rddd_level=2, n_speeds=2, distribution="uniform", seed=5
    )
)
print(f"instance {instance.id}: {instance.n_tasks} tasks, {instance.n_speeds} speeds")

# The deterministic construction everybody starts from.
seed_schedule = construct(instance)
seed_value = normalized_objective(instance, seed_schedule).scalarized
print(f"construction value: {seed_value:.6f}")

# The exhaustive oracle (only viable at this size).
_, optimum = brute_force_optimum(instance)
print(f"brute-force optimum: {optimum.scalarized:.6f}\n")

# Each solver gets the same 500 ms budget and reports an anytime outcome:
# the best schedule found, a status, and how long it actually took.
for solver in SOLVER_ORDER:
    stats = SearchStats()
    outcome = solve(instance, solver, budget_ms=500, seed=0, stats=stats)
    assert outcome.best is not None
    assert check_feasibility(instance, outcome.best) == []
    gap = outcome.objective.scalarized - optimum.scalarized
    trace = " -> ".join(f"{value:.4f}" for _, value in stats.incumbents[:5])
    if len(stats.incumbents) > 5:
        trace += " -> ..."
    print(f"{solver.value:3s}  status={outcome.status.value:9s} "
          f"value={outcome.objective.scalarized:.6f} gap={gap:+.2e} "
          f"time={outcome.solve_time_ms} ms")
    print(f"     incumbents: {trace}")

# The objective combines normalized makespan, energy, and tardiness. The
# breakdown shows where a schedule spends its badness.
best = solve(instance, "bnb", budget_ms=500, seed=0)
b = best.objective
print(f"\nbest breakdown: makespan={b.f_makespan} energy={b.f_energy} "
      f"tardiness={b.f_tardiness} scalarized={b.scalarized:.6f}")
