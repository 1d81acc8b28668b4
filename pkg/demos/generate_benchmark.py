"""Walk through the instance generator: grids, seeded sampling, and budgets.

Run with `python demos/generate_benchmark.py`. Writes a small instance
directory plus a grid file into a temporary folder and prints what happened.
"""

from __future__ import annotations

import tempfile
from pathlib import Path

from greenjsp.core import load_instance
from greenjsp.generation import (
    DESK_GRID,
    REFERENCE_GRID,
    BenchmarkGrid,
    allocate_budget,
    budget_terms,
    enumerate_grid,
    write_grid_file,
)
from greenjsp.harness import generate_to_dir

out_dir = Path(tempfile.mkdtemp(prefix="greenjsp_demo_"))

# A benchmark grid is the cross product of characteristic axes. The full
# reference grid is what the budget model is anchored to; the desk grid is
# the same shape shrunk to laptop-friendly sizes.
print(f"reference grid: {len(enumerate_grid(REFERENCE_GRID))} configurations")
print(f"desk grid:      {len(enumerate_grid(DESK_GRID))} configurations")

# Enumeration is pure metadata: each entry is a GeneratorConfig whose id
# encodes the cell and the per-cell seed derived from the master seed.
demo_grid = BenchmarkGrid(
    jobs=(3, 5),
    machines=(3,),
    rddd=(0, 1, 2),
    speeds=(1, 3),
    distributions=("uniform", "normal", "exponential"),
    seeds_per_cell=1,
)
configs = enumerate_grid(demo_grid, master_seed=42)
print(f"\ndemo grid: {len(configs)} configs, first ids:")
for config in configs[:4]:
    print(f"  {config.instance_id}")

# Changing the master seed changes the sampled seeds but not the grid cells.
reseeded = enumerate_grid(demo_grid, master_seed=7)
assert [c.n_jobs for c in reseeded] == [c.n_jobs for c in configs]
assert [c.seed for c in reseeded] != [c.seed for c in configs]

# Materialize instance files. Generation is deterministic per config, so a
# rerun writes byte-identical files.
paths = generate_to_dir(configs, out_dir / "instances")
print(f"\nwrote {len(paths)} instance files under {out_dir / 'instances'}")

instance = load_instance(paths[0])
print(f"first instance {instance.id}:")
print(f"  routes[0] = {instance.routes[0]}")
print(f"  proc[0][0] per speed = {instance.proc[0][0]}")
print(f"  energy[0][0] per speed = {instance.energy[0][0]}")

# Each configuration earns a time budget from its position on the reference
# grid: four geometric terms (jobs, machines, windows, speeds), each between
# 50 ms and 75 s, summed. Harder cells get more time.
print("\nbudgets:")
for config in configs[:6]:
    terms = budget_terms(config)
    total = allocate_budget(config)
    rendered = " + ".join(f"{t:.0f}" for t in terms)
    print(f"  {config.instance_id:32s} {rendered} = {total} ms")

# Grids round-trip through a plain text file the CLI can read back.
write_grid_file(demo_grid, out_dir / "grid.txt")
print(f"\ngrid file at {out_dir / 'grid.txt'}:")
print((out_dir / "grid.txt").read_text(), end="")
