"""Session fixtures: the desk-scale experiment corpus and a brute-force oracle set.

The desk fixtures run the full portfolio over the desk benchmark grid once per
session (serial, capped budgets) and are shared by the acceptance tests.  The
oracle set is a 50-instance mix small enough for exhaustive search.
"""

from __future__ import annotations

import pytest

from greenjsp.core import DISTRIBUTIONS, Instance, ObjectiveBreakdown
from greenjsp.generation import DESK_GRID, GeneratorConfig, enumerate_grid, generate_instance
from greenjsp.harness import (
    DatasetRow,
    ResultRow,
    features_for_dir,
    generate_to_dir,
    label_rows,
    run_matrix,
)
from greenjsp.solvers import brute_force_optimum

DESK_MASTER_SEED = 0
DESK_BUDGET_CAP_MS = 500

ORACLE_SIZES = ((2, 2), (2, 3), (3, 2), (3, 3))
ORACLE_VARIANTS = tuple(
    (rddd, speeds, dist)
    for rddd in (0, 1, 2)
    for speeds in (1, 2)
    for dist in DISTRIBUTIONS
)


def oracle_configs(count: int = 50) -> list[GeneratorConfig]:
    """A deterministic mix of exhaustively solvable configurations."""
    configs = []
    for i in range(count):
        n_jobs, n_machines = ORACLE_SIZES[i % len(ORACLE_SIZES)]
        rddd, speeds, dist = ORACLE_VARIANTS[i % len(ORACLE_VARIANTS)]
        configs.append(
            GeneratorConfig(
                n_jobs=n_jobs,
                n_machines=n_machines,
                rddd_level=rddd,
                n_speeds=speeds,
                distribution=dist,
                seed=i,
            )
        )
    return configs


@pytest.fixture(scope="session")
def oracle_set() -> list[tuple[Instance, ObjectiveBreakdown]]:
    """Fifty small instances paired with their exhaustive optima."""
    pairs = []
    for config in oracle_configs():
        instance = generate_instance(config)
        _, best = brute_force_optimum(instance)
        pairs.append((instance, best))
    return pairs


@pytest.fixture(scope="session")
def desk_dir(tmp_path_factory: pytest.TempPathFactory):
    """Directory holding every instance of the desk benchmark grid."""
    out = tmp_path_factory.mktemp("desk_instances")
    generate_to_dir(enumerate_grid(DESK_GRID, master_seed=DESK_MASTER_SEED), out)
    return out


@pytest.fixture(scope="session")
def desk_rows(desk_dir, tmp_path_factory: pytest.TempPathFactory) -> list[ResultRow]:
    """Full portfolio outcomes over the desk grid (the expensive fixture)."""
    journal = tmp_path_factory.mktemp("desk_journal") / "runs.jsonl"
    return run_matrix(
        desk_dir,
        budget_cap_ms=DESK_BUDGET_CAP_MS,
        journal_path=journal,
        base_seed=DESK_MASTER_SEED,
    )


@pytest.fixture(scope="session")
def desk_labeled(desk_dir, desk_rows) -> tuple[list[DatasetRow], int]:
    """Labeled dataset rows built from the desk run, plus the dropped count."""
    features = features_for_dir(desk_dir)
    return label_rows(desk_rows, features)
