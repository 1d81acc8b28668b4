"""Instance generator, benchmark grids, and budget allocation tests."""

from __future__ import annotations

import numpy as np
import pytest

from _helpers import gen
from greenjsp.core import DISTRIBUTIONS, validate_instance
from greenjsp.generation import (
    DESK_GRID,
    REFERENCE_GRID,
    BenchmarkGrid,
    BudgetPolicy,
    GeneratorConfig,
    UnknownCharacteristicValue,
    allocate_budget,
    budget_terms,
    build_speed_tables,
    enumerate_grid,
    generate_instance,
    mix64,
    read_grid_file,
    sample_base_tables,
    write_grid_file,
)


def config(j=3, m=3, rddd=0, speeds=1, dist="uniform", seed=0) -> GeneratorConfig:
    return GeneratorConfig(
        n_jobs=j, n_machines=m, rddd_level=rddd, n_speeds=speeds, distribution=dist, seed=seed
    )


class TestGridEnumeration:
    def test_reference_grid_size(self):
        assert len(enumerate_grid(REFERENCE_GRID)) == 9720

    def test_desk_grid_size(self):
        assert len(enumerate_grid(DESK_GRID)) == 1620

    def test_single_cell_grid(self):
        grid = BenchmarkGrid(
            jobs=(2,), machines=(2,), rddd=(0,), speeds=(1,),
            distributions=("uniform",), seeds_per_cell=1,
        )
        configs = enumerate_grid(grid)
        assert len(configs) == 1
        assert configs[0].n_jobs == 2

    def test_ids_are_unique(self):
        configs = enumerate_grid(DESK_GRID)
        assert len({c.instance_id for c in configs}) == len(configs)

    def test_master_seed_changes_replicate_seeds(self):
        a = enumerate_grid(DESK_GRID, master_seed=0)
        b = enumerate_grid(DESK_GRID, master_seed=1)
        assert [c.seed for c in a] != [c.seed for c in b]
        # Cell coordinates are unchanged; only the replicate seeds move.
        assert [(c.n_jobs, c.n_machines, c.rddd_level, c.n_speeds, c.distribution) for c in a] == [
            (c.n_jobs, c.n_machines, c.rddd_level, c.n_speeds, c.distribution) for c in b
        ]


class TestSampling:
    def test_uniform_draws_range_and_mean(self):
        draws: list[int] = []
        for seed in range(400):
            proc, _ = sample_base_tables(config(j=5, m=5, seed=seed))
            draws.extend(int(v) for v in proc.ravel())
        assert len(draws) == 10_000
        assert min(draws) >= 1 and max(draws) <= 99
        assert abs(float(np.mean(draws)) - 50.0) < 2.0

    def test_normal_draws_clipped(self):
        values: list[int] = []
        for seed in range(100):
            proc, energy = sample_base_tables(config(j=5, m=5, dist="normal", seed=seed))
            values.extend(int(v) for v in proc.ravel())
            values.extend(int(v) for v in energy.ravel())
        assert min(values) >= 1 and max(values) <= 99

    def test_exponential_draws_clipped(self):
        values: list[int] = []
        for seed in range(100):
            proc, energy = sample_base_tables(config(j=5, m=5, dist="exponential", seed=seed))
            values.extend(int(v) for v in proc.ravel())
            values.extend(int(v) for v in energy.ravel())
        assert min(values) >= 1 and max(values) <= 297

    def test_proc_and_energy_streams_are_independent(self):
        proc, energy = sample_base_tables(config(j=5, m=5, seed=0))
        assert not np.array_equal(proc, energy)


class TestSpeedTables:
    def test_three_level_example(self):
        proc, energy = build_speed_tables(
            np.array([[10]], dtype=np.int64), np.array([[4]], dtype=np.int64), 3
        )
        assert proc[0][0] == (10, 7, 5)
        assert energy[0][0] == (4, 9, 16)

    def test_single_speed_is_identity(self):
        base_p = np.array([[13, 2], [99, 1]], dtype=np.int64)
        base_e = np.array([[0, 7], [55, 3]], dtype=np.int64)
        proc, energy = build_speed_tables(base_p, base_e, 1)
        for j in range(2):
            for t in range(2):
                assert proc[j][t] == (int(base_p[j, t]),)
                assert energy[j][t] == (int(base_e[j, t]),)

    def test_monotone_over_random_tables(self):
        rng = np.random.default_rng(1)
        for _ in range(1000):
            base_p = rng.integers(1, 300, size=(1, 1)).astype(np.int64)
            base_e = rng.integers(0, 300, size=(1, 1)).astype(np.int64)
            n_speeds = int(rng.integers(1, 6))
            proc, energy = build_speed_tables(base_p, base_e, n_speeds)
            levels_p, levels_e = proc[0][0], energy[0][0]
            assert all(b <= a for a, b in zip(levels_p, levels_p[1:]))
            assert all(b >= a for a, b in zip(levels_e, levels_e[1:]))
            assert min(levels_p) >= 1


class TestWindows:
    def test_job_level_window_invariants(self):
        for seed in range(200):
            inst = gen(3, 3, rddd=1, speeds=2, dist=DISTRIBUTIONS[seed % 3], seed=seed)
            for j in range(inst.n_jobs):
                work = sum(inst.proc[j][t][0] for t in range(inst.n_machines))
                assert 0 <= inst.release[j] <= work // 2
                assert inst.release[j] + work <= inst.due[j]
                assert inst.due[j] <= inst.release[j] + int(np.ceil(1.5 * work))

    def test_task_level_window_invariants(self):
        checked = 0
        for seed in range(500):
            inst = gen(2 + seed % 3, 2 + (seed // 3) % 3, rddd=2, speeds=1 + seed % 2,
                       dist=DISTRIBUTIONS[seed % 3], seed=seed)
            for j in range(inst.n_jobs):
                rel, due = inst.release[j], inst.due[j]
                slowest = [inst.proc[j][t][0] for t in range(inst.n_machines)]
                assert all(r >= 0 for r in rel)
                assert all(a <= b for a, b in zip(rel, rel[1:]))
                assert all(a <= b for a, b in zip(due, due[1:]))
                for t in range(inst.n_machines):
                    assert rel[t] <= due[t]
                    assert due[t] - rel[t] >= slowest[t]
                assert due[-1] - rel[0] >= sum(slowest)
            checked += 1
        assert checked == 500

    def test_level_zero_has_no_windows(self):
        inst = gen(3, 3, rddd=0, seed=1)
        assert inst.release is None and inst.due is None


class TestGenerateInstance:
    def test_deterministic_per_config(self):
        cfg = config(j=4, m=3, rddd=2, speeds=3, dist="exponential", seed=17)
        assert generate_instance(cfg) == generate_instance(cfg)

    def test_distinct_seeds_differ(self):
        a = generate_instance(config(seed=0))
        b = generate_instance(config(seed=1))
        assert a.proc != b.proc

    def test_generated_instances_validate(self):
        for seed in range(60):
            cfg = config(
                j=1 + seed % 5, m=1 + (seed // 5) % 5, rddd=seed % 3,
                speeds=1 + seed % 3, dist=DISTRIBUTIONS[seed % 3], seed=seed,
            )
            assert validate_instance(generate_instance(cfg)) == []

    def test_id_encodes_configuration(self):
        inst = generate_instance(config(j=4, m=2, rddd=1, speeds=3, dist="normal", seed=9))
        assert inst.id == "J4_M2_R1_S3_normal_9"

    def test_routes_are_permutations(self):
        inst = gen(5, 5, seed=3)
        for route in inst.routes:
            assert sorted(route) == list(range(5))


class TestMix64:
    def test_deterministic_and_sensitive(self):
        assert mix64(1, 2, 3) == mix64(1, 2, 3)
        assert mix64(1, 2, 3) != mix64(1, 2, 4)
        assert mix64(0) != mix64(1)

    def test_fits_in_64_bits(self):
        for args in [(0,), (1, 2), (2**63, 17), (12345, 678, 901)]:
            assert 0 <= mix64(*args) < 2**64


class TestBudget:
    def test_minimum_corner(self):
        cfg = config(j=5, m=5, rddd=0, speeds=1)
        assert budget_terms(cfg) == (50.0, 50.0, 50.0, 50.0)
        assert allocate_budget(cfg) == 200

    def test_maximum_corner(self):
        cfg = config(j=100, m=100, rddd=2, speeds=5)
        assert budget_terms(cfg) == (75000.0, 75000.0, 75000.0, 75000.0)
        assert allocate_budget(cfg) == 300_000

    def test_interior_cell(self):
        cfg = config(j=20, m=10, rddd=1, speeds=3)
        terms = budget_terms(cfg)
        ratio = 75000.0 / 50.0
        assert terms == pytest.approx(
            (50 * ratio**0.4, 50 * ratio**0.2, 50 * ratio**0.5, 50 * ratio**0.5)
        )
        assert allocate_budget(cfg) == 5021

    def test_terms_bounded_and_monotone(self):
        for jobs in REFERENCE_GRID.jobs:
            for machines in REFERENCE_GRID.machines:
                for rddd in REFERENCE_GRID.rddd:
                    for speeds in REFERENCE_GRID.speeds:
                        terms = budget_terms(config(j=jobs, m=machines, rddd=rddd, speeds=speeds))
                        assert all(50.0 <= t <= 75000.0 for t in terms)
        along_jobs = [budget_terms(config(j=j))[0] for j in REFERENCE_GRID.jobs]
        assert along_jobs == sorted(along_jobs)

    def test_off_grid_clamps_to_nearest(self):
        near_five = allocate_budget(config(j=6, m=5, rddd=0, speeds=1))
        assert near_five == allocate_budget(config(j=5, m=5, rddd=0, speeds=1))

    def test_strict_rejects_off_grid(self):
        with pytest.raises(UnknownCharacteristicValue):
            allocate_budget(config(j=6), strict=True)

    def test_custom_policy_anchors(self):
        policy = BudgetPolicy(min_term_ms=10.0, max_term_ms=40.0)
        cfg = config(j=5, m=5, rddd=0, speeds=1)
        assert allocate_budget(cfg, policy=policy) == 40


class TestGridFiles:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "grid.txt"
        write_grid_file(DESK_GRID, path)
        assert read_grid_file(path) == DESK_GRID

    def test_comments_and_blank_lines_ignored(self, tmp_path):
        path = tmp_path / "grid.txt"
        path.write_text(
            "# a comment\n\njobs = 2,3\nmachines = 2\nrddd = 0\nspeeds = 1\n"
            "distributions = uniform\nseeds_per_cell = 2\n",
            encoding="utf-8",
        )
        grid = read_grid_file(path)
        assert grid.jobs == (2, 3)
        assert len(enumerate_grid(grid)) == 4

    def test_missing_key_rejected(self, tmp_path):
        path = tmp_path / "grid.txt"
        path.write_text("jobs = 2\n", encoding="utf-8")
        with pytest.raises(ValueError, match="missing keys"):
            read_grid_file(path)

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "grid.txt"
        write_grid_file(DESK_GRID, path)
        with path.open("a", encoding="utf-8") as fh:
            fh.write("color = blue\n")
        with pytest.raises(ValueError, match="unknown keys"):
            read_grid_file(path)

    def test_non_integer_values_rejected(self, tmp_path):
        path = tmp_path / "grid.txt"
        path.write_text(
            "jobs = two\nmachines = 2\nrddd = 0\nspeeds = 1\n"
            "distributions = uniform\nseeds_per_cell = 1\n",
            encoding="utf-8",
        )
        with pytest.raises(ValueError, match="must list integers"):
            read_grid_file(path)
