"""Seeded benchmark generation and per-instance time budgets.

A benchmark grid is the cross product of six axes (jobs, machines, rddd
level, speed levels, sampling distribution, replicate seeds).  Every sampled
quantity flows from one master seed through named sub-streams, so a grid is
reproducible byte for byte.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import (
    DISTRIBUTIONS,
    Instance,
    InvalidInstance,
    RdddLevel,
    freeze2,
    freeze3,
    round_half_up,
    validate_instance,
)

_MASK64 = (1 << 64) - 1

# Stream tags keep the independent sampling streams of one instance apart.
_TAG_ROUTES = 1
_TAG_PROC = 2
_TAG_ENERGY = 3
_TAG_WINDOWS = 4


class UnknownCharacteristicValue(ValueError):
    """A budget characteristic falls outside the reference grid in strict mode."""


def mix64(*values: int) -> int:
    """Mix integers into one 64-bit seed (splitmix64 finalizer per input)."""
    h = 0x9E3779B97F4A7C15
    for v in values:
        h = (h + (int(v) & _MASK64)) & _MASK64
        h ^= h >> 30
        h = (h * 0xBF58476D1CE4E5B9) & _MASK64
        h ^= h >> 27
        h = (h * 0x94D049BB133111EB) & _MASK64
        h ^= h >> 31
    return h


@dataclass(frozen=True, slots=True)
class GeneratorConfig:
    """Everything needed to sample one instance deterministically."""

    n_jobs: int
    n_machines: int
    rddd_level: int
    n_speeds: int
    distribution: str
    seed: int

    @property
    def instance_id(self) -> str:
        return (
            f"J{self.n_jobs}_M{self.n_machines}_R{self.rddd_level}"
            f"_S{self.n_speeds}_{self.distribution}_{self.seed}"
        )


@dataclass(frozen=True, slots=True)
class BenchmarkGrid:
    jobs: tuple[int, ...]
    machines: tuple[int, ...]
    rddd: tuple[int, ...]
    speeds: tuple[int, ...]
    distributions: tuple[str, ...]
    seeds_per_cell: int

    def __post_init__(self) -> None:
        for name, axis in (("jobs", self.jobs), ("machines", self.machines), ("rddd", self.rddd), ("speeds", self.speeds)):
            if not axis or any(v < 0 for v in axis) or list(axis) != sorted(set(axis)):
                raise ValueError(f"grid axis {name} must be non-empty, sorted, and duplicate-free")
        if any(d not in DISTRIBUTIONS for d in self.distributions) or not self.distributions:
            raise ValueError(f"grid distributions must come from {DISTRIBUTIONS}")
        if self.seeds_per_cell < 1:
            raise ValueError("seeds_per_cell must be at least 1")

    @property
    def size(self) -> int:
        return (
            len(self.jobs) * len(self.machines) * len(self.rddd)
            * len(self.speeds) * len(self.distributions) * self.seeds_per_cell
        )


REFERENCE_GRID = BenchmarkGrid(
    jobs=(5, 10, 20, 25, 50, 100),
    machines=(5, 10, 20, 25, 50, 100),
    rddd=(0, 1, 2),
    speeds=(1, 3, 5),
    distributions=DISTRIBUTIONS,
    seeds_per_cell=10,
)

DESK_GRID = BenchmarkGrid(
    jobs=(3, 5, 8),
    machines=(3, 5, 8),
    rddd=(0, 1, 2),
    speeds=(1, 3),
    distributions=DISTRIBUTIONS,
    seeds_per_cell=10,
)


@dataclass(frozen=True, slots=True)
class BudgetPolicy:
    """Anchors of the per-characteristic budget interpolation."""

    min_term_ms: float = 50.0
    max_term_ms: float = 75_000.0

    def __post_init__(self) -> None:
        if not 0 < self.min_term_ms <= self.max_term_ms:
            raise ValueError("budget anchors must satisfy 0 < min <= max")


def enumerate_grid(grid: BenchmarkGrid, master_seed: int = 0) -> list[GeneratorConfig]:
    """List every cell of the grid with replicate seeds derived from the master seed.

    Order is the nested product (jobs, machines, rddd, speeds, distribution,
    replicate), which fixes file listings and downstream row order.
    """
    configs: list[GeneratorConfig] = []
    for nj in grid.jobs:
        for nm in grid.machines:
            for lvl in grid.rddd:
                for ns in grid.speeds:
                    for di, dist in enumerate(grid.distributions):
                        for rep in range(grid.seeds_per_cell):
                            seed = mix64(master_seed, nj, nm, lvl, ns, di, rep)
                            configs.append(
                                GeneratorConfig(
                                    n_jobs=nj, n_machines=nm, rddd_level=lvl,
                                    n_speeds=ns, distribution=dist, seed=seed,
                                )
                            )
    return configs


def _sample_table(rng: np.random.Generator, distribution: str, shape: tuple[int, int]) -> np.ndarray:
    if distribution == "uniform":
        return rng.integers(1, 100, size=shape).astype(np.int64)
    if distribution == "normal":
        draws = np.floor(rng.normal(50.0, 15.0, size=shape) + 0.5)
        return np.clip(draws, 1, 99).astype(np.int64)
    if distribution == "exponential":
        draws = np.floor(rng.exponential(50.0, size=shape) + 0.5)
        return np.clip(draws, 1, 297).astype(np.int64)
    raise ValueError(f"unknown distribution {distribution!r}")


def sample_base_tables(config: GeneratorConfig) -> tuple[np.ndarray, np.ndarray]:
    """Draw base processing-time and energy tables on independent streams."""
    shape = (config.n_jobs, config.n_machines)
    rng_p = np.random.default_rng(mix64(config.seed, _TAG_PROC))
    rng_e = np.random.default_rng(mix64(config.seed, _TAG_ENERGY))
    return _sample_table(rng_p, config.distribution, shape), _sample_table(rng_e, config.distribution, shape)


def build_speed_tables(
    base_proc: np.ndarray, base_energy: np.ndarray, n_speeds: int
) -> tuple[tuple[tuple[tuple[int, ...], ...], ...], tuple[tuple[tuple[int, ...], ...], ...]]:
    """Expand base tables over speed levels with multiplier v_s = 1 + s/2.

    Durations shrink as round(base / v_s) floored at 1; energies grow as
    round(base * v_s^2).  A repair pass enforces monotonicity exactly even
    where rounding would produce a local violation.
    """
    proc: list[list[list[int]]] = []
    energy: list[list[list[int]]] = []
    for j in range(base_proc.shape[0]):
        p_row: list[list[int]] = []
        e_row: list[list[int]] = []
        for t in range(base_proc.shape[1]):
            p_levels: list[int] = []
            e_levels: list[int] = []
            for s in range(n_speeds):
                v = 1.0 + 0.5 * s
                p = max(1, round_half_up(int(base_proc[j, t]) / v))
                e = round_half_up(int(base_energy[j, t]) * v * v)
                if p_levels:
                    p = min(p, p_levels[-1])
                    e = max(e, e_levels[-1])
                p_levels.append(p)
                e_levels.append(e)
            p_row.append(p_levels)
            e_row.append(e_levels)
        proc.append(p_row)
        energy.append(e_row)
    return freeze3(proc), freeze3(energy)


def _job_window(total_work: int, release: int, tau: float) -> tuple[int, int]:
    """Due date from a job's release, slowest-speed workload, and slack factor."""
    return release, release + int(np.ceil(tau * total_work))


def _slice_job_window(release: int, due: int, durations: Sequence[int], fastest: Sequence[int]) -> tuple[list[int], list[int]]:
    """Split a job window into per-task windows proportional to workloads.

    Boundaries floor on the release side and ceil on the due side, so task
    windows are monotone along the route, sit inside the job window, and are
    at least as long as the task's slowest-speed duration.
    """
    total = sum(durations)
    length = due - release
    rel: list[int] = []
    dues: list[int] = []
    cum = 0
    for d, fast in zip(durations, fastest):
        a = release + (length * cum) // total
        cum += d
        b = release + -((-length * cum) // total)
        if b - a < fast:
            a = max(0, b - fast)
        rel.append(a)
        dues.append(b)
    return rel, dues


def generate_windows(
    proc: Sequence[Sequence[Sequence[int]]], rddd_level: int, seed: int
) -> tuple[tuple, tuple] | None:
    """Sample release/due data for the requested rddd level.

    Level 0 has none.  Level 1 draws a per-job release in [0, W/2] and a due
    date release + ceil(tau*W) with tau ~ U[1, 1.5], W the slowest-speed
    workload.  Level 2 slices each job window proportionally into per-task
    windows.
    """
    if rddd_level == RdddLevel.NONE:
        return None
    rng = np.random.default_rng(mix64(seed, _TAG_WINDOWS))
    releases: list = []
    dues: list = []
    for j in range(len(proc)):
        durations = [row[0] for row in proc[j]]
        fastest = [min(row) for row in proc[j]]
        work = sum(durations)
        rd = int(rng.integers(0, work // 2 + 1))
        tau = float(rng.uniform(1.0, 1.5))
        rel_j, due_j = _job_window(work, rd, tau)
        if rddd_level == RdddLevel.JOB:
            releases.append(rel_j)
            dues.append(due_j)
        else:
            rel_t, due_t = _slice_job_window(rel_j, due_j, durations, fastest)
            releases.append(rel_t)
            dues.append(due_t)
    if rddd_level == RdddLevel.JOB:
        return tuple(releases), tuple(dues)
    return freeze2(releases), freeze2(dues)


def generate_instance(config: GeneratorConfig) -> Instance:
    """Sample one full instance from its config, validated before return."""
    if config.distribution not in DISTRIBUTIONS:
        raise ValueError(f"unknown distribution {config.distribution!r}")
    if config.rddd_level not in (0, 1, 2):
        raise ValueError(f"unknown rddd level {config.rddd_level!r}")
    if min(config.n_jobs, config.n_machines, config.n_speeds) < 1:
        raise ValueError("jobs, machines, and speeds must be at least 1")
    rng_routes = np.random.default_rng(mix64(config.seed, _TAG_ROUTES))
    routes = freeze2([rng_routes.permutation(config.n_machines) for _ in range(config.n_jobs)])
    base_p, base_e = sample_base_tables(config)
    proc, energy = build_speed_tables(base_p, base_e, config.n_speeds)
    windows = generate_windows(proc, config.rddd_level, config.seed)
    release, due = windows if windows is not None else (None, None)
    instance = Instance(
        id=config.instance_id,
        n_jobs=config.n_jobs,
        n_machines=config.n_machines,
        n_speeds=config.n_speeds,
        rddd_level=config.rddd_level,
        distribution=config.distribution,
        seed=config.seed,
        routes=routes,
        proc=proc,
        energy=energy,
        release=release,
        due=due,
    )
    problems = validate_instance(instance)
    if problems:
        raise InvalidInstance("; ".join(problems))
    return instance


def _rank(value: int, axis: tuple[int, ...], strict: bool, name: str) -> float:
    if len(axis) == 1:
        return 0.0
    if value in axis:
        return axis.index(value) / (len(axis) - 1)
    if strict:
        raise UnknownCharacteristicValue(f"{name}={value} is not on the reference grid {axis}")
    nearest = min(axis, key=lambda g: (abs(g - value), g))
    return axis.index(nearest) / (len(axis) - 1)


def budget_terms(
    config: GeneratorConfig,
    grid: BenchmarkGrid = REFERENCE_GRID,
    policy: BudgetPolicy = BudgetPolicy(),
    strict: bool = False,
) -> tuple[float, float, float, float]:
    """Per-characteristic budget contributions (jobs, machines, rddd, speeds).

    Each characteristic contributes min * (max/min)**r where r is its rank
    within the grid axis scaled to [0, 1]; contributions therefore
    interpolate geometrically between the anchors.  Off-grid values clamp to
    the nearest axis element unless strict is set.
    """
    ranks = (
        _rank(config.n_jobs, grid.jobs, strict, "jobs"),
        _rank(config.n_machines, grid.machines, strict, "machines"),
        _rank(config.rddd_level, grid.rddd, strict, "rddd"),
        _rank(config.n_speeds, grid.speeds, strict, "speeds"),
    )
    ratio = policy.max_term_ms / policy.min_term_ms
    terms = tuple(policy.min_term_ms * ratio**r for r in ranks)
    return terms  # type: ignore[return-value]


def allocate_budget(
    config: GeneratorConfig,
    grid: BenchmarkGrid = REFERENCE_GRID,
    policy: BudgetPolicy = BudgetPolicy(),
    strict: bool = False,
) -> int:
    """Per-instance time budget in ms: the four characteristic terms summed.

    The total spans [4*min, 4*max] over the reference grid.
    """
    return round_half_up(sum(budget_terms(config, grid, policy, strict)))


def write_grid_file(grid: BenchmarkGrid, path: str | Path) -> None:
    """Write a grid as the plain key = value text format the CLI reads."""
    lines = [
        "# benchmark grid axes",
        "jobs = " + ",".join(str(v) for v in grid.jobs),
        "machines = " + ",".join(str(v) for v in grid.machines),
        "rddd = " + ",".join(str(v) for v in grid.rddd),
        "speeds = " + ",".join(str(v) for v in grid.speeds),
        "distributions = " + ",".join(grid.distributions),
        f"seeds_per_cell = {grid.seeds_per_cell}",
    ]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_grid_file(path: str | Path) -> BenchmarkGrid:
    """Parse the plain-text grid format; unknown or missing keys are errors."""
    fields: dict[str, str] = {}
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"grid file line is not 'key = values': {line!r}")
        key, _, value = line.partition("=")
        fields[key.strip()] = value.strip()
    required = {"jobs", "machines", "rddd", "speeds", "distributions", "seeds_per_cell"}
    missing = required - fields.keys()
    if missing:
        raise ValueError(f"grid file missing keys: {sorted(missing)}")
    unknown = fields.keys() - required
    if unknown:
        raise ValueError(f"grid file has unknown keys: {sorted(unknown)}")

    def ints(key: str) -> tuple[int, ...]:
        try:
            return tuple(int(v.strip()) for v in fields[key].split(","))
        except ValueError as exc:
            raise ValueError(f"grid file key {key} must list integers") from exc

    return BenchmarkGrid(
        jobs=ints("jobs"),
        machines=ints("machines"),
        rddd=ints("rddd"),
        speeds=ints("speeds"),
        distributions=tuple(v.strip() for v in fields["distributions"].split(",")),
        seeds_per_cell=int(fields["seeds_per_cell"]),
    )
