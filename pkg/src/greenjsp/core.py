"""Domain model for the energy-aware job shop.

Instances couple a classic job-shop routing structure with per-task speed
levels: running a task faster shortens its processing time and raises its
energy draw.  Schedules assign a start time and a speed level to every task.
Three objectives (makespan, total energy, total tardiness) are combined into
one scalarized value via instance-specific normalization bounds.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum, IntEnum
from functools import lru_cache
from pathlib import Path
from typing import Iterator, Sequence

EPS = 1e-12

IntTable = tuple[tuple[int, ...], ...]
IntTensor = tuple[tuple[tuple[int, ...], ...], ...]

DISTRIBUTIONS = ("uniform", "normal", "exponential")


class RdddLevel(IntEnum):
    """How release and due dates constrain an instance."""

    NONE = 0
    JOB = 1
    TASK = 2


class SolveStatus(str, Enum):
    OPTIMAL = "optimal"
    SATISFIED = "satisfied"
    UNRESOLVED = "unresolved"


class SolverId(str, Enum):
    EXACT_BNB = "bnb"
    GREEDY_LS = "gls"
    ANNEAL = "sa"


class CyclicPrecedence(ValueError):
    """The combined route/machine precedence graph contains a cycle."""


class InfeasibleInput(ValueError):
    """A schedule violates the instance's constraints."""


class InvalidInstance(ValueError):
    """An instance fails structural validation."""


def freeze2(rows: Sequence[Sequence[int]]) -> IntTable:
    return tuple(tuple(int(v) for v in row) for row in rows)


def freeze3(cube: Sequence[Sequence[Sequence[int]]]) -> IntTensor:
    return tuple(freeze2(plane) for plane in cube)


@dataclass(frozen=True, slots=True)
class Instance:
    """One energy-aware job-shop instance.

    Every job visits every machine exactly once, in the order given by its
    route.  ``proc[j][t][s]`` and ``energy[j][t][s]`` give the duration and
    energy of job ``j``'s ``t``-th task at speed level ``s`` (level 0 is the
    slowest).  Release/due data is present exactly when ``rddd_level`` asks
    for it: per job at level 1, per task at level 2.
    """

    id: str
    n_jobs: int
    n_machines: int
    n_speeds: int
    rddd_level: int
    distribution: str
    seed: int
    routes: IntTable
    proc: IntTensor
    energy: IntTensor
    release: tuple[int, ...] | IntTable | None = None
    due: tuple[int, ...] | IntTable | None = None

    @property
    def n_tasks(self) -> int:
        return self.n_jobs * self.n_machines

    def tasks(self) -> Iterator[tuple[int, int]]:
        for j in range(self.n_jobs):
            for t in range(self.n_machines):
                yield j, t

    def machine_of(self, j: int, t: int) -> int:
        return self.routes[j][t]

    def task_release(self, j: int, t: int) -> int:
        """Earliest start of task (j, t); 0 when no release data applies."""
        if self.rddd_level == RdddLevel.JOB:
            return self.release[j] if t == 0 else 0  # type: ignore[index]
        if self.rddd_level == RdddLevel.TASK:
            return self.release[j][t]  # type: ignore[index]
        return 0


@dataclass(frozen=True, slots=True)
class Schedule:
    """Start time and speed level per task, indexed like the instance."""

    start: IntTable
    speed: IntTable

    def completion(self, instance: Instance, j: int, t: int) -> int:
        return self.start[j][t] + instance.proc[j][t][self.speed[j][t]]

    def completions(self, instance: Instance) -> IntTable:
        return tuple(
            tuple(self.completion(instance, j, t) for t in range(instance.n_machines))
            for j in range(instance.n_jobs)
        )

    def encoding(self) -> tuple[int, ...]:
        """Flat deterministic encoding used as the last tie-break key."""
        flat: list[int] = []
        for row_s, row_v in zip(self.start, self.speed):
            flat.extend(row_s)
            flat.extend(row_v)
        return tuple(flat)


@dataclass(frozen=True, slots=True)
class ObjectiveBounds:
    mk_ub: int
    mk_lb: int
    en_ub: int
    en_lb: int


@dataclass(frozen=True, slots=True)
class ObjectiveBreakdown:
    f_makespan: int
    f_energy: int
    f_tardiness: int
    scalarized: float

    def tie_key(self, schedule: Schedule) -> tuple:
        return (self.f_makespan, self.f_energy, self.f_tardiness, schedule.encoding())


@dataclass(frozen=True, slots=True)
class SolveOutcome:
    """What one solver produced on one instance under one budget."""

    solver_id: SolverId
    status: SolveStatus
    best: Schedule | None
    objective: ObjectiveBreakdown | None
    solve_time_ms: int
    budget_ms: int


def _check_shape(instance: Instance) -> list[tuple[tuple, str]]:
    out: list[tuple[tuple, str]] = []
    J, M, S = instance.n_jobs, instance.n_machines, instance.n_speeds

    def bad(kind: str, j: int, detail: str) -> None:
        out.append(((kind, j, -1, -1), f"{kind} at job {j}: {detail}"))

    if J < 1 or M < 1 or S < 1:
        out.append((("shape", -1, -1, -1), "shape: sizes must be at least 1"))
        return out
    for name, table in (("routes", instance.routes), ("proc", instance.proc), ("energy", instance.energy)):
        if len(table) != J:
            out.append((("shape", -1, -1, -1), f"shape: {name} has {len(table)} rows, expected {J}"))
            return out
    for j in range(J):
        if len(instance.routes[j]) != M:
            bad("shape", j, f"route length {len(instance.routes[j])}, expected {M}")
        for name, cube in (("proc", instance.proc), ("energy", instance.energy)):
            if len(cube[j]) != M or any(len(levels) != S for levels in cube[j]):
                bad("shape", j, f"{name} rows must be {M} tasks x {S} speeds")
    return out


def _check_windows(instance: Instance) -> list[tuple[tuple, str]]:
    out: list[tuple[tuple, str]] = []
    J, M = instance.n_jobs, instance.n_machines
    lvl = instance.rddd_level
    if lvl == RdddLevel.NONE:
        if instance.release is not None or instance.due is not None:
            out.append((("window_shape", -1, -1, -1), "window_shape: rddd level 0 forbids release/due data"))
        return out
    if instance.release is None or instance.due is None:
        out.append((("window_missing", -1, -1, -1), f"window_missing: rddd level {int(lvl)} requires release and due data"))
        return out
    if lvl == RdddLevel.JOB:
        if len(instance.release) != J or len(instance.due) != J:
            out.append((("window_shape", -1, -1, -1), "window_shape: per-job release/due must have one entry per job"))
            return out
        for j in range(J):
            rd, dd = instance.release[j], instance.due[j]  # type: ignore[index]
            need = sum(min(instance.proc[j][t]) for t in range(M))
            if rd < 0:
                out.append((("window_order", j, -1, -1), f"window_order at job {j}: release {rd} is negative"))
            if dd <= rd:
                out.append((("window_order", j, -1, -1), f"window_order at job {j}: due {dd} <= release {rd}"))
            elif dd - rd < need:
                out.append((("window_too_short", j, -1, -1), f"window_too_short at job {j}: width {dd - rd} < fastest total work {need}"))
        return out
    rel, due = instance.release, instance.due
    if len(rel) != J or len(due) != J or any(len(rel[j]) != M or len(due[j]) != M for j in range(J)):  # type: ignore[arg-type, index]
        out.append((("window_shape", -1, -1, -1), "window_shape: per-task release/due must be jobs x tasks"))
        return out
    for j in range(J):
        for t in range(M):
            rd, dd = rel[j][t], due[j][t]  # type: ignore[index]
            need = min(instance.proc[j][t])
            if rd < 0:
                out.append((("window_order", j, t, -1), f"window_order at job {j} task {t}: release {rd} is negative"))
            if dd <= rd:
                out.append((("window_order", j, t, -1), f"window_order at job {j} task {t}: due {dd} <= release {rd}"))
            elif dd - rd < need:
                out.append((("window_too_short", j, t, -1), f"window_too_short at job {j} task {t}: width {dd - rd} < fastest duration {need}"))
            if t > 0 and rel[j][t] < rel[j][t - 1]:  # type: ignore[index]
                out.append((("window_order", j, t, -1), f"window_order at job {j} task {t}: release decreases along the route"))
    return out


def validate_instance(instance: Instance) -> list[str]:
    """Return all structural violations, deterministically ordered.

    An empty list means the instance is well formed.  Messages are sorted by
    (kind, job, task, speed) so repeated runs agree byte for byte.
    """
    found = _check_shape(instance)
    if not any(key[0] == "shape" for key, _ in found):
        for j in range(instance.n_jobs):
            route = instance.routes[j]
            if sorted(route) != list(range(instance.n_machines)):
                found.append((("route_not_permutation", j, -1, -1), f"route_not_permutation at job {j}: {list(route)}"))
            for t in range(instance.n_machines):
                pr, en = instance.proc[j][t], instance.energy[j][t]
                for s in range(instance.n_speeds):
                    if pr[s] < 1:
                        found.append((("proc_nonpositive", j, t, s), f"proc_nonpositive at job {j} task {t} speed {s}: {pr[s]}"))
                    if en[s] < 0:
                        found.append((("energy_negative", j, t, s), f"energy_negative at job {j} task {t} speed {s}: {en[s]}"))
                    if s > 0 and pr[s] > pr[s - 1]:
                        found.append((("proc_monotonicity", j, t, s), f"proc_monotonicity at job {j} task {t} speed {s}: {pr[s - 1]} -> {pr[s]}"))
                    if s > 0 and en[s] < en[s - 1]:
                        found.append((("energy_monotonicity", j, t, s), f"energy_monotonicity at job {j} task {t} speed {s}: {en[s - 1]} -> {en[s]}"))
        found.extend(_check_windows(instance))
    if instance.distribution not in DISTRIBUTIONS:
        found.append((("distribution_unknown", -1, -1, -1), f"distribution_unknown: {instance.distribution!r}"))
    if instance.rddd_level not in (0, 1, 2):
        found.append((("rddd_unknown", -1, -1, -1), f"rddd_unknown: {instance.rddd_level!r}"))
    found.sort(key=lambda kv: kv[0])
    return [msg for _, msg in found]


def decode_schedule(
    instance: Instance,
    machine_orders: Sequence[Sequence[tuple[int, int]]],
    speeds: Sequence[Sequence[int]],
) -> Schedule:
    """Semi-actively decode machine sequences plus speeds into start times.

    Each task starts as early as its route predecessor, machine predecessor,
    and release date allow.  Raises CyclicPrecedence when the combined
    precedence graph has a cycle.
    """
    J, M = instance.n_jobs, instance.n_machines
    if len(machine_orders) != M:
        raise ValueError(f"expected {M} machine sequences, got {len(machine_orders)}")
    mach_pred: dict[tuple[int, int], tuple[int, int]] = {}
    seen: set[tuple[int, int]] = set()
    for m, order in enumerate(machine_orders):
        prev: tuple[int, int] | None = None
        for j, t in order:
            if instance.routes[j][t] != m:
                raise ValueError(f"task ({j}, {t}) listed on machine {m} but routed to {instance.routes[j][t]}")
            if (j, t) in seen:
                raise ValueError(f"task ({j}, {t}) appears twice in the machine sequences")
            seen.add((j, t))
            if prev is not None:
                mach_pred[(j, t)] = prev
            prev = (j, t)
    if len(seen) != J * M:
        raise ValueError("machine sequences do not cover every task exactly once")

    indeg = {(j, t): (1 if t > 0 else 0) + (1 if (j, t) in mach_pred else 0) for j, t in instance.tasks()}
    succ: dict[tuple[int, int], list[tuple[int, int]]] = {task: [] for task in indeg}
    for (j, t), pred in mach_pred.items():
        succ[pred].append((j, t))
    for j in range(J):
        for t in range(1, M):
            succ[(j, t - 1)].append((j, t))

    start = [[0] * M for _ in range(J)]
    comp = [[0] * M for _ in range(J)]
    ready = [task for task, d in indeg.items() if d == 0]
    ready.sort()
    done = 0
    while ready:
        j, t = ready.pop()
        s = int(speeds[j][t])
        if not 0 <= s < instance.n_speeds:
            raise ValueError(f"speed index {s} out of range at task ({j}, {t})")
        est = instance.task_release(j, t)
        if t > 0:
            est = max(est, comp[j][t - 1])
        pred = mach_pred.get((j, t))
        if pred is not None:
            est = max(est, comp[pred[0]][pred[1]])
        start[j][t] = est
        comp[j][t] = est + instance.proc[j][t][s]
        done += 1
        for nxt in succ[(j, t)]:
            indeg[nxt] -= 1
            if indeg[nxt] == 0:
                ready.append(nxt)
    if done != J * M:
        raise CyclicPrecedence("machine sequences conflict with job routes")
    return Schedule(start=freeze2(start), speed=freeze2(speeds))


def check_feasibility(instance: Instance, schedule: Schedule) -> list[str]:
    """Return all constraint violations of a schedule, deterministically ordered."""
    J, M = instance.n_jobs, instance.n_machines
    if len(schedule.start) != J or len(schedule.speed) != J or any(
        len(schedule.start[j]) != M or len(schedule.speed[j]) != M for j in range(J)
    ):
        raise ValueError("schedule shape does not match the instance")
    for j, t in instance.tasks():
        if not 0 <= schedule.speed[j][t] < instance.n_speeds:
            raise ValueError(f"speed index {schedule.speed[j][t]} out of range at task ({j}, {t})")

    found: list[tuple[tuple, str]] = []
    comp = schedule.completions(instance)
    for j, t in instance.tasks():
        st = schedule.start[j][t]
        if st < 0:
            found.append((("negative_start", j, t), f"negative_start at job {j} task {t}: {st}"))
        rel = instance.task_release(j, t)
        if st < rel:
            found.append((("release_violation", j, t), f"release_violation at job {j} task {t}: start {st} < release {rel}"))
        if t > 0 and st < comp[j][t - 1]:
            found.append((("route_precedence", j, t), f"route_precedence at job {j} task {t}: start {st} < previous completion {comp[j][t - 1]}"))
    for m in range(M):
        on_m = sorted(
            ((schedule.start[j][t], comp[j][t], j, t) for j, t in instance.tasks() if instance.routes[j][t] == m),
        )
        for (s1, c1, j1, t1), (s2, c2, j2, t2) in zip(on_m, on_m[1:]):
            if s2 < c1:
                found.append(
                    (("machine_overlap", m, s2, j1, t1, j2, t2),
                     f"machine_overlap at machine {m}: tasks ({j1}, {t1}) and ({j2}, {t2}) overlap")
                )
    found.sort(key=lambda kv: kv[0])
    return [msg for _, msg in found]


def objective_components(instance: Instance, schedule: Schedule, check: bool = True) -> tuple[int, int, int]:
    """Compute (makespan, total energy, total tardiness) for a schedule."""
    if check:
        problems = check_feasibility(instance, schedule)
        if problems:
            raise InfeasibleInput("; ".join(problems))
    comp = schedule.completions(instance)
    f_m = max(c for row in comp for c in row)
    f_e = sum(
        instance.energy[j][t][schedule.speed[j][t]] for j, t in instance.tasks()
    )
    f_tt = 0
    if instance.rddd_level == RdddLevel.JOB:
        for j in range(instance.n_jobs):
            f_tt += max(0, comp[j][instance.n_machines - 1] - instance.due[j])  # type: ignore[index]
    elif instance.rddd_level == RdddLevel.TASK:
        for j, t in instance.tasks():
            f_tt += max(0, comp[j][t] - instance.due[j][t])  # type: ignore[index]
    return f_m, f_e, f_tt


@lru_cache(maxsize=256)
def objective_bounds(instance: Instance) -> ObjectiveBounds:
    """Normalization bounds from straight sums over the tensors.

    Upper bounds add the slowest-speed duration/highest energy of every task;
    the makespan lower bound is the largest fastest-speed job workload, and
    the energy lower bound sums each task's cheapest level.  Cached per
    instance (instances are immutable).
    """
    mk_ub = sum(max(instance.proc[j][t]) for j, t in instance.tasks())
    mk_lb = max(
        sum(min(instance.proc[j][t]) for t in range(instance.n_machines))
        for j in range(instance.n_jobs)
    )
    en_ub = sum(max(instance.energy[j][t]) for j, t in instance.tasks())
    en_lb = sum(min(instance.energy[j][t]) for j, t in instance.tasks())
    return ObjectiveBounds(mk_ub=mk_ub, mk_lb=mk_lb, en_ub=en_ub, en_lb=en_lb)


def scalarize(components: tuple[int, int, int], bounds: ObjectiveBounds) -> float:
    """Combine raw components into the normalized scalar objective.

    Each normalized term is skipped (contributes 0) when its denominator is
    degenerate, which happens for single-speed or single-path instances.
    """
    f_m, f_e, f_tt = components
    value = 0.0
    d_mk = bounds.mk_ub - bounds.mk_lb
    if d_mk > 0:
        value += (f_m - bounds.mk_lb) / d_mk
    d_en = bounds.en_ub - bounds.en_lb
    if d_en > 0:
        value += (f_e - bounds.en_lb) / d_en
    if bounds.mk_ub > 0:
        value += f_tt / bounds.mk_ub
    return value


def normalized_objective(instance: Instance, schedule: Schedule, check: bool = True) -> ObjectiveBreakdown:
    components = objective_components(instance, schedule, check=check)
    value = scalarize(components, objective_bounds(instance))
    return ObjectiveBreakdown(
        f_makespan=components[0], f_energy=components[1], f_tardiness=components[2], scalarized=value
    )


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def _instance_payload(instance: Instance) -> dict:
    payload: dict = {
        "id": instance.id,
        "n_jobs": instance.n_jobs,
        "n_machines": instance.n_machines,
        "n_speeds": instance.n_speeds,
        "rddd_level": int(instance.rddd_level),
        "distribution": instance.distribution,
        "seed": instance.seed,
        "routes": [list(r) for r in instance.routes],
        "proc": [[list(s) for s in row] for row in instance.proc],
        "energy": [[list(s) for s in row] for row in instance.energy],
    }
    if instance.rddd_level == RdddLevel.JOB:
        payload["release"] = list(instance.release)  # type: ignore[arg-type]
        payload["due"] = list(instance.due)  # type: ignore[arg-type]
    elif instance.rddd_level == RdddLevel.TASK:
        payload["release"] = [list(r) for r in instance.release]  # type: ignore[union-attr]
        payload["due"] = [list(r) for r in instance.due]  # type: ignore[union-attr]
    return payload


def save_instance(instance: Instance, path: str | Path) -> None:
    """Write an instance as canonical JSON (sorted keys, fixed separators)."""
    text = json.dumps(_instance_payload(instance), sort_keys=True, separators=(",", ":"))
    Path(path).write_text(text + "\n", encoding="utf-8")


def load_instance(path: str | Path) -> Instance:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InvalidInstance(f"not valid instance JSON: {path}") from exc
    try:
        lvl = int(payload["rddd_level"])
        release = due = None
        if lvl == RdddLevel.JOB:
            release = tuple(int(v) for v in payload["release"])
            due = tuple(int(v) for v in payload["due"])
        elif lvl == RdddLevel.TASK:
            release = freeze2(payload["release"])
            due = freeze2(payload["due"])
        instance = Instance(
            id=str(payload["id"]),
            n_jobs=int(payload["n_jobs"]),
            n_machines=int(payload["n_machines"]),
            n_speeds=int(payload["n_speeds"]),
            rddd_level=lvl,
            distribution=str(payload["distribution"]),
            seed=int(payload["seed"]),
            routes=freeze2(payload["routes"]),
            proc=freeze3(payload["proc"]),
            energy=freeze3(payload["energy"]),
            release=release,
            due=due,
        )
    except (KeyError, TypeError) as exc:
        raise InvalidInstance(f"instance file missing fields: {path}") from exc
    problems = validate_instance(instance)
    if problems:
        raise InvalidInstance("; ".join(problems))
    return instance
