"""Small builders shared across test modules."""

from __future__ import annotations

from greenjsp.core import Instance, freeze2, freeze3
from greenjsp.generation import GeneratorConfig, generate_instance


def manual_instance(
    routes,
    proc,
    energy,
    rddd_level: int = 0,
    release=None,
    due=None,
    distribution: str = "uniform",
    seed: int = 0,
    instance_id: str = "manual",
) -> Instance:
    """Build an instance directly from explicit tables."""
    n_jobs = len(routes)
    n_machines = len(routes[0]) if n_jobs else 0
    n_speeds = len(proc[0][0]) if n_jobs else 0
    if rddd_level == 1:
        frozen_release = tuple(int(v) for v in release)
        frozen_due = tuple(int(v) for v in due)
    elif rddd_level == 2:
        frozen_release = freeze2(release)
        frozen_due = freeze2(due)
    else:
        frozen_release = None
        frozen_due = None
    return Instance(
        id=instance_id,
        n_jobs=n_jobs,
        n_machines=n_machines,
        n_speeds=n_speeds,
        rddd_level=rddd_level,
        distribution=distribution,
        seed=seed,
        routes=freeze2(routes),
        proc=freeze3(proc),
        energy=freeze3(energy),
        release=frozen_release,
        due=frozen_due,
    )


def gen(
    n_jobs: int,
    n_machines: int,
    rddd: int = 0,
    speeds: int = 1,
    dist: str = "uniform",
    seed: int = 0,
) -> Instance:
    """Generate one seeded instance with compact arguments."""
    return generate_instance(
        GeneratorConfig(
            n_jobs=n_jobs,
            n_machines=n_machines,
            rddd_level=rddd,
            n_speeds=speeds,
            distribution=dist,
            seed=seed,
        )
    )


def single_task_instance(proc: int = 7, energy: int = 3) -> Instance:
    """The one-job one-machine one-speed example used across modules."""
    return manual_instance(
        routes=[[0]],
        proc=[[[proc]]],
        energy=[[[energy]]],
        instance_id="single",
    )


def window_of(instance: Instance, j: int, t: int) -> tuple[int, int]:
    if instance.rddd_level == 1:
        return instance.release[j], instance.due[j]
    return instance.release[j][t], instance.due[j][t]


def naive_time_window(instance: Instance) -> float:
    ratios = []
    if instance.rddd_level == 1:
        for j in range(instance.n_jobs):
            work = sum(instance.proc[j][t][0] for t in range(instance.n_machines))
            ratios.append((instance.due[j] - instance.release[j]) / work)
    else:
        for j, t in instance.tasks():
            rel, due = window_of(instance, j, t)
            ratios.append((due - rel) / instance.proc[j][t][0])
    return sum(ratios) / len(ratios)


def naive_overlap(instance: Instance) -> float:
    J, M = instance.n_jobs, instance.n_machines
    if J == 1:
        return 0.0
    total = 0.0
    pairs = 0
    if instance.rddd_level == 1:
        for a in range(J):
            for b in range(J):
                if a == b:
                    continue
                ra, da = instance.release[a], instance.due[a]
                rb, db = instance.release[b], instance.due[b]
                total += max(0, min(da, db) - max(ra, rb)) / (da - ra)
                pairs += 1
        return total / pairs
    for m in range(M):
        tasks_on_m = {j: t for j, t in instance.tasks() if instance.routes[j][t] == m}
        for a in range(J):
            for b in range(J):
                if a == b:
                    continue
                ra, da = window_of(instance, a, tasks_on_m[a])
                rb, db = window_of(instance, b, tasks_on_m[b])
                total += max(0, min(da, db) - max(ra, rb)) / (da - ra)
                pairs += 1
    return total / pairs


def naive_features(instance: Instance) -> tuple[float, ...]:
    """Recompute every feature with plain loops, independent of the module."""
    flat_p = [p for row in instance.proc for levels in row for p in levels]
    flat_e = [e for row in instance.energy for levels in row for e in levels]
    mk_ub = sum(max(instance.proc[j][t]) for j, t in instance.tasks())
    mk_lb = max(
        sum(min(instance.proc[j][t]) for t in range(instance.n_machines))
        for j in range(instance.n_jobs)
    )
    en_ub = sum(max(instance.energy[j][t]) for j, t in instance.tasks())
    en_lb = sum(min(instance.energy[j][t]) for j, t in instance.tasks())
    windowed = instance.rddd_level != 0
    return (
        float(instance.n_jobs),
        float(instance.n_machines),
        float(instance.rddd_level),
        float(instance.n_speeds),
        float(max(flat_p)),
        float(sum(flat_p)) / len(flat_p),
        float(min(flat_p)),
        float(max(flat_e)),
        float(sum(flat_e)) / len(flat_e),
        float(min(flat_e)),
        float(mk_ub),
        float(mk_lb),
        float(en_ub),
        float(en_lb),
        float(mk_ub) if windowed else -1.0,
        naive_time_window(instance) if windowed else -1.0,
        naive_overlap(instance) if windowed else -1.0,
    )
