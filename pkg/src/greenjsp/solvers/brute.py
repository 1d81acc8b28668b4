"""Exhaustive oracle over all semi-active schedules of a tiny instance.

Enumerates every combination of per-machine task permutations, discards the
cyclic ones, and evaluates all speed assignments of each acyclic sequencing
in one vectorized sweep.  Exact for the (regular) scalarized objective, and
deliberately independent of the construction machinery the solvers share.
"""

from __future__ import annotations

import itertools

import numpy as np

from ..core import (
    Instance,
    ObjectiveBreakdown,
    RdddLevel,
    Schedule,
    freeze2,
    objective_bounds,
    scalarize,
)

MAX_TASKS = 9
MAX_SPEEDS = 2


class TooLarge(ValueError):
    """The instance exceeds the oracle's exhaustive-enumeration guard."""


def _topological_order(
    n_tasks: int,
    route_pred: list[int],
    mach_pred: list[int],
) -> list[int] | None:
    """Kahn's order over flat task ids, or None when the graph cycles."""
    indeg = [0] * n_tasks
    succ: list[list[int]] = [[] for _ in range(n_tasks)]
    for v in range(n_tasks):
        for p in (route_pred[v], mach_pred[v]):
            if p >= 0:
                indeg[v] += 1
                succ[p].append(v)
    ready = [v for v in range(n_tasks) if indeg[v] == 0]
    order: list[int] = []
    while ready:
        v = ready.pop()
        order.append(v)
        for w in succ[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                ready.append(w)
    return order if len(order) == n_tasks else None


def brute_force_optimum(instance: Instance) -> tuple[Schedule, ObjectiveBreakdown]:
    """Globally optimal schedule of a tiny instance, with deterministic ties.

    Guarded to at most 9 tasks and 2 speed levels; raises TooLarge beyond
    that.  Ties on the scalarized value break lexicographically by makespan,
    energy, tardiness, then the flat schedule encoding.
    """
    J, M, S = instance.n_jobs, instance.n_machines, instance.n_speeds
    n_tasks = J * M
    if n_tasks > MAX_TASKS or S > MAX_SPEEDS:
        raise TooLarge(f"oracle handles at most {MAX_TASKS} tasks and {MAX_SPEEDS} speeds, got {n_tasks} tasks, {S} speeds")

    def tid(j: int, t: int) -> int:
        return j * M + t

    proc = np.asarray(instance.proc, dtype=np.int64).reshape(n_tasks, S)
    energy = np.asarray(instance.energy, dtype=np.int64).reshape(n_tasks, S)
    release = np.asarray([instance.task_release(j, t) for j, t in instance.tasks()], dtype=np.int64)
    due = np.full(n_tasks, np.iinfo(np.int64).max, dtype=np.int64)
    if instance.rddd_level == RdddLevel.JOB:
        for j in range(J):
            due[tid(j, M - 1)] = instance.due[j]  # type: ignore[index]
    elif instance.rddd_level == RdddLevel.TASK:
        for j, t in instance.tasks():
            due[tid(j, t)] = instance.due[j][t]  # type: ignore[index]
    has_due = due < np.iinfo(np.int64).max

    # All speed assignments as one (n_tasks, n_assign) matrix.
    assigns = np.array(list(itertools.product(range(S), repeat=n_tasks)), dtype=np.int64).T
    n_assign = assigns.shape[1]
    task_ids = np.arange(n_tasks)
    dur = proc[task_ids[:, None], assigns]
    en_total = energy[task_ids[:, None], assigns].sum(axis=0)

    route_pred = [-1] * n_tasks
    for j in range(J):
        for t in range(1, M):
            route_pred[tid(j, t)] = tid(j, t - 1)
    machine_tasks: list[list[int]] = [[] for _ in range(M)]
    for j, t in instance.tasks():
        machine_tasks[instance.routes[j][t]].append(tid(j, t))

    bounds = objective_bounds(instance)
    best_scalar: float | None = None
    best_key: tuple | None = None
    best_schedule: Schedule | None = None
    best_components: tuple[int, int, int] | None = None

    for seq in itertools.product(*(itertools.permutations(ts) for ts in machine_tasks)):
        mach_pred = [-1] * n_tasks
        for order in seq:
            for a, b in zip(order, order[1:]):
                mach_pred[b] = a
        topo = _topological_order(n_tasks, route_pred, mach_pred)
        if topo is None:
            continue
        comp = np.zeros((n_tasks, n_assign), dtype=np.int64)
        for v in topo:
            st = np.full(n_assign, release[v], dtype=np.int64)
            if route_pred[v] >= 0:
                np.maximum(st, comp[route_pred[v]], out=st)
            if mach_pred[v] >= 0:
                np.maximum(st, comp[mach_pred[v]], out=st)
            comp[v] = st + dur[v]
        f_m = comp.max(axis=0)
        f_tt = np.maximum(0, comp[has_due] - due[has_due, None]).sum(axis=0) if has_due.any() else np.zeros(n_assign, dtype=np.int64)
        scalar = np.zeros(n_assign, dtype=np.float64)
        if bounds.mk_ub > bounds.mk_lb:
            scalar += (f_m - bounds.mk_lb) / (bounds.mk_ub - bounds.mk_lb)
        if bounds.en_ub > bounds.en_lb:
            scalar += (en_total - bounds.en_lb) / (bounds.en_ub - bounds.en_lb)
        if bounds.mk_ub > 0:
            scalar += f_tt / bounds.mk_ub
        local_min = float(scalar.min())
        if best_scalar is not None and local_min > best_scalar:
            continue
        for col in np.flatnonzero(scalar == local_min):
            start = (comp[:, col] - dur[:, col]).reshape(J, M)
            speed = assigns[:, col].reshape(J, M)
            schedule = Schedule(start=freeze2(start.tolist()), speed=freeze2(speed.tolist()))
            components = (int(f_m[col]), int(en_total[col]), int(f_tt[col]))
            key = (*components, schedule.encoding())
            if best_scalar is None or local_min < best_scalar or (local_min == best_scalar and key < best_key):
                best_scalar = local_min
                best_key = key
                best_schedule = schedule
                best_components = components

    assert best_schedule is not None and best_components is not None and best_scalar is not None
    exact = scalarize(best_components, bounds)
    return best_schedule, ObjectiveBreakdown(
        f_makespan=best_components[0],
        f_energy=best_components[1],
        f_tardiness=best_components[2],
        scalarized=exact,
    )
