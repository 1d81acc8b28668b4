"""Active-schedule construction in the style of Giffler and Thompson.

Construction repeatedly finds the earliest possible completion over all
ready tasks (at their fastest level), restricts attention to the machine
achieving it, and schedules one conflicting (task, speed) choice there.
Branching over exactly these choices spans the active schedules, which is
also the branching rule of the exact solver.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import Instance, Schedule, ObjectiveBounds, freeze2, objective_bounds

Choice = tuple[int, int]  # (job, speed level): the job's next task is implied


@dataclass(slots=True)
class _Undo:
    job: int
    prev_mach_avail: int
    prev_mk: int
    prev_energy: int
    prev_tard: int


class GtState:
    """Mutable partial schedule grown one task at a time, with undo.

    Tracks what branch and bound needs cheaply: per-job progress, machine
    availability, running objective components, and remaining fastest-speed
    workloads for lower bounds.
    """

    def __init__(self, instance: Instance) -> None:
        self.instance = instance
        J, M = instance.n_jobs, instance.n_machines
        self.next_task = [0] * J
        self.job_ready = [0] * J
        self.mach_avail = [0] * M
        self.start = [[0] * M for _ in range(J)]
        self.speed = [[0] * M for _ in range(J)]
        self.orders: list[list[tuple[int, int]]] = [[] for _ in range(M)]
        self.n_done = 0
        self.cur_mk = 0
        self.cur_energy = 0
        self.cur_tard = 0
        self.bounds: ObjectiveBounds = objective_bounds(instance)
        self.rem_job = [
            sum(min(instance.proc[j][t]) for t in range(M)) for j in range(J)
        ]
        self.rem_mach = [0] * M
        for j in range(J):
            for t in range(M):
                self.rem_mach[instance.routes[j][t]] += min(instance.proc[j][t])
        self.rem_energy = sum(min(instance.energy[j][t]) for j in range(J) for t in range(M))
        # Fastest duration per (job, task), for conflict-set computation.
        self._fast = [[min(instance.proc[j][t]) for t in range(M)] for j in range(J)]

    @property
    def complete(self) -> bool:
        return self.n_done == self.instance.n_jobs * self.instance.n_machines

    def _est(self, j: int) -> int:
        t = self.next_task[j]
        m = self.instance.routes[j][t]
        return max(self.job_ready[j], self.mach_avail[m], self.instance.task_release(j, t))

    def conflict_choices(self) -> list[Choice]:
        """The (job, speed) choices on the machine of the earliest completion.

        Jobs qualify when their next task runs on that machine and could
        start before the earliest fastest-speed completion; every speed level
        of a qualifying task is a separate choice.  Deterministic order.
        """
        inst = self.instance
        best: tuple[int, int] | None = None  # (completion, machine)
        ests: list[tuple[int, int, int]] = []  # (job, machine, est)
        for j in range(inst.n_jobs):
            t = self.next_task[j]
            if t >= inst.n_machines:
                continue
            m = inst.routes[j][t]
            est = self._est(j)
            ests.append((j, m, est))
            cand = (est + self._fast[j][t], m)
            if best is None or cand < best:
                best = cand
        assert best is not None
        c_star, m_star = best
        choices: list[Choice] = []
        for j, m, est in ests:
            if m == m_star and est < c_star:
                for s in range(inst.n_speeds):
                    choices.append((j, s))
        return choices

    def increment(self, choice: Choice) -> float:
        """Scalarized-objective increase of scheduling one choice next.

        Mirrors the normalized objective term by term so greedy ordering and
        final values agree; degenerate denominators contribute nothing.
        """
        j, s = choice
        inst = self.instance
        t = self.next_task[j]
        est = self._est(j)
        comp = est + inst.proc[j][t][s]
        b = self.bounds
        value = 0.0
        if b.mk_ub > b.mk_lb:
            value += max(0, comp - self.cur_mk) / (b.mk_ub - b.mk_lb)
        if b.en_ub > b.en_lb:
            value += inst.energy[j][t][s] / (b.en_ub - b.en_lb)
        if b.mk_ub > 0:
            value += self._tardiness_of(j, t, comp) / b.mk_ub
        return value

    def _tardiness_of(self, j: int, t: int, comp: int) -> int:
        inst = self.instance
        if inst.rddd_level == 1 and t == inst.n_machines - 1:
            return max(0, comp - inst.due[j])  # type: ignore[index]
        if inst.rddd_level == 2:
            return max(0, comp - inst.due[j][t])  # type: ignore[index]
        return 0

    def apply(self, choice: Choice) -> _Undo:
        j, s = choice
        inst = self.instance
        t = self.next_task[j]
        m = inst.routes[j][t]
        est = self._est(j)
        comp = est + inst.proc[j][t][s]
        undo = _Undo(
            job=j,
            prev_mach_avail=self.mach_avail[m],
            prev_mk=self.cur_mk,
            prev_energy=self.cur_energy,
            prev_tard=self.cur_tard,
        )
        self.start[j][t] = est
        self.speed[j][t] = s
        self.orders[m].append((j, t))
        self.next_task[j] = t + 1
        self.job_ready[j] = comp
        self.mach_avail[m] = comp
        self.cur_mk = max(self.cur_mk, comp)
        self.cur_energy += inst.energy[j][t][s]
        self.cur_tard += self._tardiness_of(j, t, comp)
        self.rem_job[j] -= self._fast[j][t]
        self.rem_mach[m] -= self._fast[j][t]
        self.rem_energy -= min(inst.energy[j][t])
        self.n_done += 1
        return undo

    def revert(self, undo: _Undo) -> None:
        j = undo.job
        inst = self.instance
        t = self.next_task[j] - 1
        m = inst.routes[j][t]
        self.orders[m].pop()
        self.next_task[j] = t
        self.job_ready[j] = 0 if t == 0 else self.start[j][t - 1] + inst.proc[j][t - 1][self.speed[j][t - 1]]
        self.mach_avail[m] = undo.prev_mach_avail
        self.cur_mk = undo.prev_mk
        self.cur_energy = undo.prev_energy
        self.cur_tard = undo.prev_tard
        self.rem_job[j] += self._fast[j][t]
        self.rem_mach[m] += self._fast[j][t]
        self.rem_energy += min(inst.energy[j][t])
        self.n_done -= 1

    def lower_bound(self) -> float:
        """Scalarized lower bound on any completion of this partial schedule."""
        b = self.bounds
        mk = self.cur_mk
        for j in range(self.instance.n_jobs):
            head = self.job_ready[j] + self.rem_job[j]
            if head > mk:
                mk = head
        for m in range(self.instance.n_machines):
            head = self.mach_avail[m] + self.rem_mach[m]
            if head > mk:
                mk = head
        value = 0.0
        if b.mk_ub > b.mk_lb:
            value += (mk - b.mk_lb) / (b.mk_ub - b.mk_lb)
        if b.en_ub > b.en_lb:
            value += (self.cur_energy + self.rem_energy - b.en_lb) / (b.en_ub - b.en_lb)
        if b.mk_ub > 0:
            value += self.cur_tard / b.mk_ub
        return value

    def scalarized(self) -> float:
        """Exact scalarized value of the completed schedule."""
        assert self.complete
        b = self.bounds
        value = 0.0
        if b.mk_ub > b.mk_lb:
            value += (self.cur_mk - b.mk_lb) / (b.mk_ub - b.mk_lb)
        if b.en_ub > b.en_lb:
            value += (self.cur_energy - b.en_lb) / (b.en_ub - b.en_lb)
        if b.mk_ub > 0:
            value += self.cur_tard / b.mk_ub
        return value

    def snapshot(self) -> Schedule:
        return Schedule(start=freeze2(self.start), speed=freeze2(self.speed))

    def components(self) -> tuple[int, int, int]:
        return self.cur_mk, self.cur_energy, self.cur_tard


def giffler_thompson(
    instance: Instance, rng: np.random.Generator | None = None
) -> tuple[Schedule, list[list[tuple[int, int]]]]:
    """Build one active schedule; greedy when rng is None, sampled otherwise.

    The greedy rule picks the conflict choice with the smallest scalarized
    increment (ties by job then speed); the randomized rule picks uniformly
    over the conflict choices.
    """
    state = GtState(instance)
    while not state.complete:
        choices = state.conflict_choices()
        if rng is None:
            pick = min(choices, key=lambda c: (state.increment(c), c))
        else:
            pick = choices[int(rng.integers(len(choices)))]
        state.apply(pick)
    return state.snapshot(), [list(o) for o in state.orders]


def construct(instance: Instance, rng: np.random.Generator | None = None) -> Schedule:
    """Feasible active schedule from one construction pass."""
    schedule, _ = giffler_thompson(instance, rng)
    return schedule
