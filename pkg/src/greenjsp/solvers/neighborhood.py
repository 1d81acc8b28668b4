"""Local moves over schedules: critical adjacent swaps and speed steps.

A move either swaps two adjacent tasks on one machine when both lie on a
critical path of the makespan graph, or changes a single task's speed level
by one.  Every move is re-decoded semi-actively; moves that would create a
precedence cycle are discarded.

The heuristics evaluate millions of moves, so the module keeps a flat-array
evaluator (tasks as single integers, at most one route and one machine
successor each) beside the tuple-based public functions.
"""

from __future__ import annotations

from typing import Sequence

from ..core import Instance, Schedule, freeze2, objective_bounds

# ("swap", machine, position, 0) or ("speed", job, task, delta)
Move = tuple[str, int, int, int]


def machine_orders_of(instance: Instance, schedule: Schedule) -> list[list[tuple[int, int]]]:
    """Recover per-machine task sequences from start times (ties by job, task)."""
    orders: list[list[tuple[int, int]]] = [[] for _ in range(instance.n_machines)]
    for m in range(instance.n_machines):
        on_m = [
            (schedule.start[j][t], j, t)
            for j, t in instance.tasks()
            if instance.routes[j][t] == m
        ]
        on_m.sort()
        orders[m] = [(j, t) for _, j, t in on_m]
    return orders


class FastEvaluator:
    """Semi-active decoding and objective evaluation over flat task ids.

    Task (j, t) has id j*M + t.  State is (orders, speeds): per-machine id
    sequences plus one speed level per id.  evaluate() fills the reusable
    start/completion arrays and returns the objective, or None when the
    sequences conflict with the routes.
    """

    def __init__(self, instance: Instance) -> None:
        self.instance = instance
        J, M, S = instance.n_jobs, instance.n_machines, instance.n_speeds
        self.n_tasks = n = J * M
        self.n_machines = M
        self.n_speeds = S
        self.route_pred = [-1] * n
        self.route_succ = [-1] * n
        for j in range(J):
            for t in range(1, M):
                self.route_pred[j * M + t] = j * M + t - 1
                self.route_succ[j * M + t - 1] = j * M + t
        self.machine_of = [0] * n
        for j, t in instance.tasks():
            self.machine_of[j * M + t] = instance.routes[j][t]
        self.release = [instance.task_release(j, t) for j, t in instance.tasks()]
        self.proc = [list(instance.proc[j][t]) for j, t in instance.tasks()]
        self.energy = [list(instance.energy[j][t]) for j, t in instance.tasks()]
        self.due = [-1] * n
        if instance.rddd_level == 1:
            for j in range(J):
                self.due[j * M + M - 1] = instance.due[j]  # type: ignore[index]
        elif instance.rddd_level == 2:
            for j, t in instance.tasks():
                self.due[j * M + t] = instance.due[j][t]  # type: ignore[index]
        bounds = objective_bounds(instance)
        self.mk_lb = bounds.mk_lb
        self.mk_ub = bounds.mk_ub
        self.en_lb = bounds.en_lb
        self.d_mk = bounds.mk_ub - bounds.mk_lb
        self.d_en = bounds.en_ub - bounds.en_lb
        # Reusable work arrays.
        self.start = [0] * n
        self.comp = [0] * n
        self._mach_pred = [-1] * n
        self._mach_succ = [-1] * n
        self._tail = [0] * n
        self._topo = [0] * n

    def initial_state(self, schedule: Schedule) -> tuple[list[list[int]], list[int]]:
        """(orders, speeds) in flat-id form for a feasible schedule."""
        M = self.n_machines
        orders: list[list[int]] = [[] for _ in range(M)]
        flat = [
            (schedule.start[j][t], j * M + t)
            for j in range(self.instance.n_jobs)
            for t in range(M)
        ]
        flat.sort()
        for _, tid in flat:
            orders[self.machine_of[tid]].append(tid)
        speeds = [schedule.speed[j][t] for j in range(self.instance.n_jobs) for t in range(M)]
        return orders, speeds

    def evaluate(self, orders: Sequence[Sequence[int]], speeds: Sequence[int]) -> tuple[int, int, int, float] | None:
        """Decode semi-actively; returns (f_m, f_e, f_tt, scalarized) or None."""
        n = self.n_tasks
        mp = self._mach_pred
        ms = self._mach_succ
        for v in range(n):
            mp[v] = -1
            ms[v] = -1
        for order in orders:
            for i in range(len(order) - 1):
                a, b = order[i], order[i + 1]
                mp[b] = a
                ms[a] = b
        rp, rs = self.route_pred, self.route_succ
        start, comp = self.start, self.comp
        release, proc = self.release, self.proc
        topo = self._topo
        stack = [v for v in range(n) if rp[v] < 0 and mp[v] < 0]
        done = 0
        f_e = 0
        f_tt = 0
        f_m = 0
        due = self.due
        pending = [0] * n
        for v in range(n):
            pending[v] = (1 if rp[v] >= 0 else 0) + (1 if mp[v] >= 0 else 0)
        while stack:
            v = stack.pop()
            topo[done] = v
            est = release[v]
            p = rp[v]
            if p >= 0 and comp[p] > est:
                est = comp[p]
            p = mp[v]
            if p >= 0 and comp[p] > est:
                est = comp[p]
            start[v] = est
            c = est + proc[v][speeds[v]]
            comp[v] = c
            if c > f_m:
                f_m = c
            f_e += self.energy[v][speeds[v]]
            d = due[v]
            if d >= 0 and c > d:
                f_tt += c - d
            done += 1
            w = rs[v]
            if w >= 0:
                pending[w] -= 1
                if pending[w] == 0:
                    stack.append(w)
            w = ms[v]
            if w >= 0:
                pending[w] -= 1
                if pending[w] == 0:
                    stack.append(w)
        if done != n:
            return None
        value = 0.0
        if self.d_mk > 0:
            value += (f_m - self.mk_lb) / self.d_mk
        if self.d_en > 0:
            value += (f_e - self.en_lb) / self.d_en
        if self.mk_ub > 0:
            value += f_tt / self.mk_ub
        return f_m, f_e, f_tt, value

    def moves(self, orders: Sequence[Sequence[int]], speeds: Sequence[int], f_m: int) -> list[tuple[int, int, int]]:
        """Move list for the last evaluated state, in the fixed order.

        Entries are (kind, a, b): kind 0 swaps positions b, b+1 on machine a;
        kind 1 changes task a's speed by b.  Swaps ordered by (machine,
        position), speed moves by (task, delta), matching the public Move
        order.
        """
        n = self.n_tasks
        tail = self._tail
        topo = self._topo
        proc, rs, ms = self.proc, self.route_succ, self._mach_succ
        for i in range(n - 1, -1, -1):
            v = topo[i]
            best = 0
            w = rs[v]
            if w >= 0:
                cand = proc[w][speeds[w]] + tail[w]
                if cand > best:
                    best = cand
            w = ms[v]
            if w >= 0:
                cand = proc[w][speeds[w]] + tail[w]
                if cand > best:
                    best = cand
            tail[v] = best
        start = self.start
        critical = [start[v] + proc[v][speeds[v]] + tail[v] == f_m for v in range(n)]
        out: list[tuple[int, int, int]] = []
        for m, order in enumerate(orders):
            for pos in range(len(order) - 1):
                if critical[order[pos]] and critical[order[pos + 1]]:
                    out.append((0, m, pos))
        n_speeds = self.n_speeds
        if n_speeds > 1:
            for v in range(n):
                s = speeds[v]
                if s > 0:
                    out.append((1, v, -1))
                if s < n_speeds - 1:
                    out.append((1, v, 1))
        return out

    def snapshot_with(self, speeds: Sequence[int]) -> Schedule:
        """Schedule object for the last successfully evaluated state."""
        M = self.n_machines
        J = self.instance.n_jobs
        start = [[self.start[j * M + t] for t in range(M)] for j in range(J)]
        speed = [[speeds[j * M + t] for t in range(M)] for j in range(J)]
        return Schedule(start=freeze2(start), speed=freeze2(speed))

    def encoding_key(self, speeds: Sequence[int]) -> tuple[int, ...]:
        """Flat tie-break encoding matching Schedule.encoding()."""
        M = self.n_machines
        flat: list[int] = []
        for j in range(self.instance.n_jobs):
            base = j * M
            flat.extend(self.start[base + t] for t in range(M))
            flat.extend(speeds[base + t] for t in range(M))
        return tuple(flat)


def apply_fast_move(orders: list[list[int]], speeds: list[int], move: tuple[int, int, int]) -> None:
    """Apply a flat move in place (swap positions or step one speed)."""
    kind, a, b = move
    if kind == 0:
        order = orders[a]
        order[b], order[b + 1] = order[b + 1], order[b]
    else:
        speeds[a] += b


def undo_fast_move(orders: list[list[int]], speeds: list[int], move: tuple[int, int, int]) -> None:
    kind, a, b = move
    if kind == 0:
        order = orders[a]
        order[b], order[b + 1] = order[b + 1], order[b]
    else:
        speeds[a] -= b


def move_descriptors(
    instance: Instance,
    schedule: Schedule,
    orders: Sequence[Sequence[tuple[int, int]]],
) -> list[Move]:
    """All public moves from a schedule, in a fixed deterministic order.

    Swaps come first, ordered by (machine, position); speed moves follow,
    ordered by (job, task, delta) with the slowdown before the speedup.
    """
    ev = FastEvaluator(instance)
    M = instance.n_machines
    tid_orders = [[j * M + t for j, t in order] for order in orders]
    speeds = [schedule.speed[j][t] for j in range(instance.n_jobs) for t in range(M)]
    result = ev.evaluate(tid_orders, speeds)
    if result is None:
        raise ValueError("schedule's machine orders conflict with the routes")
    moves: list[Move] = []
    for kind, a, b in ev.moves(tid_orders, speeds, result[0]):
        if kind == 0:
            moves.append(("swap", a, b, 0))
        else:
            moves.append(("speed", a // M, a % M, b))
    return moves


def apply_move(
    orders: Sequence[Sequence[tuple[int, int]]],
    speeds: Sequence[Sequence[int]],
    move: Move,
) -> tuple[list[list[tuple[int, int]]], list[list[int]]]:
    """New (orders, speeds) with one public move applied; inputs unchanged."""
    new_orders = [list(o) for o in orders]
    new_speeds = [list(row) for row in speeds]
    kind, a, b, c = move
    if kind == "swap":
        new_orders[a][b], new_orders[a][b + 1] = new_orders[a][b + 1], new_orders[a][b]
    elif kind == "speed":
        new_speeds[a][b] += c
    else:
        raise ValueError(f"unknown move kind {move[0]!r}")
    return new_orders, new_speeds


def enumerate_neighbors(instance: Instance, schedule: Schedule) -> list[Schedule]:
    """Decode every move of a schedule, skipping any that would cycle."""
    ev = FastEvaluator(instance)
    orders, speeds = ev.initial_state(schedule)
    result = ev.evaluate(orders, speeds)
    if result is None:
        raise ValueError("schedule is not decodable against its instance")
    neighbors: list[Schedule] = []
    for move in ev.moves(orders, speeds, result[0]):
        apply_fast_move(orders, speeds, move)
        if ev.evaluate(orders, speeds) is not None:
            neighbors.append(ev.snapshot_with(speeds))
        undo_fast_move(orders, speeds, move)
    return neighbors
