"""Greedy construction plus first-improvement hill climbing with restarts.

The first pass climbs from the deterministic greedy construction; later
passes restart from seeded randomized constructions.  Each climb scans the
move list in its fixed order and takes the first strict improvement.  The
run converges after a fixed number of restarts, or stops early when the
wall-clock budget expires.
"""

from __future__ import annotations

import numpy as np

from ..core import (
    Instance,
    ObjectiveBreakdown,
    SolveOutcome,
    SolveStatus,
    SolverId,
)
from .common import CHECK_INTERVAL, LS_MOVES_PER_MS, BudgetClock, SearchStats, reported_ms
from .construct import giffler_thompson
from .neighborhood import FastEvaluator, apply_fast_move, undo_fast_move

DEFAULT_RESTARTS = 25


class FastBest:
    """Incumbent tracker over flat evaluator states with the tie rule."""

    def __init__(self, evaluator: FastEvaluator, stats: SearchStats) -> None:
        self.ev = evaluator
        self.stats = stats
        self.result: tuple[int, int, int, float] | None = None
        self.orders: list[list[int]] | None = None
        self.speeds: list[int] | None = None
        self._key: tuple | None = None

    def offer(self, result: tuple[int, int, int, float], orders: list[list[int]], speeds: list[int]) -> None:
        """Keep the state if it wins on (scalarized, makespan, energy,
        tardiness, encoding); call only right after it was evaluated."""
        key = (result[0], result[1], result[2], self.ev.encoding_key(speeds))
        if self.result is None or result[3] < self.result[3]:
            self.stats.record_incumbent(result[3])
        elif not (result[3] == self.result[3] and key < self._key):  # type: ignore[operator]
            return
        self.result = result
        self.orders = [list(o) for o in orders]
        self.speeds = list(speeds)
        self._key = key

    def outcome(self, solver_id: SolverId, converged: bool, rate: float, clock: BudgetClock, budget_ms: int) -> SolveOutcome:
        assert self.result is not None and self.orders is not None and self.speeds is not None
        check = self.ev.evaluate(self.orders, self.speeds)
        assert check == self.result
        f_m, f_e, f_tt, value = self.result
        return SolveOutcome(
            solver_id=solver_id,
            status=SolveStatus.SATISFIED,
            best=self.ev.snapshot_with(self.speeds),
            objective=ObjectiveBreakdown(f_makespan=f_m, f_energy=f_e, f_tardiness=f_tt, scalarized=value),
            solve_time_ms=reported_ms(converged, self.stats.work, rate, clock),
            budget_ms=budget_ms,
        )


def _climb(
    ev: FastEvaluator,
    orders: list[list[int]],
    speeds: list[int],
    result: tuple[int, int, int, float],
    clock: BudgetClock,
    stats: SearchStats,
) -> tuple[tuple[int, int, int, float], bool]:
    """First-improvement climb, mutating (orders, speeds) to a local optimum.

    Returns the final evaluation and whether the budget cut the climb short.
    """
    while True:
        improved = False
        for move in ev.moves(orders, speeds, result[0]):
            if stats.work % CHECK_INTERVAL == 0 and clock.expired():
                ev.evaluate(orders, speeds)
                return result, True
            stats.work += 1
            apply_fast_move(orders, speeds, move)
            candidate = ev.evaluate(orders, speeds)
            if candidate is not None and candidate[3] < result[3]:
                result = candidate
                improved = True
                break
            undo_fast_move(orders, speeds, move)
        if not improved:
            ev.evaluate(orders, speeds)
            return result, False


def solve_greedy_ls(
    instance: Instance,
    budget_ms: int,
    seed: int = 0,
    stats: SearchStats | None = None,
    max_restarts: int = DEFAULT_RESTARTS,
) -> SolveOutcome:
    """Hill climbing with seeded random restarts under a wall-clock budget.

    Always returns Satisfied: the first construction is completed even under
    a tiny budget, so a feasible schedule always exists.  The incumbent is
    never worse than the initial greedy construction.
    """
    clock = BudgetClock(budget_ms)
    stats = stats if stats is not None else SearchStats()
    rng = np.random.default_rng(seed)
    ev = FastEvaluator(instance)
    best = FastBest(ev, stats)
    passes = max(1, max_restarts)
    truncated = False
    for restart in range(passes):
        schedule, _ = giffler_thompson(instance, rng if restart > 0 else None)
        stats.work += instance.n_tasks
        orders, speeds = ev.initial_state(schedule)
        result = ev.evaluate(orders, speeds)
        assert result is not None
        best.offer(result, orders, speeds)
        result, cut = _climb(ev, orders, speeds, result, clock, stats)
        best.offer(result, orders, speeds)
        if cut:
            truncated = True
            break
        if clock.expired():
            truncated = restart + 1 < passes
            break
    return best.outcome(SolverId.GREEDY_LS, not truncated, LS_MOVES_PER_MS, clock, budget_ms)
