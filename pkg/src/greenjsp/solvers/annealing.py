"""Simulated annealing over the swap/speed move set.

Starts from a seeded randomized construction.  The initial temperature is
calibrated so the mean sampled uphill move is accepted with probability 0.8;
the temperature decays geometrically on a fixed proposal schedule.  After a
long stretch without a new incumbent the search reheats: the temperature
resets and the walk restarts from the best state found so far.  The run
converges after a fixed number of proposals, or stops early on budget.
"""

from __future__ import annotations

import math

import numpy as np

from ..core import Instance, SolveOutcome, SolverId
from .common import CHECK_INTERVAL, SA_PROPOSALS_PER_MS, BudgetClock, SearchStats
from .construct import giffler_thompson
from .local_search import FastBest
from .neighborhood import FastEvaluator, apply_fast_move, undo_fast_move

DEFAULT_PROPOSALS = 40_000
CALIBRATION_SAMPLES = 30
ACCEPT_AT_START = 0.8
COOLING_FACTOR = 0.97
COOLING_INTERVAL = 100
REHEAT_AFTER = 2_000


def _calibrate_temperature(
    ev: FastEvaluator,
    orders: list[list[int]],
    speeds: list[int],
    value: float,
    moves: list[tuple[int, int, int]],
    rng: np.random.Generator,
) -> float:
    """Temperature accepting the mean sampled uphill move at the start rate."""
    if not moves:
        return 1.0
    uphill: list[float] = []
    for _ in range(CALIBRATION_SAMPLES):
        move = moves[int(rng.integers(len(moves)))]
        apply_fast_move(orders, speeds, move)
        candidate = ev.evaluate(orders, speeds)
        undo_fast_move(orders, speeds, move)
        if candidate is not None and candidate[3] > value:
            uphill.append(candidate[3] - value)
    if not uphill:
        return 1.0
    return (sum(uphill) / len(uphill)) / -math.log(ACCEPT_AT_START)


def solve_sa(
    instance: Instance,
    budget_ms: int,
    seed: int = 0,
    stats: SearchStats | None = None,
    max_proposals: int = DEFAULT_PROPOSALS,
) -> SolveOutcome:
    """Simulated annealing under a wall-clock budget; always Satisfied.

    Proposals pick a move uniformly; downhill or equal moves are always
    taken, uphill moves with probability exp(-delta/T).  Moves that would
    cycle count as rejected proposals.
    """
    clock = BudgetClock(budget_ms)
    stats = stats if stats is not None else SearchStats()
    rng = np.random.default_rng(seed)
    ev = FastEvaluator(instance)
    best = FastBest(ev, stats)

    schedule, _ = giffler_thompson(instance, rng)
    orders, speeds = ev.initial_state(schedule)
    result = ev.evaluate(orders, speeds)
    assert result is not None
    best.offer(result, orders, speeds)
    moves = ev.moves(orders, speeds, result[0])
    t0 = _calibrate_temperature(ev, orders, speeds, result[3], moves, rng)
    ev.evaluate(orders, speeds)
    temperature = t0

    since_new_best = 0
    truncated = False
    while stats.work < max_proposals and moves:
        if stats.work % CHECK_INTERVAL == 0 and clock.expired():
            truncated = True
            break
        stats.work += 1
        since_new_best += 1
        move = moves[int(rng.integers(len(moves)))]
        apply_fast_move(orders, speeds, move)
        candidate = ev.evaluate(orders, speeds)
        accepted = False
        if candidate is not None:
            delta = candidate[3] - result[3]
            if delta <= 0 or float(rng.random()) < math.exp(-delta / temperature):
                accepted = True
        if accepted:
            assert candidate is not None and best.result is not None
            new_best = candidate[3] < best.result[3]
            result = candidate
            if result[3] <= best.result[3]:
                best.offer(result, orders, speeds)
            moves = ev.moves(orders, speeds, result[0])
            if new_best:
                since_new_best = 0
        else:
            undo_fast_move(orders, speeds, move)
        if stats.work % COOLING_INTERVAL == 0:
            temperature = max(temperature * COOLING_FACTOR, 1e-12)
        if since_new_best >= REHEAT_AFTER:
            assert best.orders is not None and best.speeds is not None and best.result is not None
            orders = [list(o) for o in best.orders]
            speeds = list(best.speeds)
            result = best.result
            ev.evaluate(orders, speeds)
            moves = ev.moves(orders, speeds, result[0])
            temperature = t0
            since_new_best = 0
    return best.outcome(SolverId.ANNEAL, not truncated, SA_PROPOSALS_PER_MS, clock, budget_ms)
