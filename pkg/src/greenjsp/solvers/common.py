"""Shared solver plumbing: budget clock, search statistics, reported times.

Budgets are enforced on the wall clock, but a run that terminates by its own
stopping rule reports a nominal time derived from counted work (nodes, move
evaluations, proposals) at a fixed rate.  That keeps reported times, and
therefore labels and datasets, identical across reruns and machines; only
budget-truncated runs report measured wall time.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from ..core import round_half_up

# Nominal work rates (work units per millisecond) for converged runs.
BNB_NODES_PER_MS = 30.0
LS_MOVES_PER_MS = 60.0
SA_PROPOSALS_PER_MS = 60.0

CHECK_INTERVAL = 64


@dataclass
class SearchStats:
    """Work counters and the incumbent trace of one solver run."""

    work: int = 0
    incumbents: list[tuple[int, float]] = field(default_factory=list)
    proof_complete: bool = False

    def record_incumbent(self, value: float) -> None:
        self.incumbents.append((self.work, value))


class BudgetClock:
    """Wall-clock deadline helper for a budget given in milliseconds."""

    def __init__(self, budget_ms: int) -> None:
        self.budget_ms = int(budget_ms)
        self._t0 = time.monotonic()
        self._deadline = self._t0 + self.budget_ms / 1000.0

    def expired(self) -> bool:
        return time.monotonic() >= self._deadline

    def elapsed_ms(self) -> int:
        return int((time.monotonic() - self._t0) * 1000.0)


def reported_ms(converged: bool, work: int, rate_per_ms: float, clock: BudgetClock) -> int:
    """Nominal work-derived time for converged runs, wall time otherwise."""
    if converged:
        return min(round_half_up(work / rate_per_ms), clock.budget_ms)
    return min(clock.elapsed_ms(), clock.budget_ms)
