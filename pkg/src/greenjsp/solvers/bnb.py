"""Exact branch and bound over active schedules with speed choices.

Depth-first search branches on the construction conflict choices, diving
greedily (cheapest scalarized increment first) so a good incumbent appears
early.  Nodes are pruned against the incumbent with a bound that combines
makespan heads, remaining fastest-speed work, remaining cheapest energy, and
tardiness already incurred.  Status is Optimal only when the whole tree was
exhausted within the budget.
"""

from __future__ import annotations

from ..core import (
    EPS,
    Instance,
    ObjectiveBreakdown,
    Schedule,
    SolveOutcome,
    SolveStatus,
    SolverId,
)
from .common import BNB_NODES_PER_MS, CHECK_INTERVAL, BudgetClock, SearchStats, reported_ms
from .construct import Choice, GtState


class _Search:
    def __init__(self, instance: Instance, clock: BudgetClock, stats: SearchStats) -> None:
        self.state = GtState(instance)
        self.clock = clock
        self.stats = stats
        self.best_scalar: float | None = None
        self.best_key: tuple | None = None
        self.best_schedule: Schedule | None = None
        self.best_components: tuple[int, int, int] | None = None
        self.truncated = False

    def _expand(self) -> list[Choice] | None:
        """Count one node; return its ordered children, or None for a dead end."""
        self.stats.work += 1
        if self.stats.work % CHECK_INTERVAL == 0 and self.clock.expired():
            self.truncated = True
            return None
        state = self.state
        if state.complete:
            self._offer_leaf()
            return None
        if self.best_scalar is not None and state.lower_bound() >= self.best_scalar - EPS:
            return None
        choices = state.conflict_choices()
        choices.sort(key=lambda c: (state.increment(c), c))
        return choices

    def run(self) -> None:
        state = self.state
        # Explicit DFS stack; each frame is [children, next index, undo record
        # of the choice that entered the frame].
        root = self._expand()
        stack: list[list] = []
        if root is not None:
            stack.append([root, 0, None])
        while stack and not self.truncated:
            frame = stack[-1]
            children, idx, undo_in = frame
            if idx >= len(children):
                stack.pop()
                if undo_in is not None:
                    state.revert(undo_in)
                continue
            frame[1] = idx + 1
            undo = state.apply(children[idx])
            grandchildren = self._expand()
            if grandchildren is None:
                state.revert(undo)
            else:
                stack.append([grandchildren, 0, undo])
        if not self.truncated:
            self.stats.proof_complete = True

    def _offer_leaf(self) -> None:
        state = self.state
        scalar = state.scalarized()
        schedule = state.snapshot()
        key = (*state.components(), schedule.encoding())
        if (
            self.best_scalar is None
            or scalar < self.best_scalar
            or (scalar == self.best_scalar and key < self.best_key)  # type: ignore[operator]
        ):
            if self.best_scalar is None or scalar < self.best_scalar:
                self.stats.record_incumbent(scalar)
            self.best_scalar = scalar
            self.best_key = key
            self.best_schedule = schedule
            self.best_components = state.components()


def solve_bnb(
    instance: Instance,
    budget_ms: int,
    seed: int = 0,
    stats: SearchStats | None = None,
) -> SolveOutcome:
    """Run branch and bound under a wall-clock budget (the seed is unused).

    Returns Optimal with the proven best schedule when the search tree is
    exhausted in time, Satisfied with the incumbent when interrupted, and
    Unresolved when the budget expires before any leaf is reached.
    """
    del seed
    clock = BudgetClock(budget_ms)
    stats = stats if stats is not None else SearchStats()
    search = _Search(instance, clock, stats)
    search.run()
    if search.best_schedule is None:
        return SolveOutcome(
            solver_id=SolverId.EXACT_BNB,
            status=SolveStatus.UNRESOLVED,
            best=None,
            objective=None,
            solve_time_ms=reported_ms(False, stats.work, BNB_NODES_PER_MS, clock),
            budget_ms=budget_ms,
        )
    f_m, f_e, f_tt = search.best_components  # type: ignore[misc]
    objective = ObjectiveBreakdown(
        f_makespan=f_m, f_energy=f_e, f_tardiness=f_tt, scalarized=search.best_scalar,  # type: ignore[arg-type]
    )
    status = SolveStatus.OPTIMAL if stats.proof_complete else SolveStatus.SATISFIED
    return SolveOutcome(
        solver_id=SolverId.EXACT_BNB,
        status=status,
        best=search.best_schedule,
        objective=objective,
        solve_time_ms=reported_ms(stats.proof_complete, stats.work, BNB_NODES_PER_MS, clock),
        budget_ms=budget_ms,
    )
