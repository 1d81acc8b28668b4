"""Solver portfolio: one exact method, two heuristics, and a tiny oracle.

All solvers share the same call shape (instance, budget in ms, seed) and
return a SolveOutcome.  SOLVER_ORDER fixes the portfolio order used for
result rows, labels, and final tie-breaking.
"""

from __future__ import annotations

from typing import Callable

from ..core import Instance, SolveOutcome, SolverId
from .annealing import solve_sa
from .bnb import solve_bnb
from .brute import TooLarge, brute_force_optimum
from .common import SearchStats
from .construct import construct, giffler_thompson
from .local_search import solve_greedy_ls
from .neighborhood import enumerate_neighbors, machine_orders_of, move_descriptors

SOLVER_ORDER: tuple[SolverId, ...] = (SolverId.EXACT_BNB, SolverId.GREEDY_LS, SolverId.ANNEAL)

_SOLVE_FUNCS: dict[SolverId, Callable[..., SolveOutcome]] = {
    SolverId.EXACT_BNB: solve_bnb,
    SolverId.GREEDY_LS: solve_greedy_ls,
    SolverId.ANNEAL: solve_sa,
}


def solve(
    instance: Instance,
    solver: SolverId | str,
    budget_ms: int,
    seed: int = 0,
    stats: SearchStats | None = None,
) -> SolveOutcome:
    """Dispatch one solver run by id."""
    sid = SolverId(solver)
    return _SOLVE_FUNCS[sid](instance, budget_ms, seed=seed, stats=stats)


__all__ = [
    "SOLVER_ORDER",
    "SearchStats",
    "SolverId",
    "TooLarge",
    "brute_force_optimum",
    "construct",
    "enumerate_neighbors",
    "giffler_thompson",
    "machine_orders_of",
    "move_descriptors",
    "solve",
    "solve_bnb",
    "solve_greedy_ls",
    "solve_sa",
]
