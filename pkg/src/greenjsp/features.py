"""Instance features for learned solver selection.

Seventeen numbers summarize an instance: the four size characteristics, raw
duration/energy statistics over every (job, task, speed) entry, the four
normalization bounds, a tardiness cap, and two window-shape statistics.
Window-dependent features are -1 exactly when the instance has no windows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Instance, InvalidInstance, RdddLevel, objective_bounds, validate_instance

FEATURE_NAMES = (
    "n_jobs", "n_machines", "rddd", "n_speeds",
    "p_max", "p_mean", "p_min",
    "e_max", "e_mean", "e_min",
    "mk_ub", "mk_lb", "en_ub", "en_lb",
    "tt_ub", "time_window", "overlap",
)

N_FEATURES = len(FEATURE_NAMES)

# Columns that hold -1 exactly when the instance has no release/due data.
WINDOW_FEATURES = ("tt_ub", "time_window", "overlap")

INT_FEATURES = ("n_jobs", "n_machines", "rddd", "n_speeds", "mk_ub", "mk_lb", "en_ub", "en_lb", "tt_ub")


@dataclass(frozen=True, slots=True)
class FeatureVector:
    n_jobs: int
    n_machines: int
    rddd: int
    n_speeds: int
    p_max: float
    p_mean: float
    p_min: float
    e_max: float
    e_mean: float
    e_min: float
    mk_ub: int
    mk_lb: int
    en_ub: int
    en_lb: int
    tt_ub: int
    time_window: float
    overlap: float

    def as_tuple(self) -> tuple[float, ...]:
        return tuple(float(getattr(self, name)) for name in FEATURE_NAMES)


def _require_valid(instance: Instance) -> None:
    problems = validate_instance(instance)
    if problems:
        raise InvalidInstance("; ".join(problems))


def _task_windows(instance: Instance) -> tuple[np.ndarray, np.ndarray]:
    """Per-task (release, due) arrays shaped jobs x tasks, for rddd levels 1 and 2.

    At the job level every task inherits its job's window.
    """
    J, M = instance.n_jobs, instance.n_machines
    if instance.rddd_level == RdddLevel.JOB:
        rel = np.repeat(np.asarray(instance.release, dtype=np.int64)[:, None], M, axis=1)
        due = np.repeat(np.asarray(instance.due, dtype=np.int64)[:, None], M, axis=1)
        return rel, due
    return (
        np.asarray(instance.release, dtype=np.int64).reshape(J, M),
        np.asarray(instance.due, dtype=np.int64).reshape(J, M),
    )


def time_window_feature(instance: Instance, checked: bool = True) -> float:
    """Mean window width divided by the slowest-speed duration it must hold.

    Per task: (due - release) / duration at speed 0, averaged over all tasks;
    -1 when the instance has no windows.
    """
    if checked:
        _require_valid(instance)
    if instance.rddd_level == RdddLevel.NONE:
        return -1.0
    rel, due = _task_windows(instance)
    slowest = np.asarray([[instance.proc[j][t][0] for t in range(instance.n_machines)] for j in range(instance.n_jobs)], dtype=np.float64)
    if instance.rddd_level == RdddLevel.JOB:
        width = (due[:, 0] - rel[:, 0]).astype(np.float64)
        work = slowest.sum(axis=1)
        return float(np.mean(width / work))
    return float(np.mean((due - rel).astype(np.float64) / slowest))


def overlap_feature(instance: Instance, checked: bool = True) -> float:
    """Mean pairwise window overlap between distinct jobs, in [0, ~1].

    At the job level each ordered pair contributes the intersection of the
    two job windows divided by the first window's width; at the task level
    pairs are compared per machine between the tasks routed there.  Averaged
    over |J|(|J|-1) ordered pairs (times |M| at the task level); -1 with no
    windows, 0 when there is only one job.
    """
    if checked:
        _require_valid(instance)
    if instance.rddd_level == RdddLevel.NONE:
        return -1.0
    J, M = instance.n_jobs, instance.n_machines
    if J == 1:
        return 0.0
    rel, due = _task_windows(instance)
    if instance.rddd_level == RdddLevel.JOB:
        r = rel[:, 0].astype(np.float64)
        d = due[:, 0].astype(np.float64)
        inter = np.maximum(0.0, np.minimum(d[:, None], d[None, :]) - np.maximum(r[:, None], r[None, :]))
        ratio = inter / (d - r)[:, None]
        np.fill_diagonal(ratio, 0.0)
        return float(ratio.sum() / (J * (J - 1)))
    # Align windows by machine: column m holds the window of each job's task on m.
    slot = np.empty((J, M), dtype=np.int64)
    for j in range(J):
        for t in range(M):
            slot[j, instance.routes[j][t]] = t
    rows = np.arange(J)[:, None]
    rel_m = rel[rows, slot].astype(np.float64)
    due_m = due[rows, slot].astype(np.float64)
    total = 0.0
    for m in range(M):
        r = rel_m[:, m]
        d = due_m[:, m]
        inter = np.maximum(0.0, np.minimum(d[:, None], d[None, :]) - np.maximum(r[:, None], r[None, :]))
        ratio = inter / (d - r)[:, None]
        np.fill_diagonal(ratio, 0.0)
        total += ratio.sum()
    return float(total / (J * (J - 1) * M))


def extract_features(instance: Instance) -> FeatureVector:
    """Compute the 17-feature vector; raises InvalidInstance on a bad instance."""
    _require_valid(instance)
    proc = np.asarray(instance.proc, dtype=np.float64)
    energy = np.asarray(instance.energy, dtype=np.float64)
    bounds = objective_bounds(instance)
    windowed = instance.rddd_level != RdddLevel.NONE
    return FeatureVector(
        n_jobs=instance.n_jobs,
        n_machines=instance.n_machines,
        rddd=int(instance.rddd_level),
        n_speeds=instance.n_speeds,
        p_max=float(proc.max()),
        p_mean=float(proc.mean()),
        p_min=float(proc.min()),
        e_max=float(energy.max()),
        e_mean=float(energy.mean()),
        e_min=float(energy.min()),
        mk_ub=bounds.mk_ub,
        mk_lb=bounds.mk_lb,
        en_ub=bounds.en_ub,
        en_lb=bounds.en_lb,
        tt_ub=bounds.mk_ub if windowed else -1,
        time_window=time_window_feature(instance, checked=False),
        overlap=overlap_feature(instance, checked=False),
    )
