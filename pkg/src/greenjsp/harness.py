"""Experiment harness: run the portfolio over instance sets, label, persist.

A run walks every (instance, solver) pair, appending each finished cell to a
JSONL journal so interrupted runs resume without recomputation.  Rows become
labeled dataset rows by picking each instance's winning solver.  All CSV
formats are pinned: header mismatches raise SchemaMismatch, reals carry 12
significant digits, and absent cells in report tables read "Timeout".
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import FIRST_COMPLETED, ProcessPoolExecutor, wait
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Iterable, Mapping, Sequence

import numpy as np

if TYPE_CHECKING:
    from .ml.datasets import LabeledDataset

from .core import Instance, SolveStatus, SolverId, load_instance, save_instance
from .features import FEATURE_NAMES, FeatureVector, extract_features
from .generation import GeneratorConfig, allocate_budget, mix64
from .solvers import SOLVER_ORDER, solve

TIMEOUT_CELL = "Timeout"

DATASET_HEADER = (
    "id",
    *FEATURE_NAMES,
    "bnb_status", "bnb_obj", "bnb_ms",
    "gls_status", "gls_obj", "gls_ms",
    "sa_status", "sa_obj", "sa_ms",
    "label",
)

RESULTS_HEADER = (
    "id", "n_jobs", "n_machines", "rddd", "n_speeds", "budget_ms",
    "bnb_status", "bnb_fm", "bnb_fe", "bnb_ftt", "bnb_obj", "bnb_ms",
    "gls_status", "gls_fm", "gls_fe", "gls_ftt", "gls_obj", "gls_ms",
    "sa_status", "sa_fm", "sa_fe", "sa_ftt", "sa_obj", "sa_ms",
)

STATUS_HEADER = ("solver", "optimal", "satisfied", "unresolved")

_INT_FEATURES = {"n_jobs", "n_machines", "rddd", "n_speeds", "mk_ub", "mk_lb", "en_ub", "en_lb", "tt_ub"}


class SchemaMismatch(ValueError):
    """A CSV file's header does not match the pinned schema."""


def fmt_real(x: float) -> str:
    """Real values in files carry 12 significant digits."""
    return f"{x:.12g}"


@dataclass(frozen=True, slots=True)
class OutcomeCell:
    """One solver's journaled result on one instance (no schedule payload)."""

    solver_id: SolverId
    status: SolveStatus
    f_makespan: int | None
    f_energy: int | None
    f_tardiness: int | None
    scalarized: float | None
    solve_time_ms: int
    budget_ms: int
    note: str = ""


@dataclass(frozen=True, slots=True)
class ResultRow:
    """All portfolio outcomes for one instance, cells in SOLVER_ORDER."""

    instance_id: str
    n_jobs: int
    n_machines: int
    rddd_level: int
    n_speeds: int
    budget_ms: int
    cells: tuple[OutcomeCell, ...]

    def cell(self, solver: SolverId) -> OutcomeCell:
        return self.cells[SOLVER_ORDER.index(solver)]


@dataclass(frozen=True, slots=True)
class DatasetRow:
    """One labeled example: instance features plus the winning solver."""

    instance_id: str
    features: FeatureVector
    cells: tuple[OutcomeCell, ...]
    label: SolverId


def instance_budget(
    instance: Instance,
    override_ms: int | None = None,
    cap_ms: int | None = None,
) -> int:
    """Allocated budget for an instance, with optional override and cap."""
    if override_ms is not None:
        budget = int(override_ms)
    else:
        config = GeneratorConfig(
            n_jobs=instance.n_jobs,
            n_machines=instance.n_machines,
            rddd_level=int(instance.rddd_level),
            n_speeds=instance.n_speeds,
            distribution=instance.distribution,
            seed=instance.seed,
        )
        budget = allocate_budget(config)
    if cap_ms is not None:
        budget = min(budget, int(cap_ms))
    return max(1, budget)


def _journal_key(record: Mapping) -> tuple[str, str]:
    return str(record["instance"]), str(record["solver"])


def _load_journal(path: Path) -> dict[tuple[str, str], dict]:
    done: dict[tuple[str, str], dict] = {}
    if not path.exists():
        return done
    for line in path.read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line:
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError:
            continue  # a torn final line from an interrupted run is ignored
        done[_journal_key(record)] = record
    return done


def _solve_cell(path: str, solver_value: str, budget_ms: int, seed: int) -> dict:
    """Worker body: solve one (instance, solver) pair and describe the outcome."""
    instance = load_instance(path)
    solver = SolverId(solver_value)
    record: dict = {
        "instance": instance.id,
        "solver": solver.value,
        "budget_ms": budget_ms,
        "seed": seed,
    }
    try:
        outcome = solve(instance, solver, budget_ms, seed=seed)
    except Exception as exc:  # a solver crash must not sink the whole run
        record.update(status=SolveStatus.UNRESOLVED.value, solve_ms=0, note=f"{type(exc).__name__}: {exc}")
        return record
    record.update(status=outcome.status.value, solve_ms=outcome.solve_time_ms, note="")
    if outcome.objective is not None:
        record.update(
            f_m=outcome.objective.f_makespan,
            f_e=outcome.objective.f_energy,
            f_tt=outcome.objective.f_tardiness,
            scalarized=outcome.objective.scalarized,
        )
    return record


def _record_to_cell(record: Mapping, solver: SolverId) -> OutcomeCell:
    has_obj = "scalarized" in record
    return OutcomeCell(
        solver_id=solver,
        status=SolveStatus(record["status"]),
        f_makespan=int(record["f_m"]) if has_obj else None,
        f_energy=int(record["f_e"]) if has_obj else None,
        f_tardiness=int(record["f_tt"]) if has_obj else None,
        scalarized=float(record["scalarized"]) if has_obj else None,
        solve_time_ms=int(record["solve_ms"]),
        budget_ms=int(record["budget_ms"]),
        note=str(record.get("note", "")),
    )


def list_instance_files(instance_dir: str | Path) -> list[Path]:
    files = sorted(Path(instance_dir).glob("*.json"))
    if not files:
        raise FileNotFoundError(f"no instance files (*.json) in {instance_dir}")
    return files


def run_matrix(
    instance_dir: str | Path,
    solvers: Sequence[SolverId] = SOLVER_ORDER,
    parallelism: int = 1,
    budget_override_ms: int | None = None,
    budget_cap_ms: int | None = None,
    journal_path: str | Path | None = None,
    base_seed: int = 0,
) -> list[ResultRow]:
    """Run every solver on every instance in a directory, resumably.

    Finished cells found in the journal are reused, new cells are appended as
    they finish, and the returned rows follow the sorted instance-file order.
    The per-cell seed mixes the base seed, the instance seed, and the solver
    position, so runs are reproducible regardless of parallelism.
    """
    files = list_instance_files(instance_dir)
    instances = {path: load_instance(path) for path in files}
    budgets = {
        path: instance_budget(inst, budget_override_ms, budget_cap_ms)
        for path, inst in instances.items()
    }
    journal = Path(journal_path) if journal_path is not None else None
    done = _load_journal(journal) if journal is not None else {}

    pending: list[tuple[Path, SolverId]] = []
    for path in files:
        for solver in solvers:
            if (instances[path].id, solver.value) not in done:
                pending.append((path, solver))

    def seed_for(path: Path, solver: SolverId) -> int:
        return mix64(base_seed, instances[path].seed, SOLVER_ORDER.index(solver))

    def note(record: dict) -> None:
        done[_journal_key(record)] = record
        if journal is not None:
            with journal.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(record, sort_keys=True) + "\n")

    if pending and parallelism <= 1:
        for path, solver in pending:
            note(_solve_cell(str(path), solver.value, budgets[path], seed_for(path, solver)))
    elif pending:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            futures = {
                pool.submit(_solve_cell, str(path), solver.value, budgets[path], seed_for(path, solver)): (path, solver)
                for path, solver in pending
            }
            remaining = set(futures)
            while remaining:
                finished, remaining = wait(remaining, return_when=FIRST_COMPLETED)
                for fut in finished:
                    note(fut.result())

    rows: list[ResultRow] = []
    for path in files:
        inst = instances[path]
        cells = []
        for solver in solvers:
            record = done.get((inst.id, solver.value))
            if record is None:
                raise RuntimeError(f"missing journal record for {inst.id}/{solver.value}")
            cells.append(_record_to_cell(record, solver))
        rows.append(
            ResultRow(
                instance_id=inst.id,
                n_jobs=inst.n_jobs,
                n_machines=inst.n_machines,
                rddd_level=int(inst.rddd_level),
                n_speeds=inst.n_speeds,
                budget_ms=budgets[path],
                cells=tuple(cells),
            )
        )
    return rows


def pick_label(cells: Sequence[OutcomeCell]) -> SolverId | None:
    """Winning solver of one row: lowest objective, then time, then order.

    None when every solver is unresolved.
    """
    candidates = [
        (cell.scalarized, cell.solve_time_ms, idx)
        for idx, cell in enumerate(cells)
        if cell.scalarized is not None
    ]
    if not candidates:
        return None
    _, _, idx = min(candidates)
    return cells[idx].solver_id


def label_rows(
    rows: Sequence[ResultRow],
    features_by_id: Mapping[str, FeatureVector],
) -> tuple[list[DatasetRow], int]:
    """Attach features and labels; drop (and count) all-unresolved rows."""
    out: list[DatasetRow] = []
    dropped = 0
    for row in rows:
        label = pick_label(row.cells)
        if label is None:
            dropped += 1
            continue
        out.append(
            DatasetRow(
                instance_id=row.instance_id,
                features=features_by_id[row.instance_id],
                cells=row.cells,
                label=label,
            )
        )
    return out, dropped


def features_for_dir(instance_dir: str | Path) -> dict[str, FeatureVector]:
    return {
        (inst := load_instance(path)).id: extract_features(inst)
        for path in list_instance_files(instance_dir)
    }


def summarize_status(rows: Sequence[ResultRow]) -> dict[SolverId, dict[SolveStatus, int]]:
    counts = {
        solver: {status: 0 for status in SolveStatus} for solver in SOLVER_ORDER
    }
    for row in rows:
        for cell in row.cells:
            counts[cell.solver_id][cell.status] += 1
    return counts


def summarize_means(rows: Sequence[ResultRow]) -> list[dict]:
    """Mean solve time and objective per (jobs, machines) cell and solver.

    Means cover resolved runs only; a solver with no resolved run in a cell
    yields absent entries, which the CSV writer renders as Timeout.
    """
    groups: dict[tuple[int, int], list[ResultRow]] = {}
    for row in rows:
        groups.setdefault((row.n_jobs, row.n_machines), []).append(row)
    out: list[dict] = []
    for (nj, nm), members in sorted(groups.items()):
        entry: dict = {"n_jobs": nj, "n_machines": nm}
        for idx, solver in enumerate(SOLVER_ORDER):
            resolved = [
                row.cells[idx] for row in members if row.cells[idx].scalarized is not None
            ]
            if resolved:
                entry[f"{solver.value}_mean_ms"] = sum(c.solve_time_ms for c in resolved) / len(resolved)
                entry[f"{solver.value}_mean_obj"] = sum(c.scalarized for c in resolved) / len(resolved)
            else:
                entry[f"{solver.value}_mean_ms"] = None
                entry[f"{solver.value}_mean_obj"] = None
        out.append(entry)
    return out


def _fmt_cell(value: float | int | None) -> str:
    if value is None:
        return TIMEOUT_CELL
    if isinstance(value, int):
        return str(value)
    return fmt_real(value)


def write_status_csv(counts: Mapping[SolverId, Mapping[SolveStatus, int]], path: str | Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(STATUS_HEADER)
        for solver in SOLVER_ORDER:
            row = counts[solver]
            writer.writerow([
                solver.value,
                row[SolveStatus.OPTIMAL],
                row[SolveStatus.SATISFIED],
                row[SolveStatus.UNRESOLVED],
            ])


def write_means_csv(means: Sequence[Mapping], path: str | Path) -> None:
    header = ["n_jobs", "n_machines"]
    for solver in SOLVER_ORDER:
        header += [f"{solver.value}_mean_ms", f"{solver.value}_mean_obj"]
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for entry in means:
            writer.writerow([entry["n_jobs"], entry["n_machines"]] + [
                _fmt_cell(entry[key]) for key in header[2:]
            ])


def write_results(rows: Sequence[ResultRow], path: str | Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESULTS_HEADER)
        for row in rows:
            out: list = [row.instance_id, row.n_jobs, row.n_machines, row.rddd_level, row.n_speeds, row.budget_ms]
            for cell in row.cells:
                out += [
                    cell.status.value,
                    "" if cell.f_makespan is None else cell.f_makespan,
                    "" if cell.f_energy is None else cell.f_energy,
                    "" if cell.f_tardiness is None else cell.f_tardiness,
                    "" if cell.scalarized is None else fmt_real(cell.scalarized),
                    cell.solve_time_ms,
                ]
            writer.writerow(out)


def read_results(path: str | Path) -> list[ResultRow]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader, ()))
        if header != RESULTS_HEADER:
            raise SchemaMismatch(f"results header mismatch in {path}")
        rows: list[ResultRow] = []
        for line in reader:
            rec = dict(zip(RESULTS_HEADER, line))
            cells = []
            for solver in SOLVER_ORDER:
                p = solver.value
                has_obj = rec[f"{p}_obj"] != ""
                cells.append(
                    OutcomeCell(
                        solver_id=solver,
                        status=SolveStatus(rec[f"{p}_status"]),
                        f_makespan=int(rec[f"{p}_fm"]) if has_obj else None,
                        f_energy=int(rec[f"{p}_fe"]) if has_obj else None,
                        f_tardiness=int(rec[f"{p}_ftt"]) if has_obj else None,
                        scalarized=float(rec[f"{p}_obj"]) if has_obj else None,
                        solve_time_ms=int(rec[f"{p}_ms"]),
                        budget_ms=int(rec["budget_ms"]),
                    )
                )
            rows.append(
                ResultRow(
                    instance_id=rec["id"],
                    n_jobs=int(rec["n_jobs"]),
                    n_machines=int(rec["n_machines"]),
                    rddd_level=int(rec["rddd"]),
                    n_speeds=int(rec["n_speeds"]),
                    budget_ms=int(rec["budget_ms"]),
                    cells=tuple(cells),
                )
            )
    return rows


def write_dataset(rows: Sequence[DatasetRow], path: str | Path) -> None:
    """Write labeled rows in the pinned 28-column dataset schema."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(DATASET_HEADER)
        for row in rows:
            out: list = [row.instance_id]
            for name, value in zip(FEATURE_NAMES, row.features.as_tuple()):
                out.append(str(int(value)) if name in _INT_FEATURES else fmt_real(value))
            for cell in row.cells:
                out += [
                    cell.status.value,
                    "" if cell.scalarized is None else fmt_real(cell.scalarized),
                    cell.solve_time_ms,
                ]
            out.append(row.label.value)
            writer.writerow(out)


def read_dataset(path: str | Path) -> list[DatasetRow]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader, ()))
        if header != DATASET_HEADER:
            raise SchemaMismatch(f"dataset header mismatch in {path}")
        rows: list[DatasetRow] = []
        for line in reader:
            rec = dict(zip(DATASET_HEADER, line))
            kwargs: dict = {}
            for name in FEATURE_NAMES:
                kwargs[name] = int(rec[name]) if name in _INT_FEATURES else float(rec[name])
            cells = []
            for solver in SOLVER_ORDER:
                p = solver.value
                has_obj = rec[f"{p}_obj"] != ""
                cells.append(
                    OutcomeCell(
                        solver_id=solver,
                        status=SolveStatus(rec[f"{p}_status"]),
                        f_makespan=None,
                        f_energy=None,
                        f_tardiness=None,
                        scalarized=float(rec[f"{p}_obj"]) if has_obj else None,
                        solve_time_ms=int(rec[f"{p}_ms"]),
                        budget_ms=0,
                    )
                )
            rows.append(
                DatasetRow(
                    instance_id=rec["id"],
                    features=FeatureVector(**kwargs),
                    cells=tuple(cells),
                    label=SolverId(rec["label"]),
                )
            )
    return rows


def to_labeled(rows: Sequence[DatasetRow]) -> LabeledDataset:
    """Bundle dataset rows into an ml-ready labeled feature matrix."""
    from .ml.datasets import LabeledDataset

    features = np.array(
        [row.features.as_tuple() for row in rows], dtype=np.float64
    ).reshape(len(rows), len(FEATURE_NAMES))
    return LabeledDataset(features=features, labels=tuple(row.label.value for row in rows))


def export_instance(instance: Instance) -> str:
    """Flat plain-text exchange rendering of one instance.

    One `key value...` line per datum: scalars first, then `route j m...`,
    `proc j t p0 p1...`, `energy j t e0 e1...`, and window lines when the
    rddd level has them.
    """
    lines = [
        f"id {instance.id}",
        f"n_jobs {instance.n_jobs}",
        f"n_machines {instance.n_machines}",
        f"n_speeds {instance.n_speeds}",
        f"rddd_level {int(instance.rddd_level)}",
        f"distribution {instance.distribution}",
        f"seed {instance.seed}",
    ]
    for j in range(instance.n_jobs):
        lines.append(f"route {j} " + " ".join(str(m) for m in instance.routes[j]))
    for j, t in instance.tasks():
        lines.append(f"proc {j} {t} " + " ".join(str(v) for v in instance.proc[j][t]))
    for j, t in instance.tasks():
        lines.append(f"energy {j} {t} " + " ".join(str(v) for v in instance.energy[j][t]))
    if instance.rddd_level == 1:
        for j in range(instance.n_jobs):
            lines.append(f"window {j} {instance.release[j]} {instance.due[j]}")  # type: ignore[index]
    elif instance.rddd_level == 2:
        for j, t in instance.tasks():
            lines.append(f"window {j} {t} {instance.release[j][t]} {instance.due[j][t]}")  # type: ignore[index]
    return "\n".join(lines) + "\n"


def generate_to_dir(configs: Iterable[GeneratorConfig], out_dir: str | Path) -> list[Path]:
    """Generate and save one instance file per config; returns written paths."""
    from .generation import generate_instance

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths: list[Path] = []
    for config in configs:
        instance = generate_instance(config)
        path = out / f"{instance.id}.json"
        save_instance(instance, path)
        paths.append(path)
    return paths
