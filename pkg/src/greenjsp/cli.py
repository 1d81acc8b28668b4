"""Command-line pipeline over the library: generate instances, allocate
budgets, run solvers singly or in batch, extract features, build labeled
datasets, train and evaluate selector models, and emit summary tables.

Every subcommand accepts ``--config <file>`` holding ``key=value`` lines
(keys are the long flag names); explicit flags win over config values.  The
resolved configuration is echoed to stderr so any run can be reproduced.
Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

from .core import SolveOutcome, SolverId, load_instance
from .features import FEATURE_NAMES, INT_FEATURES, extract_features
from .generation import enumerate_grid, mix64, read_grid_file
from .harness import (
    export_instance,
    features_for_dir,
    fmt_real,
    generate_to_dir,
    instance_budget,
    label_rows,
    read_dataset,
    read_results,
    run_matrix,
    summarize_means,
    summarize_status,
    to_labeled,
    write_dataset,
    write_means_csv,
    write_results,
    write_status_csv,
)
from .ml import (
    FAMILIES,
    ModelSpec,
    fit,
    load_model,
    save_model,
    select_solver,
    sweep,
    write_sweep_csv,
)
from .ml.metrics import evaluate as evaluate_model
from .solvers import SOLVER_ORDER, solve


class UsageError(Exception):
    """Bad flags or flag values; reported with exit code 1."""


class _Parser(argparse.ArgumentParser):
    """argparse variant that raises instead of exiting with code 2."""

    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(message)


def _to_int(text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise UsageError(f"expected an integer, got {text!r}") from None


def _to_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "1", "yes"):
        return True
    if lowered in ("false", "0", "no"):
        return False
    raise UsageError(f"expected true/false, got {text!r}")


def _to_budget(text: str) -> object:
    """Budget flag value: the literal ``auto`` or a positive integer of ms."""
    if text == "auto":
        return "auto"
    value = _to_int(text)
    if value <= 0:
        raise UsageError("budget must be positive")
    return value


def _to_solver(text: str) -> str:
    allowed = [s.value for s in SOLVER_ORDER] + ["all"]
    if text not in allowed:
        raise UsageError(f"solver must be one of {', '.join(allowed)}")
    return text


def _to_train_model(text: str) -> str:
    if text != "sweep" and text not in FAMILIES:
        raise UsageError(f"model must be 'sweep' or one of {', '.join(FAMILIES)}")
    return text


@dataclass(frozen=True, slots=True)
class _Flag:
    """One long option: how to parse it and what it defaults to."""

    name: str
    convert: Callable[[str], object] | None
    required: bool = False
    default: object = None
    help: str = ""

    @property
    def dest(self) -> str:
        return self.name.replace("-", "_")


_COMMANDS: dict[str, tuple[str, tuple[_Flag, ...]]] = {
    "gen": (
        "generate the instances of a benchmark grid into a directory",
        (
            _Flag("grid", str, required=True, help="grid description file"),
            _Flag("out", str, required=True, help="output directory for instance files"),
            _Flag("master-seed", _to_int, default=0, help="seed all replicate seeds derive from"),
        ),
    ),
    "budget": (
        "print the allocated time budget (ms) for one instance",
        (_Flag("instance", str, required=True, help="instance file"),),
    ),
    "solve": (
        "run one solver (or all three) on one instance and print the outcome",
        (
            _Flag("instance", str, required=True, help="instance file"),
            _Flag("solver", _to_solver, required=True, help="bnb, gls, sa, or all"),
            _Flag("budget", _to_budget, default="auto", help="budget in ms, or auto"),
            _Flag("seed", _to_int, default=0, help="base seed mixed per solver"),
        ),
    ),
    "batch": (
        "run every solver on every instance in a directory, resumably",
        (
            _Flag("instances", str, required=True, help="directory of instance files"),
            _Flag("out", str, required=True, help="results CSV to write"),
            _Flag("jobs", _to_int, default=1, help="worker processes"),
            _Flag("budget-cap", _to_int, default=None, help="clamp allocated budgets to this many ms"),
            _Flag("budget", _to_budget, default="auto", help="budget in ms, or auto"),
            _Flag("seed", _to_int, default=0, help="base seed mixed per cell"),
            _Flag("journal", str, default=None, help="journal file (default: <out>.journal)"),
        ),
    ),
    "featurize": (
        "print the feature header and one feature row for an instance",
        (_Flag("instance", str, required=True, help="instance file"),),
    ),
    "dataset": (
        "join results with instance features into a labeled dataset CSV",
        (
            _Flag("results", str, required=True, help="results CSV from batch"),
            _Flag("instances", str, required=True, help="directory the results were run from"),
            _Flag("out", str, required=True, help="dataset CSV to write"),
        ),
    ),
    "train": (
        "train one model family on a dataset, or sweep all families",
        (
            _Flag("dataset", str, required=True, help="labeled dataset CSV"),
            _Flag("model", _to_train_model, required=True, help="family name, or sweep"),
            _Flag("out", str, required=True, help="model file (or sweep CSV) to write"),
            _Flag("seed", _to_int, default=0, help="training seed"),
        ),
    ),
    "evaluate": (
        "evaluate a trained model on a dataset and write a report directory",
        (
            _Flag("model", str, required=True, help="trained model file"),
            _Flag("dataset", str, required=True, help="labeled dataset CSV"),
            _Flag("out", str, required=True, help="report directory"),
        ),
    ),
    "select": (
        "pick the solver a model recommends for an instance, optionally run it",
        (
            _Flag("model", str, required=True, help="trained model file"),
            _Flag("instance", str, required=True, help="instance file"),
            _Flag("run", None, default=False, help="also run the chosen solver"),
            _Flag("budget", _to_budget, default="auto", help="budget in ms, or auto"),
            _Flag("seed", _to_int, default=0, help="base seed mixed per solver"),
        ),
    ),
    "report": (
        "summarize a results CSV into status and mean tables",
        (
            _Flag("results", str, required=True, help="results CSV from batch"),
            _Flag("out", str, required=True, help="directory for the table CSVs"),
        ),
    ),
    "export": (
        "write an instance as a flat key/array text file",
        (
            _Flag("instance", str, required=True, help="instance file"),
            _Flag("out", str, default=None, help="output file (default: stdout)"),
        ),
    ),
}


def _read_config(path: str) -> dict[str, str]:
    """Parse a key=value config file; blank lines and # comments are skipped."""
    values: dict[str, str] = {}
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"config line is not key=value: {line!r}")
        values[key.strip()] = value.strip()
    return values


def _resolve(command: str, args: argparse.Namespace) -> dict[str, object]:
    """Merge command-line flags over config-file values and apply defaults."""
    flags = _COMMANDS[command][1]
    config = _read_config(args.config) if args.config is not None else {}
    unknown = set(config) - {flag.name for flag in flags}
    if unknown:
        raise UsageError(f"unknown config keys for {command}: {', '.join(sorted(unknown))}")
    resolved: dict[str, object] = {}
    for flag in flags:
        value: object = getattr(args, flag.dest)
        if value is None and flag.name in config:
            raw = config[flag.name]
            value = _to_bool(raw) if flag.convert is None else flag.convert(raw)
        elif value is not None and flag.convert is not None:
            value = flag.convert(value)
        if value is None:
            if flag.required:
                raise UsageError(f"missing required flag --{flag.name}")
            value = flag.default
        resolved[flag.dest] = value
    return resolved


def _echo_config(command: str, resolved: dict[str, object]) -> None:
    parts = [f"command={command}"]
    for dest, value in resolved.items():
        if value is not None:
            parts.append(f"{dest.replace('_', '-')}={value}")
    print("config: " + " ".join(parts), file=sys.stderr)


def _outcome_record(instance_id: str, outcome: SolveOutcome, seed: int) -> str:
    obj = outcome.objective
    return "\n".join(
        [
            f"instance={instance_id}",
            f"solver={outcome.solver_id.value}",
            f"status={outcome.status.value}",
            f"f_makespan={'' if obj is None else obj.f_makespan}",
            f"f_energy={'' if obj is None else obj.f_energy}",
            f"f_tardiness={'' if obj is None else obj.f_tardiness}",
            f"scalarized={'' if obj is None else fmt_real(obj.scalarized)}",
            f"time_ms={outcome.solve_time_ms}",
            f"budget_ms={outcome.budget_ms}",
            f"seed={seed}",
        ]
    )


def _budget_override(value: object) -> int | None:
    return None if value == "auto" else int(value)  # type: ignore[arg-type]


def _cmd_gen(opts: dict) -> int:
    grid = read_grid_file(opts["grid"])
    configs = enumerate_grid(grid, master_seed=opts["master_seed"])
    paths = generate_to_dir(configs, opts["out"])
    print(f"instances={len(paths)} out={opts['out']}")
    return 0


def _cmd_budget(opts: dict) -> int:
    print(instance_budget(load_instance(opts["instance"])))
    return 0


def _cmd_solve(opts: dict) -> int:
    instance = load_instance(opts["instance"])
    budget = instance_budget(instance, override_ms=_budget_override(opts["budget"]))
    chosen = SOLVER_ORDER if opts["solver"] == "all" else (SolverId(opts["solver"]),)
    records = []
    for solver in chosen:
        seed = mix64(opts["seed"], instance.seed, SOLVER_ORDER.index(solver))
        outcome = solve(instance, solver, budget, seed=seed)
        records.append(_outcome_record(instance.id, outcome, seed))
    print("\n\n".join(records))
    return 0


def _cmd_batch(opts: dict) -> int:
    journal = opts["journal"] if opts["journal"] is not None else f"{opts['out']}.journal"
    rows = run_matrix(
        opts["instances"],
        parallelism=opts["jobs"],
        budget_override_ms=_budget_override(opts["budget"]),
        budget_cap_ms=opts["budget_cap"],
        journal_path=journal,
        base_seed=opts["seed"],
    )
    write_results(rows, opts["out"])
    print(f"rows={len(rows)} out={opts['out']} journal={journal}")
    return 0


def _cmd_featurize(opts: dict) -> int:
    features = extract_features(load_instance(opts["instance"]))
    print(",".join(FEATURE_NAMES))
    print(
        ",".join(
            str(int(value)) if name in INT_FEATURES else fmt_real(value)
            for name, value in zip(FEATURE_NAMES, features.as_tuple())
        )
    )
    return 0


def _cmd_dataset(opts: dict) -> int:
    rows = read_results(opts["results"])
    features = features_for_dir(opts["instances"])
    missing = [row.instance_id for row in rows if row.instance_id not in features]
    if missing:
        raise ValueError(f"no instance file in {opts['instances']} for result row {missing[0]}")
    labeled, dropped = label_rows(rows, features)
    write_dataset(labeled, opts["out"])
    print(f"rows={len(labeled)} dropped={dropped} out={opts['out']}")
    return 0


def _cmd_train(opts: dict) -> int:
    data = to_labeled(read_dataset(opts["dataset"]))
    if opts["model"] == "sweep":
        results = sweep(data, seed=opts["seed"])
        write_sweep_csv(results, opts["out"])
        for r in results:
            print(
                f"family={r.family} mean_accuracy={fmt_real(r.mean_accuracy)} "
                f"std_accuracy={fmt_real(r.std_accuracy)}"
            )
        print(f"out={opts['out']}")
        return 0
    model = fit(ModelSpec(family=opts["model"], seed=opts["seed"]), data)
    save_model(model, opts["out"])
    print(f"family={opts['model']} rows={data.n_rows} out={opts['out']}")
    return 0


def _cmd_evaluate(opts: dict) -> int:
    model = load_model(opts["model"])
    data = to_labeled(read_dataset(opts["dataset"]))
    report = evaluate_model(model, data)
    out_dir = Path(opts["out"])
    out_dir.mkdir(parents=True, exist_ok=True)
    with (out_dir / "confusion.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["label", *report.labels])
        for label, row in zip(report.labels, report.confusion):
            writer.writerow([label, *row])
    lines = [
        f"accuracy={fmt_real(report.accuracy)}",
        f"macro_precision={fmt_real(report.macro_precision)}",
        f"macro_recall={fmt_real(report.macro_recall)}",
    ]
    for label, precision, recall in zip(report.labels, report.precision, report.recall):
        lines.append(f"precision_{label}={fmt_real(precision)}")
        lines.append(f"recall_{label}={fmt_real(recall)}")
    lines.append("unpredicted_labels=" + " ".join(report.unpredicted_labels))
    (out_dir / "summary.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"accuracy={fmt_real(report.accuracy)} out={out_dir}")
    return 0


def _cmd_select(opts: dict) -> int:
    model = load_model(opts["model"])
    instance = load_instance(opts["instance"])
    solver, _ = select_solver(model, instance)
    print(f"solver={solver.value}")
    if opts["run"]:
        budget = instance_budget(instance, override_ms=_budget_override(opts["budget"]))
        seed = mix64(opts["seed"], instance.seed, SOLVER_ORDER.index(solver))
        outcome = solve(instance, solver, budget, seed=seed)
        print()
        print(_outcome_record(instance.id, outcome, seed))
    return 0


def _cmd_report(opts: dict) -> int:
    rows = read_results(opts["results"])
    out_dir = Path(opts["out"])
    out_dir.mkdir(parents=True, exist_ok=True)
    write_status_csv(summarize_status(rows), out_dir / "status_counts.csv")
    write_means_csv(summarize_means(rows), out_dir / "means_by_jm.csv")
    print(f"out={out_dir} files=status_counts.csv,means_by_jm.csv")
    return 0


def _cmd_export(opts: dict) -> int:
    text = export_instance(load_instance(opts["instance"]))
    if opts["out"] is None:
        sys.stdout.write(text)
    else:
        Path(opts["out"]).write_text(text, encoding="utf-8")
        print(f"out={opts['out']}")
    return 0


_HANDLERS: dict[str, Callable[[dict], int]] = {
    "gen": _cmd_gen,
    "budget": _cmd_budget,
    "solve": _cmd_solve,
    "batch": _cmd_batch,
    "featurize": _cmd_featurize,
    "dataset": _cmd_dataset,
    "train": _cmd_train,
    "evaluate": _cmd_evaluate,
    "select": _cmd_select,
    "report": _cmd_report,
    "export": _cmd_export,
}


def build_parser() -> _Parser:
    parser = _Parser(prog="greenjsp", description=__doc__.splitlines()[0])
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="command")
    for name, (summary, flags) in _COMMANDS.items():
        sub = subparsers.add_parser(name, help=summary, description=summary)
        for flag in flags:
            if flag.convert is None:
                sub.add_argument(f"--{flag.name}", dest=flag.dest, action="store_true", default=None, help=flag.help)
            else:
                sub.add_argument(f"--{flag.name}", dest=flag.dest, default=None, metavar="V", help=flag.help)
        sub.add_argument("--config", default=None, metavar="FILE", help="key=value file merged under explicit flags")
    return parser


def _dispatch(argv: Sequence[str]) -> int:
    args = build_parser().parse_args(argv)
    resolved = _resolve(args.command, args)
    _echo_config(args.command, resolved)
    return _HANDLERS[args.command](resolved)


def main(argv: Sequence[str] | None = None) -> int:
    try:
        return _dispatch(sys.argv[1:] if argv is None else list(argv))
    except UsageError as exc:
        print(f"usage error: {' '.join(str(exc).split())}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"data error: {' '.join(str(exc).split())}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
