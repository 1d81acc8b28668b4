"""End-to-end acceptance checks, one test per pipeline criterion.

Each test asserts one acceptance criterion at its stated tolerance and prints
a single summary line with the measured numbers, so a verbose run doubles as
the acceptance report.  The two trailing desk checks cover the composed
selector and the label mix on the same session corpus.
"""

from __future__ import annotations

import itertools
import time
from collections import Counter

import numpy as np
import pytest

from _helpers import gen, naive_features
from greenjsp.core import (
    DISTRIBUTIONS,
    SolveStatus,
    SolverId,
    check_feasibility,
    load_instance,
    normalized_objective,
)
from greenjsp.features import FEATURE_NAMES, INT_FEATURES, extract_features
from greenjsp.generation import (
    REFERENCE_GRID,
    BenchmarkGrid,
    GeneratorConfig,
    allocate_budget,
    budget_terms,
    enumerate_grid,
    mix64,
)
from greenjsp.harness import (
    features_for_dir,
    generate_to_dir,
    label_rows,
    list_instance_files,
    run_matrix,
    to_labeled,
    write_dataset,
    write_results,
)
from greenjsp.ml.datasets import LabeledDataset, kfold, stratified_split
from greenjsp.ml.metrics import majority_accuracy, report_from_confusion, sweep
from greenjsp.ml.models import (
    FAMILIES,
    ModelSpec,
    fit,
    mlp_gradients,
    mlp_loss,
    predict_many,
    save_model,
)
from greenjsp.solvers import SOLVER_ORDER, construct, solve
from greenjsp.solvers.annealing import solve_sa
from greenjsp.solvers.bnb import solve_bnb
from greenjsp.solvers.local_search import solve_greedy_ls

from conftest import DESK_MASTER_SEED

TOL = 1e-12


def test_criterion_01_reference_grid_enumeration():
    start = time.perf_counter()
    configs = enumerate_grid(REFERENCE_GRID)
    wall = time.perf_counter() - start
    assert len(configs) == 9720
    assert len({c.instance_id for c in configs}) == 9720
    assert wall < 10.0
    print(f"criterion 01 PASS: reference grid configs=9720 wall={wall:.3f}s")


def test_criterion_02_budget_anchors_bounds_monotonicity():
    start = time.perf_counter()

    def cfg(j, m, r, s):
        return GeneratorConfig(
            n_jobs=j, n_machines=m, rddd_level=r, n_speeds=s, distribution="uniform", seed=0
        )

    assert budget_terms(cfg(5, 5, 0, 1))[2] == 50.0
    assert allocate_budget(cfg(100, 100, 2, 5)) == 300_000

    axes = (REFERENCE_GRID.jobs, REFERENCE_GRID.machines, REFERENCE_GRID.rddd, REFERENCE_GRID.speeds)
    terms_at = {
        combo: budget_terms(cfg(*combo)) for combo in itertools.product(*axes)
    }
    for terms in terms_at.values():
        assert all(50.0 - 1e-9 <= t <= 75_000.0 + 1e-9 for t in terms)
    for axis_idx in range(4):
        rest_axes = [axes[i] for i in range(4) if i != axis_idx]
        for rest in itertools.product(*rest_axes):
            previous = 0.0
            for value in axes[axis_idx]:
                combo = list(rest)
                combo.insert(axis_idx, value)
                term = terms_at[tuple(combo)][axis_idx]
                assert term >= previous - 1e-12
                previous = term
    wall = time.perf_counter() - start
    assert wall < 1.0
    print(
        f"criterion 02 PASS: combos={len(terms_at)} terms in [50, 75000], "
        f"anchors 50/300000 exact, monotone, wall={wall:.3f}s"
    )


def test_criterion_03_exact_solver_matches_brute_force(oracle_set):
    start = time.perf_counter()
    worst_gap = 0.0
    for instance, best in oracle_set:
        outcome = solve_bnb(instance, 10_000, seed=0)
        assert outcome.status is SolveStatus.OPTIMAL, instance.id
        gap = abs(outcome.objective.scalarized - best.scalarized)
        worst_gap = max(worst_gap, gap)
        assert gap <= TOL, instance.id
    wall = time.perf_counter() - start
    assert wall < 600.0
    print(
        f"criterion 03 PASS: instances={len(oracle_set)} all optimal, "
        f"worst gap={worst_gap:.2e}, wall={wall:.1f}s"
    )


def test_criterion_04_feasibility_of_portfolio_schedules(desk_dir):
    files = list_instance_files(desk_dir)[::3]
    runs = ((3, 0), (3, 1), (3, 2), (9, 0), (9, 1), (9, 2), (15, 3))
    checked = 0
    for path in files:
        instance = load_instance(path)
        for solver in SOLVER_ORDER:
            for budget_ms, seed in runs:
                outcome = solve(instance, solver, budget_ms, seed=seed)
                assert outcome.best is not None, (instance.id, solver)
                assert check_feasibility(instance, outcome.best) == [], (instance.id, solver)
                checked += 1
    assert checked >= 10_000
    print(f"criterion 04 PASS: schedules={checked} across 3 solvers, violations=0")


def test_criterion_05_heuristic_sandwich_and_anneal_hits(oracle_set):
    hits = 0
    for instance, best in oracle_set:
        optimum = best.scalarized
        construction = normalized_objective(instance, construct(instance)).scalarized
        gls_seed = mix64(DESK_MASTER_SEED, instance.seed, SOLVER_ORDER.index(SolverId.GREEDY_LS))
        sa_seed = mix64(DESK_MASTER_SEED, instance.seed, SOLVER_ORDER.index(SolverId.ANNEAL))
        gls = solve_greedy_ls(instance, 500, seed=gls_seed)
        sa = solve_sa(instance, 500, seed=sa_seed)
        assert gls.objective.scalarized >= optimum - TOL, instance.id
        assert gls.objective.scalarized <= construction + TOL, instance.id
        assert sa.objective.scalarized >= optimum - TOL, instance.id
        if sa.objective.scalarized <= optimum + TOL:
            hits += 1
    rate = hits / len(oracle_set)
    assert rate >= 0.9
    print(
        f"criterion 05 PASS: greedy+LS within [optimum, construction] on "
        f"{len(oracle_set)}, anneal optimum hits={hits}/{len(oracle_set)} ({rate:.0%})"
    )


def test_criterion_06_feature_fidelity_against_recomputation():
    sizes = ((2, 2), (3, 3), (4, 2), (5, 5), (3, 8), (8, 3), (10, 4))
    int_idx = [i for i, name in enumerate(FEATURE_NAMES) if name in INT_FEATURES]
    sentinel_rows = 0
    for i in range(200):
        j, m = sizes[i % len(sizes)]
        instance = gen(
            j, m, rddd=i % 3, speeds=1 + i % 3, dist=DISTRIBUTIONS[i % 3], seed=1000 + i
        )
        got = extract_features(instance).as_tuple()
        want = naive_features(instance)
        assert got == pytest.approx(want, abs=1e-12), instance.id
        for idx in int_idx:
            assert got[idx] == want[idx], (instance.id, FEATURE_NAMES[idx])
        if instance.rddd_level == 0:
            assert got[-3:] == (-1.0, -1.0, -1.0), instance.id
            sentinel_rows += 1
        else:
            assert all(v >= 0.0 for v in got[-3:]), instance.id
    print(
        f"criterion 06 PASS: features match recomputation on 200 instances "
        f"(1e-12), sentinels exact on {sentinel_rows} windowless rows"
    )


def test_criterion_07_desk_experiment_trains_useful_model(desk_labeled):
    rows, dropped = desk_labeled
    assert len(rows) + dropped == 1620

    for row in rows:
        resolved = [c.scalarized for c in row.cells if c.scalarized is not None]
        winner = row.cells[SOLVER_ORDER.index(row.label)].scalarized
        assert winner is not None, row.instance_id
        assert winner <= min(resolved) + TOL, row.instance_id

    dataset = to_labeled(rows)
    train, test = stratified_split(dataset, test_fraction=0.2, seed=0)
    baseline = majority_accuracy(train, test)
    model = fit(ModelSpec(family="gradient_boosted_trees", seed=0), train)
    predictions = predict_many(model, test.features)
    accuracy = sum(1 for p, y in zip(predictions, test.labels) if p == y) / test.n_rows
    assert accuracy > baseline
    assert accuracy >= baseline + 0.05

    results = sweep(dataset, k=5, seed=0)
    assert sorted(r.family for r in results) == sorted(FAMILIES)
    assert all(
        results[i].mean_accuracy >= results[i + 1].mean_accuracy
        for i in range(len(results) - 1)
    )
    print(
        f"criterion 07 PASS: rows={len(rows)} dropped={dropped}, labels row-minimal, "
        f"holdout accuracy={accuracy:.4f} vs majority={baseline:.4f} "
        f"(margin {100 * (accuracy - baseline):.1f} points), sweep ranked {len(results)} families"
    )


def test_criterion_08_metric_hand_checks():
    report = report_from_confusion(("a", "b"), [[8, 2], [3, 7]])
    assert abs(report.accuracy - 0.75) <= TOL
    assert abs(report.precision[0] - 8 / 11) <= TOL
    assert abs(report.recall[0] - 0.8) <= TOL
    assert report.unpredicted_labels == ()
    row_sums = [sum(row) for row in report.confusion]
    assert row_sums == [10, 10]
    print(
        "criterion 08 PASS: accuracy=0.75 precision_a=8/11 recall_a=0.8 at 1e-12, "
        "row sums equal class counts"
    )


def test_criterion_09_split_and_fold_contracts(desk_labeled):
    counts = {"bnb": 481, "gls": 906, "sa": 233}
    features, labels = [], []
    row_id = 0
    for label in sorted(counts):
        for _ in range(counts[label]):
            features.append((float(row_id), float(row_id % 7)))
            labels.append(label)
            row_id += 1
    synthetic = LabeledDataset(np.asarray(features), tuple(labels))

    folds = kfold(synthetic, k=5, seed=0)
    assert len(folds) == 5
    seen: set[float] = set()
    for train, val in folds:
        assert train.n_rows + val.n_rows == synthetic.n_rows
        val_ids = {float(x) for x in val.features[:, 0]}
        assert seen.isdisjoint(val_ids)
        seen |= val_ids
        for label, count in counts.items():
            per_fold = val.class_counts().get(label, 0)
            assert abs(per_fold - count / 5) <= 1, label
    assert len(seen) == synthetic.n_rows

    train, test = stratified_split(synthetic, test_fraction=0.2, seed=0)
    train_ids = {float(x) for x in train.features[:, 0]}
    test_ids = {float(x) for x in test.features[:, 0]}
    assert train_ids.isdisjoint(test_ids)
    assert len(train_ids | test_ids) == synthetic.n_rows
    for label, count in counts.items():
        assert abs(test.class_counts().get(label, 0) - 0.2 * count) <= 1, label

    desk = to_labeled(desk_labeled[0])
    desk_counts = desk.class_counts()
    for train, val in kfold(desk, k=5, seed=0):
        for label, count in desk_counts.items():
            assert abs(val.class_counts().get(label, 0) - count / 5) <= 1, label
    train, test = stratified_split(desk, test_fraction=0.2, seed=0)
    assert train.n_rows + test.n_rows == desk.n_rows
    for label, count in desk_counts.items():
        assert abs(test.class_counts().get(label, 0) - 0.2 * count) <= 1, label
    print(
        "criterion 09 PASS: 5 folds disjoint, covering, stratified within 1 row "
        "per class; 80/20 split within 1 row per class (synthetic and desk)"
    )


def test_criterion_10_replayed_pipeline_is_byte_identical(tmp_path):
    grid = BenchmarkGrid(
        jobs=(3,),
        machines=(3,),
        rddd=(0, 1, 2),
        speeds=(1, 3),
        distributions=DISTRIBUTIONS,
        seeds_per_cell=2,
    )
    families = ("gradient_boosted_trees", "logistic", "mlp")

    def run_pass(root):
        root.mkdir()
        configs = enumerate_grid(grid, master_seed=0)
        instance_dir = root / "instances"
        generate_to_dir(configs, instance_dir)
        rows = run_matrix(
            instance_dir,
            budget_override_ms=60_000,
            journal_path=root / "journal.jsonl",
            base_seed=0,
        )
        assert all(
            cell.status is not SolveStatus.UNRESOLVED for row in rows for cell in row.cells
        )
        write_results(rows, root / "results.csv")
        labeled, dropped = label_rows(rows, features_for_dir(instance_dir))
        assert dropped == 0
        write_dataset(labeled, root / "dataset.csv")
        dataset = to_labeled(labeled)
        for family in families:
            save_model(fit(ModelSpec(family=family, seed=0), dataset), root / f"{family}.json")
        return root

    first = run_pass(tmp_path / "pass_a")
    second = run_pass(tmp_path / "pass_b")
    compared = []
    for name in ("results.csv", "dataset.csv", *(f"{family}.json" for family in families)):
        assert (first / name).read_bytes() == (second / name).read_bytes(), name
        compared.append(name)
    print(
        f"criterion 10 PASS: two full passes over 36 instances byte-identical "
        f"({', '.join(compared)})"
    )


def test_criterion_11_gradient_check_and_forest_identity():
    rng = np.random.default_rng(11)
    X = rng.normal(size=(16, 6))
    Y = np.zeros((16, 3))
    Y[np.arange(16), rng.integers(0, 3, size=16)] = 1.0
    params = {
        "W1": rng.normal(scale=0.5, size=(6, 9)),
        "b1": rng.normal(scale=0.1, size=9),
        "W2": rng.normal(scale=0.5, size=(9, 3)),
        "b2": rng.normal(scale=0.1, size=3),
    }
    grads = mlp_gradients(params, X, Y)
    eps = 1e-6
    worst = 0.0
    for key, grad in grads.items():
        flat = params[key].reshape(-1)
        numeric = np.zeros_like(flat)
        for i in range(flat.size):
            saved = flat[i]
            flat[i] = saved + eps
            up = mlp_loss(params, X, Y)
            flat[i] = saved - eps
            down = mlp_loss(params, X, Y)
            flat[i] = saved
            numeric[i] = (up - down) / (2 * eps)
        denom = max(float(np.linalg.norm(numeric)), 1e-12)
        rel = float(np.linalg.norm(grad.reshape(-1) - numeric)) / denom
        worst = max(worst, rel)
        assert rel <= 1e-4, key

    rng = np.random.default_rng(3)
    blobs = np.vstack(
        [rng.normal(center, 1.0, size=(15, 4)) for center in (0.0, 6.0, 12.0)]
    )
    labels = tuple(label for label in ("lo", "mid", "hi") for _ in range(15))
    dataset = LabeledDataset(blobs, labels)
    forest = fit(
        ModelSpec(
            family="random_forest",
            hyperparams={"n_trees": 1, "bootstrap": False, "max_features": 4},
            seed=7,
        ),
        dataset,
    )
    tree = fit(ModelSpec(family="decision_tree", seed=7), dataset)
    queries = rng.uniform(-3.0, 15.0, size=(200, 4))
    assert predict_many(forest, queries) == predict_many(tree, queries)
    print(
        f"criterion 11 PASS: gradient check worst relative error={worst:.2e} "
        f"(<=1e-4), single-tree forest equals decision tree on 200 queries"
    )


def test_desk_label_mix_varies_with_size(desk_labeled):
    rows, dropped = desk_labeled
    assert dropped == 0
    totals = Counter(row.label for row in rows)
    assert set(totals) == set(SolverId)
    assert all(count >= 50 for count in totals.values())

    by_size: dict[tuple[int, int], Counter] = {}
    for row in rows:
        size = (int(row.features.n_jobs), int(row.features.n_machines))
        by_size.setdefault(size, Counter())[row.label] += 1
    assert len(by_size) == 9
    pluralities = {
        size: max(sorted(counts), key=lambda label: counts[label])
        for size, counts in by_size.items()
    }
    assert len(set(pluralities.values())) >= 2
    assert all(len(counts) >= 2 for counts in by_size.values())
    mix = {f"{j}x{m}": pluralities[(j, m)].value for j, m in sorted(pluralities)}
    print(f"desk labels PASS: totals={dict(sorted(totals.items()))} plurality by size={mix}")


def test_desk_selector_beats_fixed_solvers(desk_labeled):
    rows, _ = desk_labeled
    dataset = to_labeled(rows)
    train, _ = stratified_split(dataset, test_fraction=0.2, seed=0)
    model = fit(ModelSpec(family="gradient_boosted_trees", seed=0), train)
    predictions = predict_many(model, dataset.features)

    def achieved(row, solver):
        value = row.cells[SOLVER_ORDER.index(solver)].scalarized
        if value is None:
            value = max(c.scalarized for c in row.cells if c.scalarized is not None)
        return value

    selector_mean = float(
        np.mean([achieved(row, SolverId(p)) for row, p in zip(rows, predictions)])
    )
    fixed_means = {
        solver.value: float(np.mean([achieved(row, solver) for row in rows]))
        for solver in SOLVER_ORDER
    }
    best_fixed = min(fixed_means.values())
    regret = selector_mean - best_fixed
    assert regret <= 0.05
    print(
        f"desk selector PASS: mean objective={selector_mean:.5f} vs best fixed="
        f"{best_fixed:.5f} (regret {regret:+.5f} <= 0.05), fixed means={fixed_means}"
    )
