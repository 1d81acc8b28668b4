"""Extract the 17-dimension feature vector that drives solver selection.

Run with `python demos/inspect_features.py`. Prints full vectors for a few
contrasting instances and points out the windowless sentinels.
"""

from __future__ import annotations

from greenjsp.features import FEATURE_NAMES, INT_FEATURES, extract_features
from greenjsp.generation import GeneratorConfig, generate_instance


def show(rddd_level: int, n_speeds: int, seed: int) -> None:
    instance = generate_instance(
        GeneratorConfig(
            n_jobs=4,
            n_machines=3,
            rddd_level=rddd_level,
            n_speeds=n_speeds,
            distribution="normal",
            seed=seed,
        )
    )
    vector = extract_features(instance)
    print(f"\n{instance.id}")
    for name, value in zip(FEATURE_NAMES, vector.as_tuple()):
        rendered = f"{int(value)}" if name in INT_FEATURES or value == -1.0 else f"{value:.4f}"
        print(f"  {name:12s} {rendered}")


# Size and speed counts come straight off the instance; the p_*/e_* block
# summarizes the time and energy tables; mk/en bounds bracket what any
# schedule can achieve; the last three describe time windows.
show(rddd_level=2, n_speeds=3, seed=1)

# Without windows the three window features are pinned to -1 so a model can
# tell "no windows" apart from "tight windows".
show(rddd_level=0, n_speeds=1, seed=2)

# Per-job windows (level 1) fall between: tardiness is scored on job ends,
# and the window ratios are computed per job instead of per task.
show(rddd_level=1, n_speeds=2, seed=3)
