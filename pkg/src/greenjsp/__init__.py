"""Energy-aware job-shop benchmarking, solving, and learned solver selection."""

from .core import (
    CyclicPrecedence,
    InfeasibleInput,
    Instance,
    InvalidInstance,
    ObjectiveBounds,
    ObjectiveBreakdown,
    RdddLevel,
    Schedule,
    SolveOutcome,
    SolveStatus,
    SolverId,
    check_feasibility,
    decode_schedule,
    load_instance,
    normalized_objective,
    objective_bounds,
    objective_components,
    save_instance,
    validate_instance,
)
from .features import FEATURE_NAMES, FeatureVector, extract_features
from .generation import (
    DESK_GRID,
    REFERENCE_GRID,
    BenchmarkGrid,
    BudgetPolicy,
    GeneratorConfig,
    UnknownCharacteristicValue,
    allocate_budget,
    budget_terms,
    enumerate_grid,
    generate_instance,
)

__version__ = "0.1.0"
