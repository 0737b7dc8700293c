"""Many-objective evolutionary optimization of food-energy-water allocation."""

__version__ = "0.1.0"

from .fewn import (
    ConsumptionSummary,
    FewnProblem,
    ResourceTopology,
    decision_dim,
)
from .evo import (
    Individual,
    Population,
    ReferenceVectorSet,
    das_dennis_vectors,
    dominates,
    environmental_selection,
    ideal_point,
    nadir_point,
    nondominated_sort,
    normalize_objectives,
    polynomial_mutation,
    sbx_crossover,
)
from .indicators import (
    ComparisonVerdict,
    ReferenceBox,
    hv_exact,
    hv_monte_carlo,
    normalized_hv,
    rank_sum_test,
    summarize,
)
from .solvers import (
    InverseModel,
    RunResult,
    SolverConfig,
    VariableRoles,
    binary_dva,
    classify_variables,
    direction_vectors,
    fit_inverse_model,
    inverse_generate,
    optimize_subproblem,
    reference_guided_offspring,
    run,
    sample_targets,
)

__all__ = [
    "ConsumptionSummary",
    "FewnProblem",
    "ResourceTopology",
    "decision_dim",
    "Individual",
    "Population",
    "ReferenceVectorSet",
    "das_dennis_vectors",
    "dominates",
    "environmental_selection",
    "ideal_point",
    "nadir_point",
    "nondominated_sort",
    "normalize_objectives",
    "polynomial_mutation",
    "sbx_crossover",
    "ComparisonVerdict",
    "ReferenceBox",
    "hv_exact",
    "hv_monte_carlo",
    "normalized_hv",
    "rank_sum_test",
    "summarize",
    "InverseModel",
    "RunResult",
    "SolverConfig",
    "VariableRoles",
    "binary_dva",
    "classify_variables",
    "direction_vectors",
    "fit_inverse_model",
    "inverse_generate",
    "optimize_subproblem",
    "reference_guided_offspring",
    "run",
    "sample_targets",
]
