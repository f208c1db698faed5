from .cache import EvaluationCache
from .powell import (
    Budget,
    FunctionEvaluator,
    PowellState,
    line_search,
    powell_minimize,
)
from .penalty import (
    EvalResult,
    OptimizerConfig,
    PenaltyConfig,
    ScenarioEvaluator,
    penalty_value,
)
from .repetitive import Plan, repetitive_step, warm_start_from

__all__ = [
    "EvaluationCache",
    "Budget",
    "FunctionEvaluator",
    "PowellState",
    "line_search",
    "powell_minimize",
    "EvalResult",
    "OptimizerConfig",
    "PenaltyConfig",
    "ScenarioEvaluator",
    "penalty_value",
    "Plan",
    "repetitive_step",
    "warm_start_from",
]
