"""Layer similarity analysis and redundant-layer pruning for transformer encoders."""

from ._core import (
    AscError,
    DimensionError,
    FormatError,
    IoError,
    Model,
    ParseError,
    PrunePlan,
    SimilarityMatrix,
    ValidationError,
    analyze,
    apply_plan,
    compare_models,
    forward,
    gen_dataset,
    gen_model,
    load_model,
    plan,
    plan_random,
)

__all__ = [
    "AscError",
    "DimensionError",
    "FormatError",
    "IoError",
    "Model",
    "ParseError",
    "PrunePlan",
    "SimilarityMatrix",
    "ValidationError",
    "analyze",
    "apply_plan",
    "compare_models",
    "forward",
    "gen_dataset",
    "gen_model",
    "load_model",
    "plan",
    "plan_random",
]
