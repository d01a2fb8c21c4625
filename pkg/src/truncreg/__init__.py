"""Robust truncated-moment estimators for high-dimensional single-index models."""

from .baseline import LassoCD, LassoConfig, lasso_fit
from .distributions import (
    Dataset,
    EllipticalDesign,
    GaussianRadius,
    ParetoDifference,
    SparseSignal,
    UnitConstant,
    one_bit_generate,
    sample_design,
    sample_sparse_signal,
)
from .estimators import (
    DegenerateInputError,
    RecoveryResult,
    TruncatedL1Ball,
    TruncatedNonIsotropic,
    TruncatedNuclearNorm,
    TruncatedSoftThreshold,
    TruncationConfig,
    constrained_estimate,
    nonisotropic_estimate,
    nuclear_soft_threshold,
    robust_direction,
    soft_threshold_estimate,
    transform,
)
from .harness import ExperimentReport, ExperimentSpec, relative_error, run_experiment

__version__ = "0.1.0"

__all__ = [
    "Dataset",
    "DegenerateInputError",
    "EllipticalDesign",
    "ExperimentReport",
    "ExperimentSpec",
    "GaussianRadius",
    "LassoCD",
    "LassoConfig",
    "ParetoDifference",
    "RecoveryResult",
    "SparseSignal",
    "TruncatedL1Ball",
    "TruncatedNonIsotropic",
    "TruncatedNuclearNorm",
    "TruncatedSoftThreshold",
    "TruncationConfig",
    "UnitConstant",
    "constrained_estimate",
    "lasso_fit",
    "nonisotropic_estimate",
    "nuclear_soft_threshold",
    "one_bit_generate",
    "relative_error",
    "robust_direction",
    "run_experiment",
    "sample_design",
    "sample_sparse_signal",
    "soft_threshold_estimate",
    "transform",
]
