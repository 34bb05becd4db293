"""Shape Scaling

Compute-optimal shape scaling for vision transformers.

This package counts parameters and FLOPs of ViT shapes, plans star and grid
sweeps, fits per-dimension scaling laws to run records and scales a small
compute-optimal seed shape jointly along width, depth and MLP dimension.
"""

from .__version__ import __version__
from .config import CostSettings, FitOptions, ToolConfig
from .cost_model import ModelConfig, examples_for_compute, forward_flops, param_count, training_compute
from .exceptions import (
    ConfigurationError,
    DomainError,
    InfeasibleDesignError,
    InputValidationError,
    NonConvergenceError,
    RecordFormatError,
    ShapeScalingError,
)
from .fit import (
    FitReport,
    StarFitReport,
    exponent_stability,
    extrapolation_check,
    fit_dimension,
    fit_star,
    star_extrapolation_check,
)
from .law import LawParams, eval_law, frontier_constants, minimizer_xhat, scaling_exponent
from .models import RunRecord, Shape
from .scaler import ScalingPlan, equal_weights, frontier_table, optimize_shape
from .sweeps import plan_grid, plan_star, select_seed_shape

__all__ = [
    "CostSettings",
    "FitOptions",
    "ToolConfig",
    "ModelConfig",
    "param_count",
    "forward_flops",
    "training_compute",
    "examples_for_compute",
    "LawParams",
    "eval_law",
    "minimizer_xhat",
    "scaling_exponent",
    "frontier_constants",
    "FitReport",
    "fit_dimension",
    "extrapolation_check",
    "exponent_stability",
    "StarFitReport",
    "fit_star",
    "star_extrapolation_check",
    "Shape",
    "RunRecord",
    "plan_star",
    "plan_grid",
    "select_seed_shape",
    "ScalingPlan",
    "equal_weights",
    "optimize_shape",
    "frontier_table",
    "ShapeScalingError",
    "InputValidationError",
    "DomainError",
    "RecordFormatError",
    "InfeasibleDesignError",
    "NonConvergenceError",
    "ConfigurationError",
    "__version__",
]
