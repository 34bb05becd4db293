"""
Joint scaling of a seed shape.

A compute increase by a factor tau is split into per-dimension shares
tau**w_k, and each dimension responds along its own power law, so

    x_k = x0_k * tau ** (w_k * s_k).

Real-valued shapes are rounded once, at the end, and the residual budget is
spent on training duration.
"""

import logging
import math
from typing import Dict, List, Mapping, Optional, Sequence

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .config import CostSettings
from .cost_model import examples_for_compute, forward_flops, param_count, training_compute
from .exceptions import InfeasibleDesignError, InputValidationError
from .models import DIMENSIONS, Shape, check_dimension

logger = logging.getLogger(__name__)

SCALING_RULE = "x_k = x0_k * (target_compute / t0) ** (w_k * s_k)"


def equal_weights(dimensions: Sequence[str]) -> Dict[str, float]:
    """Allocation weights of 1/D for each of ``dimensions``."""
    return {name: 1.0 / len(dimensions) for name in dimensions}


class ScalingPlan(BaseModel):
    """Seed shape, seed compute, exponents, allocation weights and target compute."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    x0: Shape
    t0: float = Field(..., gt=0, description="GFLOPs at which x0 is compute-optimal")
    s: Dict[str, float] = Field(..., min_length=1, description="Per-dimension scaling exponents")
    w: Dict[str, float] = Field(..., min_length=1, description="Per-dimension compute shares, summing to 1")
    target_compute: float = Field(..., gt=0, description="GFLOPs")

    @model_validator(mode="after")
    def _check_plan(self) -> "ScalingPlan":
        for name, value in self.s.items():
            check_dimension(name)
            if not value > 0:
                raise ValueError(f"exponent s[{name}] must be > 0, got {value}")
        if set(self.w) != set(self.s):
            raise ValueError(f"weights {sorted(self.w)} must cover the exponents {sorted(self.s)}")
        for name, value in self.w.items():
            if not value > 0:
                raise ValueError(f"weight w[{name}] must be > 0, got {value}")
        total = math.fsum(self.w.values())
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"weights must sum to 1, got {total}")
        if self.target_compute < self.t0:
            raise ValueError(
                f"target_compute {self.target_compute:g} is below t0 {self.t0:g}; downscaling is unsupported"
            )
        return self

    @property
    def tau(self) -> float:
        return self.target_compute / self.t0

    def at(self, target_compute: float) -> "ScalingPlan":
        return ScalingPlan(x0=self.x0, t0=self.t0, s=self.s, w=self.w, target_compute=target_compute)


class ScaledModel(BaseModel):
    """A rounded shape with the training duration that spends the budget."""

    model_config = ConfigDict(frozen=True)

    real_shape: Dict[str, float]
    rounded_shape: Shape
    target_compute: float = Field(..., gt=0)
    training_examples: int = Field(..., ge=1)
    achieved_compute: float = Field(..., gt=0)
    per_example_compute: float = Field(..., gt=0, description="Training GFLOPs of one example")
    param_count: int = Field(..., ge=1)

    @model_validator(mode="after")
    def _check_budget(self) -> "ScaledModel":
        if self.achieved_compute > self.target_compute:
            raise ValueError(
                f"achieved compute {self.achieved_compute!r} exceeds target {self.target_compute!r}"
            )
        shortfall = self.target_compute - self.achieved_compute
        if shortfall >= self.per_example_compute + 1e-9 * self.target_compute:
            raise ValueError("achieved compute is more than one example below the target")
        return self


def scale_shape(plan: ScalingPlan) -> Dict[str, float]:
    """
    Real-valued shape for ``plan.target_compute``.

    Dimensions without an exponent keep their seed value; tau = 1 returns the
    seed exactly.
    """
    log_tau = math.log(plan.tau)
    scaled: Dict[str, float] = {}
    for name in DIMENSIONS:
        seed = float(getattr(plan.x0, name))
        if name in plan.s:
            scaled[name] = seed * math.exp(plan.w[name] * plan.s[name] * log_tau)
        else:
            scaled[name] = seed
    return scaled


def _half_up(value: float, multiple: int) -> int:
    return max(multiple, multiple * int(math.floor(value / multiple + 0.5)))


def round_shape(values: Mapping[str, float], head_count: int = 16, mlp_multiple: int = 16) -> Shape:
    """
    Round a real shape to a valid architecture.

    Width goes to the nearest multiple of ``head_count``, MLP dim to the
    nearest multiple of ``mlp_multiple`` and depth to the nearest integer,
    ties rounding up and every dimension at least one multiple.
    """
    for name in DIMENSIONS:
        if not values[name] > 0:
            raise InputValidationError(f"{name} must be > 0, got {values[name]}", invariant=f"{name} > 0")
    if head_count < 1 or mlp_multiple < 1:
        raise InputValidationError("rounding multiples must be >= 1", invariant="multiple >= 1")
    return Shape(
        width=_half_up(values["width"], head_count),
        depth=_half_up(values["depth"], 1),
        mlp_dim=_half_up(values["mlp_dim"], mlp_multiple),
    )


def reconcile_examples(
    shape: Shape,
    target_compute: float,
    cost: Optional[CostSettings] = None,
    real_shape: Optional[Mapping[str, float]] = None,
) -> ScaledModel:
    """
    Spend ``target_compute`` on training ``shape`` for as many examples as fit.

    Raises:
        InfeasibleDesignError: If the budget does not cover a single example.
    """
    cost = cost or CostSettings()
    config = cost.config_for(shape)
    if real_shape is None:
        real_shape = {name: float(value) for name, value in shape.as_dict().items()}
    per_example = forward_flops(config) * cost.flops_multiplier
    examples = examples_for_compute(config, target_compute, cost.flops_multiplier)
    if examples < 1:
        raise InfeasibleDesignError(
            f"target {target_compute:g} GFLOPs is below one example of {shape} "
            f"({per_example:g} GFLOPs)"
        )
    return ScaledModel(
        real_shape=dict(real_shape),
        rounded_shape=shape,
        target_compute=target_compute,
        training_examples=examples,
        achieved_compute=training_compute(config, examples, cost.flops_multiplier),
        per_example_compute=per_example,
        param_count=param_count(config),
    )


def optimize_shape(
    plan: ScalingPlan, cost: Optional[CostSettings] = None, mlp_multiple: int = 16
) -> ScaledModel:
    """Scale, round and reconcile in one step."""
    cost = cost or CostSettings()
    real = scale_shape(plan)
    rounded = round_shape(real, head_count=cost.num_heads, mlp_multiple=mlp_multiple)
    model = reconcile_examples(rounded, plan.target_compute, cost, real_shape=real)
    logger.info(
        "Scaled %s by tau=%.4g to %s (%d params, %d examples)",
        plan.x0, plan.tau, rounded, model.param_count, model.training_examples,
    )
    return model


class FrontierRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    compute_gflops: float
    width: int
    depth: int
    mlp_dim: int
    params: int
    examples: int


class FrontierTable(BaseModel):
    """Predicted compute-optimal shapes along a compute grid."""

    model_config = ConfigDict(frozen=True)

    rows: List[FrontierRow]
    monotone: bool = Field(..., description="Every dimension is nondecreasing down the table")
    metadata: Dict[str, str] = Field(default_factory=dict)


def frontier_table(
    x0: Shape,
    t0: float,
    s: Mapping[str, float],
    w: Optional[Mapping[str, float]],
    compute_grid: Sequence[float],
    cost: Optional[CostSettings] = None,
    mlp_multiple: int = 16,
) -> FrontierTable:
    """
    One scaled, rounded model per compute value.

    Rows round independently; if rounding breaks monotonicity across rows the
    table is flagged, not repaired.

    Raises:
        InputValidationError: If the grid is empty, not ascending or dips below ``t0``.
    """
    cost = cost or CostSettings()
    grid = [float(value) for value in compute_grid]
    if not grid:
        raise InputValidationError("compute grid must not be empty", invariant="grid nonempty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise InputValidationError(f"compute grid {grid} is not ascending", invariant="grid ascending")
    if grid[0] < t0:
        raise InputValidationError(
            f"compute grid starts at {grid[0]:g} GFLOPs, below t0={t0:g}",
            invariant="grid >= t0",
        )
    weights = dict(w) if w is not None else equal_weights(list(s))

    base = ScalingPlan(x0=x0, t0=t0, s=dict(s), w=weights, target_compute=t0)
    rows = []
    for compute in grid:
        model = optimize_shape(base.at(compute), cost, mlp_multiple)
        shape = model.rounded_shape
        rows.append(
            FrontierRow(
                compute_gflops=compute,
                width=shape.width,
                depth=shape.depth,
                mlp_dim=shape.mlp_dim,
                params=model.param_count,
                examples=model.training_examples,
            )
        )

    monotone = all(
        getattr(high, name) >= getattr(low, name)
        for low, high in zip(rows, rows[1:])
        for name in DIMENSIONS
    )
    if not monotone:
        logger.warning("Rounding broke per-dimension monotonicity across frontier rows")

    metadata = {
        "scaling_rule": SCALING_RULE,
        "x0": ",".join(str(v) for v in x0.as_tuple()),
        "t0_gflops": repr(float(t0)),
        "exponents": ",".join(f"{k}={s[k]!r}" for k in DIMENSIONS if k in s),
        "weights": ",".join(f"{k}={weights[k]!r}" for k in DIMENSIONS if k in weights),
        "monotone": str(monotone).lower(),
    }
    return FrontierTable(rows=rows, monotone=monotone, metadata=metadata)


def growth_factors(plan: ScalingPlan) -> Dict[str, float]:
    """Per-dimension real growth factor x_k / x0_k before rounding."""
    scaled = scale_shape(plan)
    return {name: scaled[name] / getattr(plan.x0, name) for name in DIMENSIONS}
