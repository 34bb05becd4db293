"""
Sweep design and seed-shape selection.

A star sweep varies one dimension at a time below a large centre shape and
feeds the per-dimension law fits. A grid sweep trains the cross product of
small shapes and locates the small compute-optimal seed shape that joint
scaling starts from.
"""

import itertools
import logging
import math
from typing import Dict, List, Literal, Mapping, Optional, Sequence, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from . import presets
from .config import CostSettings
from .cost_model import examples_for_compute, training_compute
from .exceptions import InfeasibleDesignError, InputValidationError
from .models import DIMENSIONS, RunRecord, Shape, check_dimension

logger = logging.getLogger(__name__)

RATIO_TOLERANCE = 0.05
MIN_GRID_POINTS = 3
MIN_STAR_POINTS = 4


class SweepRun(BaseModel):
    """One training job of a sweep, evaluated at each of ``examples``."""

    model_config = ConfigDict(frozen=True)

    shape: Shape
    dimension_under_test: Optional[str] = None
    examples: List[int] = Field(..., min_length=1)


def _check_ascending(name: str, values: Sequence[float]) -> None:
    if any(v <= 0 for v in values):
        raise ValueError(f"{name} values must be strictly positive, got {list(values)}")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ValueError(f"{name} values must be strictly ascending, got {list(values)}")


class StarSweepSpec(BaseModel):
    """One-dimension-at-a-time sweep below a centre shape."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["star"] = "star"
    center: Shape
    grids: Dict[str, List[int]] = Field(..., min_length=1)
    checkpoints: List[int] = Field(..., min_length=1, description="Example counts evaluated per run")
    step_factors: Optional[Dict[str, float]] = Field(
        default=None, description="Target ratio between consecutive grid values"
    )
    cost: CostSettings = Field(default_factory=CostSettings)

    @field_validator("checkpoints")
    @classmethod
    def _check_checkpoints(cls, value: List[int]) -> List[int]:
        _check_ascending("checkpoint", value)
        return value

    @model_validator(mode="after")
    def _check_grids(self) -> "StarSweepSpec":
        for name, grid in self.grids.items():
            check_dimension(name)
            if not grid:
                raise ValueError(f"{name} grid must not be empty")
            _check_ascending(f"{name} grid", grid)
            center = getattr(self.center, name)
            if grid[-1] >= center:
                raise ValueError(
                    f"{name} grid value {grid[-1]} must stay below the centre value {center}"
                )
            if self.step_factors is not None and name in self.step_factors:
                step = self.step_factors[name]
                for low, high in zip(grid, grid[1:]):
                    if abs(high / low / step - 1.0) > RATIO_TOLERANCE:
                        raise ValueError(
                            f"{name} grid ratio {high}/{low} deviates more than "
                            f"{RATIO_TOLERANCE:.0%} from step factor {step}"
                        )
        return self

    def runs(self) -> List[SweepRun]:
        """Runs in dimension order, ascending grid values within each dimension."""
        result = []
        for name in DIMENSIONS:
            for value in self.grids.get(name, []):
                result.append(
                    SweepRun(
                        shape=self.center.replace(**{name: value}),
                        dimension_under_test=name,
                        examples=list(self.checkpoints),
                    )
                )
        return result

    @property
    def total_runs(self) -> int:
        return sum(len(grid) for grid in self.grids.values())

    @property
    def estimated_compute(self) -> float:
        """GFLOPs of all runs; checkpoints are evaluations of one run, so only the longest counts."""
        return _estimated_compute(self.runs(), self.cost)


class GridSweepSpec(BaseModel):
    """Cross product of small shapes, trained for a fixed duration or to shared budgets."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["grid"] = "grid"
    ranges: Dict[str, List[int]]
    examples_per_run: Optional[int] = Field(default=None, ge=1)
    compute_budgets: Optional[List[float]] = Field(
        default=None, description="GFLOPs budgets every shape is trained to (IsoFlop design)"
    )
    cost: CostSettings = Field(default_factory=CostSettings)

    @model_validator(mode="after")
    def _check_ranges(self) -> "GridSweepSpec":
        if set(self.ranges) != set(DIMENSIONS):
            raise ValueError(f"grid ranges must cover exactly {DIMENSIONS}, got {sorted(self.ranges)}")
        for name, values in self.ranges.items():
            if len(values) < MIN_GRID_POINTS:
                raise ValueError(
                    f"{name} range needs at least {MIN_GRID_POINTS} values for interior selection"
                )
            _check_ascending(f"{name} range", values)
        if (self.examples_per_run is None) == (self.compute_budgets is None):
            raise ValueError("exactly one of examples_per_run and compute_budgets must be set")
        if self.compute_budgets is not None:
            _check_ascending("compute budget", self.compute_budgets)
        return self

    def shapes(self) -> List[Shape]:
        """Cross product in width-major order."""
        ordered = [self.ranges[name] for name in DIMENSIONS]
        return [
            Shape(width=w, depth=d, mlp_dim=m) for w, d, m in itertools.product(*ordered)
        ]

    def runs(self) -> List[SweepRun]:
        if self.examples_per_run is not None:
            return [SweepRun(shape=shape, examples=[self.examples_per_run]) for shape in self.shapes()]

        result = []
        for shape in self.shapes():
            config = self.cost.config_for(shape)
            for budget in self.compute_budgets:
                examples = examples_for_compute(config, budget, self.cost.flops_multiplier)
                if examples < 1:
                    raise InfeasibleDesignError(
                        f"budget {budget:g} GFLOPs is below one example of shape {shape}"
                    )
                result.append(SweepRun(shape=shape, examples=[examples]))
        return result

    @property
    def total_runs(self) -> int:
        count = math.prod(len(values) for values in self.ranges.values())
        if self.compute_budgets is not None:
            count *= len(self.compute_budgets)
        return count

    @property
    def estimated_compute(self) -> float:
        return _estimated_compute(self.runs(), self.cost)


SweepSpec = Union[StarSweepSpec, GridSweepSpec]


def _estimated_compute(runs: Sequence[SweepRun], cost: CostSettings) -> float:
    total = 0.0
    for run in runs:
        total += training_compute(cost.config_for(run.shape), max(run.examples), cost.flops_multiplier)
    return total


# ============================================================================
# Planning
# ============================================================================

def _per_dimension(name: str, value: Union[float, Mapping[str, float]], dimension: str) -> float:
    if isinstance(value, Mapping):
        if dimension not in value:
            raise InputValidationError(f"{name} has no entry for {dimension}", invariant=f"{name} per dimension")
        return float(value[dimension])
    return float(value)


def _round_to(value: float, multiple: int) -> int:
    return multiple * int(math.floor(value / multiple + 0.5))


def _star_grid(
    dimension: str,
    center_value: int,
    step: float,
    points: int,
    ceiling: float,
    multiple: int,
) -> List[int]:
    top = ceiling * center_value
    cap = multiple * int(math.floor(top / multiple))
    grid = []
    for i in range(points):
        raw = top / step ** (points - 1 - i)
        grid.append(min(_round_to(raw, multiple), cap))

    if grid[0] < multiple:
        raise InfeasibleDesignError(
            f"centre {dimension}={center_value} is too small for {points} points at step {step}: "
            f"smallest value rounds to {grid[0]}",
            dimension=dimension,
        )
    for low, high in zip(grid, grid[1:]):
        if high <= low:
            raise InfeasibleDesignError(
                f"{dimension} grid {grid} collapses after rounding to multiples of {multiple}",
                dimension=dimension,
            )
        if abs(high / low / step - 1.0) > RATIO_TOLERANCE:
            raise InfeasibleDesignError(
                f"{dimension} grid {grid} cannot keep a step of {step} within "
                f"{RATIO_TOLERANCE:.0%} after rounding",
                dimension=dimension,
            )
    return grid


def plan_star(
    center: Shape,
    step_factor: Union[float, Mapping[str, float]] = 1.2,
    points_per_dim: int = 6,
    ceiling_ratio: Union[float, Mapping[str, float]] = 0.85,
    checkpoints: Sequence[int] = presets.STAR_CHECKPOINTS,
    cost: Optional[CostSettings] = None,
    dimensions: Sequence[str] = DIMENSIONS,
    mlp_multiple: int = 16,
) -> StarSweepSpec:
    """
    Plan an exponentially spaced star sweep below ``center``.

    For each dimension the grid's largest value is ``ceiling_ratio`` times the
    centre value and each smaller value is one ``step_factor`` below the next.
    Widths round to multiples of the head count, MLP dims to ``mlp_multiple``
    and depths to integers; rounding never moves a value above the ceiling.

    Raises:
        InputValidationError: On an invalid step, ceiling or point count.
        InfeasibleDesignError: If the centre is too small for the requested grid.
    """
    cost = cost or CostSettings()
    if points_per_dim < MIN_STAR_POINTS:
        raise InputValidationError(
            f"points_per_dim must be >= {MIN_STAR_POINTS}, got {points_per_dim}",
            invariant=f"points_per_dim >= {MIN_STAR_POINTS}",
        )
    multiples = {"width": cost.num_heads, "depth": 1, "mlp_dim": mlp_multiple}

    grids: Dict[str, List[int]] = {}
    steps: Dict[str, float] = {}
    for dimension in dimensions:
        check_dimension(dimension)
        step = _per_dimension("step_factor", step_factor, dimension)
        ceiling = _per_dimension("ceiling_ratio", ceiling_ratio, dimension)
        if not step > 1:
            raise InputValidationError(f"step_factor must be > 1, got {step}", invariant="step_factor > 1")
        if not 0 < ceiling < 1:
            raise InputValidationError(
                f"ceiling_ratio must lie in (0, 1), got {ceiling}", invariant="0 < ceiling_ratio < 1"
            )
        grids[dimension] = _star_grid(
            dimension, getattr(center, dimension), step, points_per_dim, ceiling, multiples[dimension]
        )
        steps[dimension] = step

    spec = StarSweepSpec(
        center=center,
        grids=grids,
        checkpoints=list(checkpoints),
        step_factors=steps,
        cost=cost,
    )
    logger.info(
        "Planned star sweep around %s: %d runs, %d checkpoints each",
        center, spec.total_runs, len(spec.checkpoints),
    )
    return spec


def published_star_design(cost: Optional[CostSettings] = None) -> StarSweepSpec:
    """The published star sweep grids and checkpoints, verbatim."""
    return StarSweepSpec(
        center=presets.STAR_CENTER,
        grids={name: list(values) for name, values in presets.STAR_GRIDS.items()},
        checkpoints=list(presets.STAR_CHECKPOINTS),
        cost=cost or CostSettings(),
    )


def plan_grid(
    ranges: Mapping[str, Sequence[int]],
    examples_per_run: Optional[int] = None,
    compute_budgets: Optional[Sequence[float]] = None,
    cost: Optional[CostSettings] = None,
) -> GridSweepSpec:
    """
    Plan a cross-product grid sweep.

    Pass ``examples_per_run`` to train every shape for the same duration, or
    ``compute_budgets`` to train every shape to each shared budget.

    Raises:
        InputValidationError: If a range has fewer than three values, is not
            ascending, or the duration is not specified exactly once.
    """
    for name in DIMENSIONS:
        if name not in ranges:
            raise InputValidationError(f"missing range for {name}", invariant="ranges cover every dimension")
        values = list(ranges[name])
        if len(values) < MIN_GRID_POINTS:
            raise InputValidationError(
                f"{name} range {values} has fewer than {MIN_GRID_POINTS} values; "
                "interior selection is impossible",
                invariant=f"len(range) >= {MIN_GRID_POINTS}",
            )
        if any(b <= a for a, b in zip(values, values[1:])):
            raise InputValidationError(f"{name} range {values} is not ascending", invariant="range ascending")
    if (examples_per_run is None) == (compute_budgets is None):
        raise InputValidationError(
            "exactly one of examples_per_run and compute_budgets must be given",
            invariant="single duration rule",
        )

    spec = GridSweepSpec(
        ranges={name: [int(v) for v in ranges[name]] for name in DIMENSIONS},
        examples_per_run=examples_per_run,
        compute_budgets=list(compute_budgets) if compute_budgets is not None else None,
        cost=cost or CostSettings(),
    )
    logger.info("Planned grid sweep: %d runs", spec.total_runs)
    return spec


def published_grid_design(cost: Optional[CostSettings] = None) -> GridSweepSpec:
    """The published 4x4x4 grid sweep at a fixed duration."""
    return plan_grid(presets.GRID_RANGES, examples_per_run=presets.SEED_EXAMPLES, cost=cost)


# ============================================================================
# Pareto frontier and seed selection
# ============================================================================

def _check_single_metric(records: Sequence[RunRecord]) -> None:
    names = {record.metric_name for record in records}
    if len(names) > 1:
        raise InputValidationError(
            f"records mix metrics {sorted(names)}", invariant="records share metric_name"
        )


def pareto_frontier(records: Sequence[RunRecord]) -> List[RunRecord]:
    """
    Records not dominated in (compute, metric_value), both minimised.

    Output is sorted by compute ascending with strictly decreasing metric.
    Exact ties keep the lexicographically smallest shape.
    """
    if not records:
        return []
    _check_single_metric(records)
    frontier: List[RunRecord] = []
    for record in sorted(records, key=RunRecord.sort_key):
        # sorted by compute then metric, so a kept record never shares compute with its predecessor
        if not frontier or record.metric_value < frontier[-1].metric_value:
            frontier.append(record)
    return frontier


class BinningSpec(BaseModel):
    """How compute is split into the budgets seed selection compares shapes at."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    edges: Optional[List[float]] = Field(
        default=None, description="Explicit GFLOPs budgets; defaults to the distinct record computes"
    )
    rel_tolerance: float = Field(
        default=1e-6, ge=0, description="Computes within this relative distance share a bin"
    )
    min_run: int = Field(default=2, ge=1, description="Bins a conclusive seed must win in a row")

    @field_validator("edges")
    @classmethod
    def _check_edges(cls, value: Optional[List[float]]) -> Optional[List[float]]:
        if value is not None:
            _check_ascending("bin edge", value)
        return value


class BinWinner(BaseModel):
    model_config = ConfigDict(frozen=True)

    budget: float
    shape: Optional[Shape] = None
    compute: Optional[float] = None
    metric_value: Optional[float] = None


class SeedSelection(BaseModel):
    """The small compute-optimal seed shape and the least compute it is optimal for."""

    model_config = ConfigDict(frozen=True)

    x0: Shape
    t0: float = Field(..., gt=0, description="GFLOPs")
    on_boundary: Dict[str, bool]
    pareto_set: List[RunRecord]
    bins_won: int
    conclusive: bool
    winners: List[BinWinner]
    notes: List[str] = Field(default_factory=list)


def _compute_bins(records: Sequence[RunRecord], binning: BinningSpec) -> List[float]:
    if binning.edges is not None:
        return list(binning.edges)
    bins: List[float] = []
    start = None
    for compute in sorted({record.compute for record in records}):
        if start is None or compute > start * (1.0 + binning.rel_tolerance):
            start = compute
            bins.append(compute)
        else:
            bins[-1] = compute
    return bins


def _winner_key(record: RunRecord) -> Tuple[float, float, Tuple[int, int, int]]:
    return (record.metric_value, record.compute, record.shape.as_tuple())


def select_seed_shape(
    records: Sequence[RunRecord], compute_bins: Optional[BinningSpec] = None
) -> SeedSelection:
    """
    Pick the shape that is loss-minimal over the widest contiguous compute range.

    Each bin is a budget: a shape's loss there is its best record with
    compute at most the budget. The longest run of consecutive bins won by one
    shape decides the seed (earliest run on ties); ``t0`` is the least compute
    among that shape's winning records. A seed at the edge of any swept
    dimension, or one that wins fewer than ``min_run`` bins, is non-conclusive.

    Raises:
        InputValidationError: On empty input, mixed metrics or fewer than two bins.
    """
    binning = compute_bins or BinningSpec()
    if not records:
        raise InputValidationError("no records to select a seed from", invariant="records nonempty")
    _check_single_metric(records)

    budgets = _compute_bins(records, binning)
    if len(budgets) < 2:
        raise InputValidationError(
            f"seed selection needs at least 2 compute bins, got {len(budgets)}",
            invariant="compute bins >= 2",
        )

    by_shape: Dict[Tuple[int, int, int], List[RunRecord]] = {}
    for record in sorted(records, key=RunRecord.sort_key):
        by_shape.setdefault(record.shape.as_tuple(), []).append(record)

    winners: List[Optional[RunRecord]] = []
    for budget in budgets:
        candidates = []
        for shape_records in by_shape.values():
            affordable = [r for r in shape_records if r.compute <= budget]
            if affordable:
                candidates.append(min(affordable, key=_winner_key))
        winners.append(min(candidates, key=_winner_key) if candidates else None)

    best_start, best_length = 0, 0
    i = 0
    while i < len(winners):
        if winners[i] is None:
            i += 1
            continue
        j = i
        while j + 1 < len(winners) and winners[j + 1] is not None and (
            winners[j + 1].shape == winners[i].shape
        ):
            j += 1
        if j - i + 1 > best_length:
            best_start, best_length = i, j - i + 1
        i = j + 1
    if best_length == 0:
        raise InputValidationError("no records fall within any compute bin", invariant="bins cover records")

    run = winners[best_start:best_start + best_length]
    x0 = run[0].shape
    t0 = min(record.compute for record in run)

    on_boundary = {}
    for name in DIMENSIONS:
        values = {record.dimension_value(name) for record in records}
        on_boundary[name] = getattr(x0, name) in (min(values), max(values))

    notes = []
    flagged = [name for name, flag in on_boundary.items() if flag]
    if flagged:
        notes.append(
            f"seed lies on the sweep boundary in {', '.join(flagged)}; "
            "a larger range is needed to confirm it is compute-optimal"
        )
    if best_length < binning.min_run:
        notes.append(
            f"seed wins {best_length} contiguous bin(s); at least {binning.min_run} required"
        )
    conclusive = not notes

    selection = SeedSelection(
        x0=x0,
        t0=t0,
        on_boundary=on_boundary,
        pareto_set=pareto_frontier(records),
        bins_won=best_length,
        conclusive=conclusive,
        winners=[
            BinWinner(budget=budget)
            if record is None
            else BinWinner(
                budget=budget, shape=record.shape, compute=record.compute, metric_value=record.metric_value
            )
            for budget, record in zip(budgets, winners)
        ],
        notes=notes,
    )
    if conclusive:
        logger.info("Selected seed shape %s at t0=%.6g GFLOPs (%d bins)", x0, t0, best_length)
    else:
        logger.warning("Seed selection %s is non-conclusive: %s", x0, "; ".join(notes))
    return selection
