"""
Synthetic ground truth.

A decomposable loss over (width, depth, mlp_dim) whose restriction to any one
dimension is exactly the per-dimension law, plus seeded noise and exhaustive
optimizers used to check closed forms, fits and seed selection.
"""

import logging
from enum import Enum
from typing import Dict, List, Mapping, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from . import presets
from .config import CostSettings, ExponentPreset
from .cost_model import training_compute
from .exceptions import DomainError, InputValidationError
from .law import LawParams
from .models import DIMENSIONS, RunRecord, Shape, check_dimension
from .sweeps import StarSweepSpec, SweepSpec

logger = logging.getLogger(__name__)

ShapeLike = Union[Shape, Mapping[str, float]]

# Model-size exponents of the default ground truth; shape exponents b follow from c / s - a.
DEFAULT_MODEL_EXPONENTS: Dict[str, float] = {"width": 1.0, "depth": 0.6, "mlp_dim": 0.5}
# Size-term level of each dimension at the anchor, in units of term_level.
DEFAULT_TERM_WEIGHTS: Dict[str, float] = {"width": 1.0, "depth": 2.0, "mlp_dim": 2.0}


class DimensionTerms(BaseModel):
    """Coefficients of one dimension's terms in the decomposable loss."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    alpha: float = Field(..., gt=0)
    a: float = Field(..., gt=0)
    beta: float = Field(..., gt=0)
    b: float = Field(..., gt=0)


class GroundTruth(BaseModel):
    """
    Decomposable loss

        sum_k alpha_k x_k^-a_k + (sum_k beta_k x_k^b_k + xi) t^-c + eps_inf

    with the data exponent ``c`` shared across dimensions.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    dims: Dict[str, DimensionTerms]
    c: float = Field(..., gt=0)
    xi: float = Field(..., gt=0)
    eps_inf: float = Field(..., gt=0)

    @field_validator("dims")
    @classmethod
    def _cover_dimensions(cls, value: Dict[str, DimensionTerms]) -> Dict[str, DimensionTerms]:
        for name in value:
            check_dimension(name)
        if set(value) != set(DIMENSIONS):
            raise ValueError(f"ground truth must define every dimension {DIMENSIONS}")
        return value

    def restrict(self, dimension: str, pinned: ShapeLike) -> LawParams:
        """
        Per-dimension law obtained by pinning every other dimension.

        Pinned dimensions fold into the shape-independent compute coefficient
        and the irreducible loss.
        """
        check_dimension(dimension)
        values = _shape_values(pinned)
        xi = self.xi
        eps = self.eps_inf
        for name, terms in self.dims.items():
            if name == dimension:
                continue
            x = values[name]
            xi += terms.beta * float(np.exp(terms.b * np.log(x)))
            eps += terms.alpha * float(np.exp(-terms.a * np.log(x)))
        own = self.dims[dimension]
        return LawParams(alpha=own.alpha, a=own.a, beta=own.beta, b=own.b, c=self.c, xi=xi, eps=eps)

    def scaling_exponents(self) -> Dict[str, float]:
        return {name: self.c / (terms.a + terms.b) for name, terms in self.dims.items()}

    def scaled(self, kappa: float) -> "GroundTruth":
        """Ground truth of the metric ``kappa * f``."""
        if not kappa > 0:
            raise DomainError("kappa", kappa)
        dims = {
            name: terms.model_copy(update={"alpha": terms.alpha * kappa, "beta": terms.beta * kappa})
            for name, terms in self.dims.items()
        }
        return GroundTruth(dims=dims, c=self.c, xi=self.xi * kappa, eps_inf=self.eps_inf * kappa)

    @classmethod
    def from_law(cls, p: LawParams, dimension: str, filler: float = 1e-12) -> "GroundTruth":
        """
        Embed a single-dimension law; the other dimensions get ``filler`` coefficients.

        Restricting the result to ``dimension`` at unit values of the other
        dimensions returns ``p`` up to ``filler``.
        """
        check_dimension(dimension)
        dims = {
            name: DimensionTerms(alpha=filler, a=1.0, beta=filler, b=1.0) for name in DIMENSIONS
        }
        dims[dimension] = DimensionTerms(alpha=p.alpha, a=p.a, beta=p.beta, b=p.b)
        return cls(dims=dims, c=p.c, xi=p.xi, eps_inf=p.eps)


class NoiseModel(str, Enum):
    NONE = "none"
    LOGNORMAL = "lognormal"
    ADDITIVE = "additive"


class NoiseSpec(BaseModel):
    """Seeded observation noise."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    model: NoiseModel = Field(default=NoiseModel.NONE)
    sigma: float = Field(default=0.0, ge=0, description="Log-scale std (lognormal) or absolute std (additive)")
    seed: int = Field(default=0, ge=0, lt=2**64)

    @property
    def active(self) -> bool:
        return self.model != NoiseModel.NONE and self.sigma > 0


def _shape_values(shape: ShapeLike) -> Dict[str, float]:
    values = shape.as_dict() if isinstance(shape, Shape) else dict(shape)
    result = {}
    for name in DIMENSIONS:
        if name not in values:
            raise InputValidationError(f"shape has no {name}", invariant="shape covers every dimension")
        value = float(values[name])
        if not value > 0:
            raise DomainError(name, value)
        result[name] = value
    return result


def default_ground_truth(
    anchor: Shape = presets.SEED_SHAPE,
    t_ref: float = 1e10,
    c: float = 0.65,
    exponents: Optional[Mapping[str, float]] = None,
    model_exponents: Optional[Mapping[str, float]] = None,
    term_level: float = 0.06,
    term_weights: Optional[Mapping[str, float]] = None,
) -> GroundTruth:
    """
    Ground truth whose per-dimension optimum at ``t_ref`` GFLOPs is ``anchor``.

    Each dimension's model-size term equals ``term_level`` times its weight at
    the anchor; the shape-independent compute term and the irreducible loss
    equal ``term_level``. With the defaults the published star sweep spans
    losses of about 0.3 to 0.92 and every arm moves the loss by well over 1%.
    Scaling exponents default to the classification preset.
    """
    exponents = dict(exponents or presets.EXPONENT_PRESETS[ExponentPreset.CLASSIFICATION])
    model_exponents = dict(model_exponents or DEFAULT_MODEL_EXPONENTS)
    term_weights = dict(term_weights or DEFAULT_TERM_WEIGHTS)
    if not t_ref > 0:
        raise DomainError("t_ref", t_ref)

    dims = {}
    for name in DIMENSIONS:
        s = exponents[name]
        a = model_exponents[name]
        b = c / s - a
        if not b > 0:
            raise InputValidationError(
                f"{name}: exponent {s} with a={a}, c={c} gives non-positive b={b}",
                invariant="b = c / s - a > 0",
            )
        x = float(getattr(anchor, name))
        alpha = term_level * term_weights[name] * x ** a
        # places the minimizer (alpha a t^c / (beta b))^(1 / (a + b)) at the anchor
        beta = alpha * a * t_ref ** c / (b * x ** (a + b))
        dims[name] = DimensionTerms(alpha=alpha, a=a, beta=beta, b=b)
    return GroundTruth(dims=dims, c=c, xi=term_level * t_ref ** c, eps_inf=term_level)


def eval_truth(gt: GroundTruth, shape: ShapeLike, t: float) -> float:
    """
    Evaluate the decomposable loss.

    Raises:
        DomainError: If any shape value or ``t`` is not strictly positive.
    """
    values = _shape_values(shape)
    if not t > 0:
        raise DomainError("t", t)
    log_t = np.log(t)
    compute_decay = np.exp(-gt.c * log_t)
    size_terms = 0.0
    shape_terms = gt.xi
    for name, terms in gt.dims.items():
        log_x = np.log(values[name])
        size_terms += terms.alpha * np.exp(-terms.a * log_x)
        shape_terms += terms.beta * np.exp(terms.b * log_x)
    return float(size_terms + shape_terms * compute_decay + gt.eps_inf)


def apply_noise(noise: NoiseSpec, clean: Sequence[float]) -> np.ndarray:
    """
    Noisy copies of ``clean``, drawn in order from ``default_rng(noise.seed)``.

    Lognormal noise multiplies by exp(sigma * z). Additive noise adds
    sigma * z and clips at a tiny positive value so metrics stay valid.
    """
    clean = np.asarray(clean, dtype=np.float64)
    if not noise.active:
        return clean.copy()
    rng = np.random.default_rng(noise.seed)
    z = rng.standard_normal(clean.shape)
    if noise.model == NoiseModel.LOGNORMAL:
        return clean * np.exp(noise.sigma * z)

    noisy = clean + noise.sigma * z
    floor = 1e-12
    clipped = int(np.count_nonzero(noisy < floor))
    if clipped:
        logger.warning("Additive noise drove %d metric value(s) non-positive; clipped to %g", clipped, floor)
    return np.maximum(noisy, floor)


def _records(
    gt: GroundTruth,
    points: Sequence[tuple],
    noise: NoiseSpec,
    cost: CostSettings,
    metric_name: str,
    tag: str,
) -> List[RunRecord]:
    computes = []
    clean = []
    for shape, dimension, examples in points:
        compute = training_compute(cost.config_for(shape), examples, cost.flops_multiplier)
        computes.append(compute)
        clean.append(eval_truth(gt, shape, compute))
    observed = apply_noise(noise, clean)
    return [
        RunRecord(
            shape=shape,
            compute=compute,
            metric_name=metric_name,
            metric_value=float(value),
            dimension_under_test=dimension,
            examples_seen=examples,
            tag=tag,
        )
        for (shape, dimension, examples), compute, value in zip(points, computes, observed)
    ]


def gen_runs(
    gt: GroundTruth,
    design: SweepSpec,
    noise: Optional[NoiseSpec] = None,
    cost: Optional[CostSettings] = None,
    metric_name: str = "loss",
) -> List[RunRecord]:
    """
    Simulate a sweep: one record per (run, checkpoint) in design order.

    ``cost`` defaults to the design's own cost settings.
    """
    noise = noise or NoiseSpec()
    cost = cost or design.cost
    points = [
        (run.shape, run.dimension_under_test, examples)
        for run in design.runs()
        for examples in run.examples
    ]
    records = _records(gt, points, noise, cost, metric_name, tag=design.kind)
    logger.info(
        "Simulated %d %s-sweep records (noise=%s, sigma=%g, seed=%d)",
        len(records), design.kind, noise.model.value, noise.sigma, noise.seed,
    )
    return records


def gen_center_runs(
    gt: GroundTruth,
    design: StarSweepSpec,
    noise: Optional[NoiseSpec] = None,
    cost: Optional[CostSettings] = None,
    metric_name: str = "loss",
    checkpoints: Optional[Sequence[int]] = None,
) -> List[RunRecord]:
    """Records of the star centre itself; it is never part of the fitted grids."""
    noise = noise or NoiseSpec()
    cost = cost or design.cost
    examples = list(checkpoints) if checkpoints is not None else list(design.checkpoints)
    points = [(design.center, None, n) for n in examples]
    return _records(gt, points, noise, cost, metric_name, tag="center")


def brute_force_optimum(
    gt: GroundTruth, t: float, grids: Mapping[str, Sequence[float]]
) -> Dict[str, float]:
    """
    Exhaustive argmin of the loss over the cross product of ``grids`` at compute ``t``.

    Ties resolve to the lexicographically smallest (width, depth, mlp_dim).
    """
    if not t > 0:
        raise DomainError("t", t)
    compute_decay = np.exp(-gt.c * np.log(t))

    axes = []
    total = np.zeros((1, 1, 1))
    for k, name in enumerate(DIMENSIONS):
        if name not in grids or len(grids[name]) == 0:
            raise InputValidationError(f"empty grid for {name}", invariant="grids nonempty")
        values = np.unique(np.asarray(grids[name], dtype=np.float64))
        if not np.all(values > 0):
            raise DomainError(name, float(values[0]))
        terms = gt.dims[name]
        log_x = np.log(values)
        losses = terms.alpha * np.exp(-terms.a * log_x) + terms.beta * np.exp(terms.b * log_x) * compute_decay
        view = [1, 1, 1]
        view[k] = values.size
        total = total + losses.reshape(view)
        axes.append(values)

    # C-order argmin over ascending axes returns the lexicographically smallest minimiser
    index = np.unravel_index(int(np.argmin(total)), total.shape)
    return {name: float(axes[k][index[k]]) for k, name in enumerate(DIMENSIONS)}
