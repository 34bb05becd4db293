"""
Fitting the per-dimension law to run records.

The objective is the mean squared (or absolute) relative error. For a trial
exponent triple (a, b, c) the law is linear in (alpha, beta, xi, eps), so those
four are solved exactly by non-negative least squares and the simplex search
runs over log(a, b, c) only. Restarts are drawn from a seeded schedule; the
best restart is then refined jointly over all seven log-parameters.

``fit_star`` fits the decomposable loss to all arms of a star sweep at once,
with each dimension's optimum held at an anchor shape. It profiles the same
way over one coefficient per dimension plus the shared compute coefficient
and irreducible loss.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.optimize import least_squares, minimize, nnls

from .config import FitObjective, FitOptions
from .exceptions import DomainError, InputValidationError, NonConvergenceError, ShapeScalingError
from .law import LawParams, eval_law, scaling_exponent
from .models import DIMENSIONS, RunRecord, Shape, check_dimension
from .oracle import DimensionTerms, GroundTruth, eval_truth

logger = logging.getLogger(__name__)

MIN_RECORDS = 8
MIN_SHAPE_VALUES = 3
MIN_COMPUTE_VALUES = 2

PENALTY = 1e12
LOG_EXPONENT_MIN = float(np.log(1e-4))
LOG_EXPONENT_MAX = float(np.log(50.0))
DEGENERATE_EXPONENT_LOW = 1e-3
DEGENERATE_EXPONENT_HIGH = 20.0
# a coefficient whose term never exceeds this fraction of an observation is treated as zero
COEFFICIENT_FLOOR = 1e-12
EPS_FLOOR = 1e-9
# shape-dependent terms below this fraction of every observation mark the fit degenerate
NEGLIGIBLE_TERM = 1e-9
SIMPLEX_STEP = 0.25
SIMPLEX_XATOL = 1e-8
POLISH_TOLERANCE = 1e-14


class FitReport(BaseModel):
    """Result of fitting one dimension's law to one metric."""

    model_config = ConfigDict(validate_assignment=True)

    params: LawParams
    dimension: str
    metric_name: str
    objective: FitObjective
    objective_value: float = Field(..., ge=0)
    residuals: List[float] = Field(..., description="Relative residual per training record")
    holdout_relative_error: Optional[float] = Field(default=None, ge=0)
    s: float = Field(..., gt=0, description="Scaling exponent c / (a + b)")
    n_records: int
    n_restarts_used: int = Field(..., description="Restarts that reached a finite objective")
    restart_objectives: List[float]
    converged: bool
    degenerate: bool = Field(
        default=False, description="Exponents at extreme values or a shape term collapsed to zero"
    )
    x_range: Tuple[float, float]
    t_range: Tuple[float, float]


class StarFitReport(BaseModel):
    """Joint fit of the decomposable loss to every arm of a star sweep."""

    model_config = ConfigDict(validate_assignment=True)

    truth: GroundTruth = Field(..., description="Fitted decomposable loss")
    anchor: Shape = Field(..., description="Shape whose every dimension is optimal at anchor_compute")
    anchor_compute: float = Field(..., gt=0)
    metric_name: str
    objective: FitObjective
    objective_value: float = Field(..., ge=0)
    residuals: List[float]
    s: Dict[str, float] = Field(..., description="Scaling exponent c / (a + b) per dimension")
    holdout_relative_error: Optional[float] = Field(default=None, ge=0)
    n_records: int
    n_restarts_used: int
    restart_objectives: List[float]
    converged: bool
    degenerate: bool = False


class _Problem:
    """Records in normalised coordinates plus the profiled objective."""

    n_coefficients = 4

    def __init__(self, x: np.ndarray, t: np.ndarray, f: np.ndarray, objective: FitObjective) -> None:
        self.f = f
        self.objective = objective
        self.log_x_ref = float(np.mean(np.log(x)))
        self.log_t_ref = float(np.mean(np.log(t)))
        self.log_x = np.log(x) - self.log_x_ref
        self.log_t = np.log(t) - self.log_t_ref

    def design(self, a: float, b: float, c: float) -> np.ndarray:
        decay = np.exp(-c * self.log_t)
        basis = np.column_stack(
            [
                np.exp(-a * self.log_x),
                np.exp(b * self.log_x) * decay,
                decay,
                np.ones_like(decay),
            ]
        )
        return basis / self.f[:, None]

    def floors(self, design: np.ndarray) -> np.ndarray:
        floors = COEFFICIENT_FLOOR / np.max(design, axis=0)
        floors[-1] = EPS_FLOOR * float(np.min(self.f))
        return floors

    def score(self, residuals: np.ndarray) -> float:
        with np.errstate(all="ignore"):
            if self.objective == FitObjective.ABSOLUTE:
                value = float(np.mean(np.abs(residuals)))
            else:
                value = float(np.mean(residuals ** 2))
        return value if np.isfinite(value) else PENALTY

    def profile(self, exponents: np.ndarray) -> Tuple[float, np.ndarray, np.ndarray]:
        """Objective, linear coefficients and residuals for fixed exponents."""
        with np.errstate(all="ignore"):
            design = self.design(*exponents)
            norms = np.linalg.norm(design, axis=0)
            if not (np.all(np.isfinite(design)) and np.all(norms > 0) and np.all(np.isfinite(norms))):
                return PENALTY, np.full(self.n_coefficients, np.nan), np.full(self.f.size, np.nan)
            floors = self.floors(design)
            target = 1.0 - design @ floors
            try:
                scaled, _ = nnls(design / norms, target)
            except RuntimeError:
                return PENALTY, np.full(self.n_coefficients, np.nan), np.full(self.f.size, np.nan)
            theta = floors + scaled / norms
            residuals = design @ theta - 1.0
        return self.score(residuals), theta, residuals

    def residuals(self, log_theta: np.ndarray, log_exponents: np.ndarray) -> np.ndarray:
        with np.errstate(all="ignore"):
            design = self.design(*np.exp(log_exponents))
            residuals = design @ np.exp(log_theta) - 1.0
        if not np.all(np.isfinite(residuals)):
            return np.full(self.f.size, 1e6)
        return residuals

    def to_params(self, theta: np.ndarray, exponents: np.ndarray) -> LawParams:
        a, b, c = (float(v) for v in exponents)
        log_theta = np.log(theta)
        return LawParams(
            alpha=float(np.exp(log_theta[0] + a * self.log_x_ref)),
            a=a,
            beta=float(np.exp(log_theta[1] - b * self.log_x_ref + c * self.log_t_ref)),
            b=b,
            c=c,
            xi=float(np.exp(log_theta[2] + c * self.log_t_ref)),
            eps=float(theta[3]),
        )


class _StarProblem(_Problem):
    """
    Every arm of a star sweep under the decomposable loss.

    Each dimension's compute term is tied to its size term so that the
    dimension's optimum at the anchor compute is the anchor value. That leaves
    one coefficient per dimension plus the shared compute coefficient and the
    irreducible loss.
    """

    n_coefficients = len(DIMENSIONS) + 2

    def __init__(
        self, x: np.ndarray, t: np.ndarray, f: np.ndarray, anchor: Shape, anchor_compute: float,
        objective: FitObjective,
    ) -> None:
        self.f = f
        self.objective = objective
        self.log_anchor = np.log(np.array(anchor.as_tuple(), dtype=np.float64))
        self.log_anchor_compute = float(np.log(anchor_compute))
        self.log_x = np.log(x) - self.log_anchor
        self.log_t = np.log(t) - self.log_anchor_compute

    def design(self, *exponents: float) -> np.ndarray:
        a = np.asarray(exponents[0:-1:2])
        b = np.asarray(exponents[1:-1:2])
        decay = np.exp(-exponents[-1] * self.log_t)
        size = np.exp(-a * self.log_x) + (a / b) * np.exp(b * self.log_x) * decay[:, None]
        basis = np.column_stack([size, decay, np.ones_like(decay)])
        return basis / self.f[:, None]

    def to_truth(self, theta: np.ndarray, exponents: np.ndarray) -> GroundTruth:
        c = float(exponents[-1])
        log_theta = np.log(theta)
        dims = {}
        for k, name in enumerate(DIMENSIONS):
            a, b = float(exponents[2 * k]), float(exponents[2 * k + 1])
            dims[name] = DimensionTerms(
                alpha=float(np.exp(log_theta[k] + a * self.log_anchor[k])),
                a=a,
                beta=float(np.exp(log_theta[k] + np.log(a / b) - b * self.log_anchor[k] + c * self.log_anchor_compute)),
                b=b,
            )
        return GroundTruth(
            dims=dims,
            c=c,
            xi=float(np.exp(log_theta[-2] + c * self.log_anchor_compute)),
            eps_inf=float(theta[-1]),
        )


def _exponents(u: np.ndarray) -> np.ndarray:
    return np.exp(np.clip(u, LOG_EXPONENT_MIN, LOG_EXPONENT_MAX))


def _restart_schedule(options: FitOptions, n_dimensions: int = 1) -> np.ndarray:
    """Log-exponent starts ordered (a, b) per dimension, then c."""
    rng = np.random.default_rng(options.seed)
    boxes = np.log(np.array([options.a_bounds, options.b_bounds] * n_dimensions + [options.c_bounds]))
    return rng.uniform(boxes[:, 0], boxes[:, 1], size=(options.restarts, len(boxes)))


def _run_restart(problem: _Problem, start: np.ndarray, options: FitOptions) -> Tuple[float, np.ndarray, bool]:
    simplex = np.vstack([start, start + SIMPLEX_STEP * np.eye(start.size)])
    result = minimize(
        lambda u: problem.profile(_exponents(u))[0],
        start,
        method="Nelder-Mead",
        options={
            "maxfev": options.max_evaluations,
            "xatol": SIMPLEX_XATOL,
            "fatol": options.tolerance,
            "initial_simplex": simplex,
        },
    )
    u = np.clip(result.x, LOG_EXPONENT_MIN, LOG_EXPONENT_MAX)
    value = problem.profile(np.exp(u))[0]
    return value, u, bool(result.success)


def _run_restarts(
    problem: _Problem, starts: np.ndarray, options: FitOptions
) -> Tuple[List[float], Tuple[float, np.ndarray, bool]]:
    """Objective of every restart and the best (objective, log-exponents, converged)."""
    if options.workers > 1:
        with ThreadPoolExecutor(max_workers=options.workers) as pool:
            results = list(pool.map(lambda s: _run_restart(problem, s, options), starts))
    else:
        results = [_run_restart(problem, s, options) for s in starts]

    objectives = [value for value, _, _ in results]
    for index, (value, u, success) in enumerate(results):
        logger.debug(
            "restart %d: objective=%.6g exponents=%s converged=%s",
            index, value, np.round(np.exp(u), 6).tolist(), success,
        )
    # min() keeps the first of equal objectives, so ties go to the lowest restart index
    best_index = min(range(len(results)), key=lambda i: objectives[i])
    return objectives, results[best_index]


def _polish(
    problem: _Problem, theta: np.ndarray, u: np.ndarray, options: FitOptions
) -> Optional[Tuple[float, np.ndarray, np.ndarray]]:
    start = np.concatenate([np.log(theta), u])
    if problem.objective == FitObjective.ABSOLUTE:
        result = minimize(
            lambda v: problem.score(problem.residuals(v[:4], v[4:])),
            start,
            method="Nelder-Mead",
            options={"maxfev": options.max_evaluations, "xatol": SIMPLEX_XATOL, "fatol": options.tolerance},
        )
    else:
        result = least_squares(
            lambda v: problem.residuals(v[:4], v[4:]),
            start,
            method="trf",
            xtol=POLISH_TOLERANCE,
            ftol=POLISH_TOLERANCE,
            gtol=POLISH_TOLERANCE,
            max_nfev=options.max_evaluations,
        )
    polished_u = np.clip(result.x[4:], LOG_EXPONENT_MIN, LOG_EXPONENT_MAX)
    with np.errstate(all="ignore"):
        floors = problem.floors(problem.design(*np.exp(polished_u)))
        polished_theta = np.maximum(np.exp(result.x[:4]), floors)
    value = problem.score(problem.residuals(np.log(polished_theta), polished_u))
    if not np.all(np.isfinite(polished_theta)) or value >= PENALTY:
        return None
    return value, polished_theta, polished_u


def _training_data(
    records: Sequence[RunRecord], dimension: Optional[str]
) -> Tuple[str, str, List[RunRecord]]:
    if not records:
        raise InputValidationError("no records to fit", invariant="records nonempty")
    metrics = {record.metric_name for record in records}
    if len(metrics) != 1:
        raise InputValidationError(f"records mix metrics {sorted(metrics)}", invariant="records share metric_name")

    if dimension is None:
        tested = {record.dimension_under_test for record in records} - {None}
        if len(tested) != 1:
            raise InputValidationError(
                f"cannot infer the dimension under test from {sorted(tested) or 'untagged records'}; "
                "pass it explicitly",
                invariant="single dimension under test",
            )
        dimension = tested.pop()
    check_dimension(dimension)
    if any(r.dimension_under_test is not None for r in records):
        selected = [r for r in records if r.dimension_under_test == dimension]
    else:
        selected = list(records)

    n_x = len({r.dimension_value(dimension) for r in selected})
    n_t = len({r.compute for r in selected})
    if len(selected) < MIN_RECORDS or n_x < MIN_SHAPE_VALUES or n_t < MIN_COMPUTE_VALUES:
        raise InputValidationError(
            f"{dimension} fit needs >= {MIN_RECORDS} records over >= {MIN_SHAPE_VALUES} "
            f"shape values and >= {MIN_COMPUTE_VALUES} compute values; got {len(selected)} "
            f"records, {n_x} shape values, {n_t} compute values",
            invariant="sufficient records",
        )
    return dimension, metrics.pop(), selected


def fit_dimension(
    records: Sequence[RunRecord],
    options: Optional[FitOptions] = None,
    dimension: Optional[str] = None,
) -> FitReport:
    """
    Fit the law of one dimension to records of one metric.

    Args:
        records: Run records. When any record is tagged with a dimension
            under test, only those tagged with ``dimension`` are used.
        options: Objective, restart schedule and convergence settings.
        dimension: Dimension under test. Inferred from the records if omitted.

    Returns:
        The best fit across all restarts.

    Raises:
        InputValidationError: If the records cannot identify the law.
        NonConvergenceError: If no restart reached a finite objective.
    """
    options = options or FitOptions()
    dimension, metric_name, selected = _training_data(records, dimension)

    x = np.array([r.dimension_value(dimension) for r in selected], dtype=np.float64)
    t = np.array([r.compute for r in selected], dtype=np.float64)
    f = np.array([r.metric_value for r in selected], dtype=np.float64)
    problem = _Problem(x, t, f, options.objective)

    objectives, (best_value, best_u, best_success) = _run_restarts(problem, _restart_schedule(options), options)
    finite = [value for value in objectives if value < PENALTY]
    if not finite:
        raise NonConvergenceError(
            f"all {options.restarts} restarts diverged fitting {dimension}",
            best_params=dict(zip(("a", "b", "c"), np.exp(best_u).tolist())),
            objective_value=best_value,
        )

    best_value, theta, residuals = problem.profile(np.exp(best_u))
    exponents = np.exp(best_u)

    if options.polish:
        polished = _polish(problem, theta, best_u, options)
        if polished is not None and polished[0] < best_value:
            logger.debug("polish improved objective %.6g -> %.6g", best_value, polished[0])
            best_value, theta, polished_u = polished
            exponents = np.exp(polished_u)
            residuals = problem.residuals(np.log(theta), polished_u)

    try:
        params = problem.to_params(theta, exponents)
    except ValueError as e:
        raise NonConvergenceError(
            f"fit of {dimension} produced invalid coefficients: {e}",
            best_params=dict(zip(("a", "b", "c"), exponents.tolist())),
            objective_value=best_value,
        ) from e

    with np.errstate(all="ignore"):
        largest_terms = theta[:2] * np.max(problem.design(*exponents)[:, :2], axis=0)
    at_floor = largest_terms <= NEGLIGIBLE_TERM
    degenerate = bool(
        np.any(at_floor)
        or np.any(exponents <= DEGENERATE_EXPONENT_LOW)
        or np.any(exponents >= DEGENERATE_EXPONENT_HIGH)
    )
    if degenerate:
        logger.warning(
            "Fit of %s is near-degenerate: exponents %s, shape terms at floor %s",
            dimension, np.round(exponents, 6).tolist(), at_floor.tolist(),
        )

    report = FitReport(
        params=params,
        dimension=dimension,
        metric_name=metric_name,
        objective=options.objective,
        objective_value=best_value,
        residuals=residuals.tolist(),
        s=scaling_exponent(params),
        n_records=len(selected),
        n_restarts_used=len(finite),
        restart_objectives=objectives,
        converged=best_success,
        degenerate=degenerate,
        x_range=(float(x.min()), float(x.max())),
        t_range=(float(t.min()), float(t.max())),
    )
    logger.info(
        "Fitted %s on %s: a=%.4g b=%.4g c=%.4g s=%.4g objective=%.3g",
        dimension, metric_name, params.a, params.b, params.c, report.s, best_value,
    )
    return report


def extrapolation_check(report: FitReport, holdout: Sequence[RunRecord]) -> float:
    """
    Mean absolute relative error of the fitted law on held-out records.

    The value is also stored on ``report``. Held-out points inside the
    training range of both the shape value and compute are accepted with a
    warning since they do not test extrapolation.

    Raises:
        InputValidationError: On an empty holdout or a different metric.
    """
    if not holdout:
        raise InputValidationError("holdout must not be empty", invariant="holdout nonempty")
    for record in holdout:
        if record.metric_name != report.metric_name:
            raise InputValidationError(
                f"holdout metric {record.metric_name!r} differs from fitted {report.metric_name!r}",
                invariant="holdout shares metric_name",
            )

    x = np.array([r.dimension_value(report.dimension) for r in holdout], dtype=np.float64)
    t = np.array([r.compute for r in holdout], dtype=np.float64)
    f = np.array([r.metric_value for r in holdout], dtype=np.float64)

    inside = (
        (x >= report.x_range[0]) & (x <= report.x_range[1])
        & (t >= report.t_range[0]) & (t <= report.t_range[1])
    )
    if np.any(inside):
        logger.warning(
            "%d of %d holdout records lie inside the training range of %s",
            int(np.count_nonzero(inside)), len(holdout), report.dimension,
        )

    predicted = np.atleast_1d(eval_law(report.params, x, t))
    error = float(np.mean(np.abs(predicted - f) / f))
    report.holdout_relative_error = error
    logger.info("Holdout relative error for %s: %.4g", report.dimension, error)
    return error


def _star_training_data(records: Sequence[RunRecord]) -> Tuple[str, List[RunRecord]]:
    if not records:
        raise InputValidationError("no records to fit", invariant="records nonempty")
    metrics = {record.metric_name for record in records}
    if len(metrics) != 1:
        raise InputValidationError(f"records mix metrics {sorted(metrics)}", invariant="records share metric_name")

    selected = [r for r in records if r.dimension_under_test is not None] or list(records)
    n_values = {name: len({r.dimension_value(name) for r in selected}) for name in DIMENSIONS}
    n_t = len({r.compute for r in selected})
    if len(selected) < MIN_RECORDS or n_t < MIN_COMPUTE_VALUES or min(n_values.values()) < MIN_SHAPE_VALUES:
        raise InputValidationError(
            f"star fit needs >= {MIN_RECORDS} records, >= {MIN_SHAPE_VALUES} values of every "
            f"dimension and >= {MIN_COMPUTE_VALUES} compute values; got {len(selected)} records, "
            f"values {n_values}, {n_t} compute values",
            invariant="sufficient records",
        )
    return metrics.pop(), selected


def fit_star(
    records: Sequence[RunRecord],
    anchor: Shape,
    anchor_compute: float,
    options: Optional[FitOptions] = None,
) -> StarFitReport:
    """
    Fit the decomposable loss to all arms of a star sweep at once.

    The data exponent, compute coefficient and irreducible loss are shared by
    the arms, and each dimension's optimum at ``anchor_compute`` GFLOPs is held
    at the anchor (typically the seed shape and the compute it was selected
    at). Per-dimension scaling exponents are much better determined than by
    fitting each arm alone with ``fit_dimension``.

    Raises:
        DomainError: If ``anchor_compute`` is not strictly positive.
        InputValidationError: If some dimension does not vary over the records.
        NonConvergenceError: If no restart reached a finite objective.
    """
    if not anchor_compute > 0:
        raise DomainError("anchor_compute", anchor_compute)
    options = options or FitOptions()
    metric_name, selected = _star_training_data(records)

    x = np.array([r.shape.as_tuple() for r in selected], dtype=np.float64)
    t = np.array([r.compute for r in selected], dtype=np.float64)
    f = np.array([r.metric_value for r in selected], dtype=np.float64)
    problem = _StarProblem(x, t, f, anchor, anchor_compute, options.objective)

    starts = _restart_schedule(options, n_dimensions=len(DIMENSIONS))
    objectives, (best_value, best_u, best_success) = _run_restarts(problem, starts, options)
    finite = [value for value in objectives if value < PENALTY]
    if not finite:
        raise NonConvergenceError(
            f"all {options.restarts} restarts diverged fitting the star sweep",
            best_params={"exponents": np.exp(best_u).tolist()},
            objective_value=best_value,
        )

    exponents = np.exp(best_u)
    best_value, theta, residuals = problem.profile(exponents)
    try:
        truth = problem.to_truth(theta, exponents)
    except ValueError as e:
        raise NonConvergenceError(
            f"star fit produced invalid coefficients: {e}",
            best_params={"exponents": exponents.tolist()},
            objective_value=best_value,
        ) from e

    with np.errstate(all="ignore"):
        largest_terms = theta[: len(DIMENSIONS)] * np.max(problem.design(*exponents)[:, : len(DIMENSIONS)], axis=0)
    at_floor = largest_terms <= NEGLIGIBLE_TERM
    degenerate = bool(
        np.any(at_floor)
        or np.any(exponents <= DEGENERATE_EXPONENT_LOW)
        or np.any(exponents >= DEGENERATE_EXPONENT_HIGH)
    )
    if degenerate:
        logger.warning(
            "Star fit is near-degenerate: exponents %s, size terms at floor %s",
            np.round(exponents, 6).tolist(), dict(zip(DIMENSIONS, at_floor.tolist())),
        )

    report = StarFitReport(
        truth=truth,
        anchor=anchor,
        anchor_compute=anchor_compute,
        metric_name=metric_name,
        objective=options.objective,
        objective_value=best_value,
        residuals=residuals.tolist(),
        s=truth.scaling_exponents(),
        n_records=len(selected),
        n_restarts_used=len(finite),
        restart_objectives=objectives,
        converged=best_success,
        degenerate=degenerate,
    )
    logger.info(
        "Fitted star sweep on %s: c=%.4g s=%s objective=%.3g",
        metric_name, truth.c, {k: round(v, 4) for k, v in report.s.items()}, best_value,
    )
    return report


def star_extrapolation_check(report: StarFitReport, holdout: Sequence[RunRecord]) -> float:
    """Mean absolute relative error of the fitted loss on held-out records; stored on ``report``."""
    if not holdout:
        raise InputValidationError("holdout must not be empty", invariant="holdout nonempty")
    for record in holdout:
        if record.metric_name != report.metric_name:
            raise InputValidationError(
                f"holdout metric {record.metric_name!r} differs from fitted {report.metric_name!r}",
                invariant="holdout shares metric_name",
            )
    errors = [abs(eval_truth(report.truth, r.shape, r.compute) - r.metric_value) / r.metric_value for r in holdout]
    error = float(np.mean(errors))
    report.holdout_relative_error = error
    logger.info("Holdout relative error for the star fit: %.4g", error)
    return error


class StabilityRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    metric: str
    a: float
    b: float
    c: float
    s: float
    alpha: float
    beta: float
    xi: float
    eps: float
    objective_value: float


class StabilityReport(BaseModel):
    """Per-metric exponents of one dimension and the spread of s across metrics."""

    model_config = ConfigDict(frozen=True)

    dimension: Optional[str] = None
    rows: List[StabilityRow]
    spread: Optional[float] = Field(default=None, description="(max - min) / mean of s")
    errors: Dict[str, str] = Field(default_factory=dict)


def exponent_stability(
    record_sets: Mapping[str, Sequence[RunRecord]],
    options: Optional[FitOptions] = None,
    dimension: Optional[str] = None,
) -> StabilityReport:
    """
    Fit every metric independently and compare the scaling exponents.

    A metric whose fit fails is reported in ``errors`` and the others still
    run. With a single metric the spread is 0.
    """
    if not record_sets:
        raise InputValidationError("no metrics to compare", invariant="record_sets nonempty")

    rows: List[StabilityRow] = []
    errors: Dict[str, str] = {}
    fitted_dimension = dimension
    for metric in sorted(record_sets):
        try:
            report = fit_dimension(record_sets[metric], options, dimension)
        except ShapeScalingError as e:
            logger.error("Fit failed for metric %s: %s", metric, e)
            errors[metric] = str(e)
            continue
        fitted_dimension = report.dimension
        p = report.params
        rows.append(
            StabilityRow(
                metric=metric, a=p.a, b=p.b, c=p.c, s=report.s,
                alpha=p.alpha, beta=p.beta, xi=p.xi, eps=p.eps,
                objective_value=report.objective_value,
            )
        )

    spread = None
    if rows:
        s_values = np.array([row.s for row in rows])
        spread = float((s_values.max() - s_values.min()) / s_values.mean())
    return StabilityReport(dimension=fitted_dimension, rows=rows, spread=spread, errors=errors)
