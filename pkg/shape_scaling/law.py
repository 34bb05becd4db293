"""
Per-dimension joint shape/compute law.

For one shape dimension x and compute t (GFLOPs) the loss follows

    f(x, t) = alpha * x**-a + (beta * x**b + xi) * t**-c + eps

with all seven coefficients strictly positive. For fixed t the law is
quasiconvex in x with a unique minimizer, which grows as t**s with
s = c / (a + b). Powers are evaluated as exp(k * log(.)) so inputs spanning
many orders of magnitude stay finite.
"""

import logging
from typing import List, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .exceptions import DomainError, InputValidationError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, Sequence[float], np.ndarray]


class LawParams(BaseModel):
    """The seven positive coefficients of the law for one dimension."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    alpha: float = Field(..., gt=0, description="Scale of the model-size term")
    a: float = Field(..., gt=0, description="Model-size exponent in the compute-unbounded regime")
    beta: float = Field(..., gt=0, description="Scale of the shape/compute interaction")
    b: float = Field(..., gt=0, description="Shape exponent of the compute term")
    c: float = Field(..., gt=0, description="Data (compute) scaling exponent")
    xi: float = Field(..., gt=0, description="Shape-independent compute coefficient")
    eps: float = Field(..., gt=0, description="Irreducible loss")

    def scaled(self, kappa: float) -> "LawParams":
        """Return the law for the metric ``kappa * f``."""
        if not kappa > 0:
            raise DomainError("kappa", kappa)
        return self.model_copy(
            update={
                "alpha": self.alpha * kappa,
                "beta": self.beta * kappa,
                "xi": self.xi * kappa,
                "eps": self.eps * kappa,
            }
        )


class FrontierConstants(BaseModel):
    """Constants of the loss along the compute-optimal frontier."""

    model_config = ConfigDict(frozen=True)

    F: float = Field(..., gt=0)
    G: float = Field(..., gt=0)
    a: float = Field(..., gt=0)
    c: float = Field(..., gt=0)
    eps: float = Field(..., gt=0)

    def loss(self, x_opt: ArrayLike, t: ArrayLike) -> np.ndarray:
        """F * x*^-a + G * t^-c + eps."""
        x_opt = _positive("x", x_opt)
        t = _positive("t", t)
        return self.F * _power(x_opt, -self.a) + self.G * _power(t, -self.c) + self.eps


def _positive(name: str, value: ArrayLike) -> np.ndarray:
    array = np.asarray(value, dtype=np.float64)
    if array.size == 0:
        raise InputValidationError(f"{name} must not be empty", invariant=f"{name} nonempty")
    if not np.all(np.isfinite(array)) or not np.all(array > 0):
        bad = array[~(np.isfinite(array) & (array > 0))].ravel()[0]
        raise DomainError(name, float(bad))
    return array


def _power(base: np.ndarray, exponent: float) -> np.ndarray:
    return np.exp(exponent * np.log(base))


def _scalar_or_array(value: np.ndarray) -> Union[float, np.ndarray]:
    return float(value) if value.ndim == 0 else value


def eval_law(p: LawParams, x: ArrayLike, t: ArrayLike) -> Union[float, np.ndarray]:
    """
    Evaluate the law at shape value ``x`` and compute ``t``.

    ``x`` and ``t`` broadcast against each other.

    Raises:
        DomainError: If any ``x`` or ``t`` is not strictly positive.
    """
    x = _positive("x", x)
    t = _positive("t", t)
    value = (
        p.alpha * _power(x, -p.a)
        + (p.beta * _power(x, p.b) + p.xi) * _power(t, -p.c)
        + p.eps
    )
    return _scalar_or_array(value)


def minimizer_xhat(p: LawParams, t: ArrayLike) -> Union[float, np.ndarray]:
    """
    Unique minimizer of the law in x at fixed compute.

    x_hat = (alpha * a * t**c / (beta * b)) ** (1 / (a + b)); the law is
    nonincreasing on (0, x_hat] and nondecreasing on [x_hat, inf).
    """
    t = _positive("t", t)
    log_x = (np.log(p.alpha * p.a / (p.beta * p.b)) + p.c * np.log(t)) / (p.a + p.b)
    return _scalar_or_array(np.exp(log_x))


def optimal_shape_dim(p: LawParams, t: ArrayLike) -> Union[float, np.ndarray]:
    """Compute-optimal value of the dimension; same closed form as :func:`minimizer_xhat`."""
    return minimizer_xhat(p, t)


def scaling_exponent(p: LawParams) -> float:
    """Rate s = c / (a + b) at which the optimal dimension grows with compute."""
    return p.c / (p.a + p.b)


def frontier_constants(p: LawParams) -> FrontierConstants:
    """
    Decompose the loss along the compute-optimal frontier.

    At x* the compute-coupled shape term equals (a / b) * alpha * x*^-a, so
    f(x*, t) = F * x*^-a + G * t^-c + eps with F = alpha * (1 + a / b), G = xi.
    """
    return FrontierConstants(F=p.alpha * (1.0 + p.a / p.b), G=p.xi, a=p.a, c=p.c, eps=p.eps)


def fixed_shape_power_law(p: LawParams, x: float) -> Tuple[float, float]:
    """
    Coefficients (A, B) of f(t) = A * t^-c + B for a fixed shape value.

    A = beta * x^b + xi, B = alpha * x^-a + eps.
    """
    x_arr = _positive("x", x)
    amplitude = p.beta * float(_power(x_arr, p.b)) + p.xi
    offset = p.alpha * float(_power(x_arr, -p.a)) + p.eps
    return amplitude, offset


def isoflop_curve(p: LawParams, t: float, x_grid: Sequence[float]) -> List[Tuple[float, float]]:
    """
    Sample the law along a grid of shape values at fixed compute.

    Raises:
        InputValidationError: If the grid is empty or not strictly ascending.
    """
    grid = np.asarray(list(x_grid), dtype=np.float64)
    if grid.size == 0:
        raise InputValidationError("x_grid must not be empty", invariant="grid nonempty")
    if grid.size > 1 and not np.all(np.diff(grid) > 0):
        raise InputValidationError("x_grid must be strictly ascending", invariant="grid ascending")
    losses = np.atleast_1d(eval_law(p, grid, t))
    return [(float(x), float(loss)) for x, loss in zip(grid, losses)]
