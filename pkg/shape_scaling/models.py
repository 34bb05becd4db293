"""
Shared domain models.

Shapes and run records flow through every other module, so they live here
rather than next to any single operation.
"""

import math
from typing import Any, Dict, Mapping, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator

DIMENSIONS: Tuple[str, ...] = ("width", "depth", "mlp_dim")


def check_dimension(name: str) -> str:
    """Return ``name`` if it is a known shape dimension."""
    if name not in DIMENSIONS:
        raise ValueError(f"unknown shape dimension {name!r}; expected one of {DIMENSIONS}")
    return name


class Shape(BaseModel):
    """Named positive-integer shape dimensions of an encoder."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    width: int = Field(..., ge=1, description="Size of the internal token representation")
    depth: int = Field(..., ge=1, description="Number of encoder blocks")
    mlp_dim: int = Field(..., ge=1, description="Hidden dimension of each MLP sublayer")

    @classmethod
    def from_mapping(cls, values: Mapping[str, float]) -> "Shape":
        """Build a shape from a dimension mapping; values must be integral."""
        converted = {}
        for name in DIMENSIONS:
            value = values[name]
            if not math.isfinite(float(value)) or float(value) != int(value):
                raise ValueError(f"{name} must be an integer, got {value!r}")
            converted[name] = int(value)
        return cls(**converted)

    @classmethod
    def from_text(cls, text: str) -> "Shape":
        """Parse ``"width,depth,mlp_dim"``; values must be integral."""
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != len(DIMENSIONS):
            raise ValueError(f"expected width,depth,mlp_dim, got {text!r}")
        return cls.from_mapping({name: float(p) for name, p in zip(DIMENSIONS, parts)})

    def as_dict(self) -> Dict[str, int]:
        return {name: getattr(self, name) for name in DIMENSIONS}

    def as_tuple(self) -> Tuple[int, int, int]:
        return (self.width, self.depth, self.mlp_dim)

    def replace(self, **changes: int) -> "Shape":
        values = self.as_dict()
        values.update(changes)
        return Shape(**values)

    def __str__(self) -> str:
        return f"({self.width}, {self.depth}, {self.mlp_dim})"


class RunRecord(BaseModel):
    """One observed (shape, compute, metric) triple from a training run."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    shape: Shape
    compute: float = Field(..., gt=0, allow_inf_nan=False, description="Training compute in GFLOPs")
    metric_name: str = Field(..., min_length=1)
    metric_value: float = Field(..., gt=0, allow_inf_nan=False, description="Loss, error rate or log-perplexity")
    dimension_under_test: Optional[str] = Field(
        default=None, description="Dimension varied by the star sweep that produced this run"
    )
    examples_seen: Optional[int] = Field(default=None, ge=0)
    tag: Optional[str] = None
    extra: Dict[str, Any] = Field(
        default_factory=dict, description="Unknown file columns, preserved on round-trip"
    )

    @field_validator("dimension_under_test")
    @classmethod
    def _known_dimension(cls, value: Optional[str]) -> Optional[str]:
        if value is None:
            return value
        return check_dimension(value)

    def dimension_value(self, dimension: str) -> int:
        return getattr(self.shape, check_dimension(dimension))

    def sort_key(self) -> Tuple[float, float, Tuple[int, int, int]]:
        return (self.compute, self.metric_value, self.shape.as_tuple())
