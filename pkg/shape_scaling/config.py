"""
Configuration models for the shape scaling toolkit.

This module defines the configuration schema using Pydantic models. Every
section rejects unknown keys.
"""

from enum import Enum
from typing import Dict, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .cost_model import ModelConfig
from .models import DIMENSIONS, Shape, check_dimension


class FitObjective(str, Enum):
    """Relative-error objectives for the law fit."""
    SQUARED = "squared"
    ABSOLUTE = "absolute"


class ExponentPreset(str, Enum):
    """Published per-dimension scaling exponent sets."""
    CLASSIFICATION = "classification"
    MULTITASK = "multitask"


# ============================================================================
# Cost Model Configuration
# ============================================================================

class CostSettings(BaseModel):
    """Structural settings shared by every shape in a cost query."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    patch_size: int = Field(default=14, ge=1, description="Patch side in pixels")
    image_resolution: int = Field(default=224, ge=1, description="Image side in pixels")
    num_heads: int = Field(default=16, ge=1, description="Attention heads")
    flops_multiplier: float = Field(
        default=1.0, gt=0, description="Training FLOPs per forward FLOP (3.0 adds the backward pass)"
    )
    include_pooling_head: bool = Field(default=True, description="Count the pooling head")
    include_pos_embedding: bool = Field(default=True, description="Count positional embeddings")

    def config_for(self, shape: Shape) -> ModelConfig:
        """Attach these settings to ``shape``."""
        return ModelConfig(
            shape=shape,
            patch_size=self.patch_size,
            image_resolution=self.image_resolution,
            num_heads=self.num_heads,
            include_pooling_head=self.include_pooling_head,
            include_pos_embedding=self.include_pos_embedding,
        )


# ============================================================================
# Fit Configuration
# ============================================================================

class FitOptions(BaseModel):
    """Options for fitting the per-dimension law."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    objective: FitObjective = Field(
        default=FitObjective.SQUARED, description="Mean squared or mean absolute relative error"
    )
    restarts: int = Field(default=32, ge=1, description="Deterministic multi-start count")
    seed: int = Field(default=0, ge=0, description="Seed of the restart schedule")
    a_bounds: Tuple[float, float] = Field(default=(0.05, 2.0), description="Start box for a")
    b_bounds: Tuple[float, float] = Field(default=(0.05, 2.0), description="Start box for b")
    c_bounds: Tuple[float, float] = Field(default=(0.1, 1.5), description="Start box for c")
    max_evaluations: int = Field(default=20000, ge=10, description="Objective evaluations per restart")
    tolerance: float = Field(default=1e-10, gt=0, description="Simplex objective spread at convergence")
    workers: int = Field(default=1, ge=1, description="Threads used to run restarts")
    polish: bool = Field(default=True, description="Jointly refine all seven parameters after restarts")

    @field_validator("a_bounds", "b_bounds", "c_bounds")
    @classmethod
    def _check_box(cls, value: Tuple[float, float]) -> Tuple[float, float]:
        low, high = value
        if not 0 < low <= high:
            raise ValueError(f"start box must satisfy 0 < low <= high, got {value}")
        return value


# ============================================================================
# Scaler Configuration
# ============================================================================

class ScalerSettings(BaseModel):
    """Joint scaling settings."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    preset: ExponentPreset = Field(
        default=ExponentPreset.CLASSIFICATION, description="Published exponent set"
    )
    exponents: Optional[Dict[str, float]] = Field(
        default=None, description="Explicit per-dimension exponents; overrides the preset"
    )
    weights: Optional[Dict[str, float]] = Field(
        default=None, description="Compute allocation weights; defaults to 1/D"
    )
    mlp_multiple: int = Field(default=16, ge=1, description="MLP dim rounding multiple")

    @field_validator("exponents", "weights")
    @classmethod
    def _check_dimensions(cls, value: Optional[Dict[str, float]]) -> Optional[Dict[str, float]]:
        if value is None:
            return value
        for name, number in value.items():
            check_dimension(name)
            if not number > 0:
                raise ValueError(f"{name} must be strictly positive, got {number}")
        return value


# ============================================================================
# Logging Configuration
# ============================================================================

class LoggingSettings(BaseModel):
    """Logging configuration."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    level: str = Field(default="INFO", description="Log level")
    format: str = Field(
        default="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        description="logging format string",
    )

    @field_validator("level")
    @classmethod
    def _check_level(cls, value: str) -> str:
        value = value.upper()
        if value not in {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}:
            raise ValueError(f"unknown log level {value!r}")
        return value


# ============================================================================
# Root Configuration
# ============================================================================

class ToolConfig(BaseModel):
    """Root configuration for the shape scaling toolkit."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    cost: CostSettings = Field(default_factory=CostSettings)
    fit: FitOptions = Field(default_factory=FitOptions)
    scaler: ScalerSettings = Field(default_factory=ScalerSettings)
    logging: LoggingSettings = Field(default_factory=LoggingSettings)

    @model_validator(mode="after")
    def validate_config(self) -> "ToolConfig":
        """Validate configuration consistency."""
        weights = self.scaler.weights
        if weights is not None:
            total = sum(weights.values())
            if abs(total - 1.0) > 1e-9:
                raise ValueError(f"scaler weights must sum to 1, got {total}")
            exponents = self.scaler.exponents
            dims = set(exponents) if exponents is not None else set(DIMENSIONS)
            if set(weights) != dims:
                raise ValueError(
                    f"scaler weights {sorted(weights)} must cover the scaled dimensions {sorted(dims)}"
                )
        return self
