"""
Transformer cost model.

Parameter counts, per-example forward FLOPs and total training compute for
vision transformer encoders. GFLOPs (1e9 FLOPs) is the compute unit used by
every other module.
"""

import logging
import math
from typing import Dict

from pydantic import BaseModel, ConfigDict, Field, computed_field, model_validator

from .exceptions import InputValidationError
from .models import Shape

logger = logging.getLogger(__name__)

GIGA = 1e9


class ModelConfig(BaseModel):
    """A shape plus the fixed structural settings needed for cost accounting."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    shape: Shape
    patch_size: int = Field(default=14, ge=1, description="Patch side in pixels")
    image_resolution: int = Field(default=224, ge=1, description="Image side in pixels")
    num_heads: int = Field(default=16, ge=1, description="Attention heads")
    include_pooling_head: bool = Field(
        default=True, description="Count a pooling head as one extra attention + MLP block"
    )
    include_pos_embedding: bool = Field(
        default=True, description="Count learned positional embeddings (tokens x width)"
    )

    @model_validator(mode="after")
    def _check_divisibility(self) -> "ModelConfig":
        if self.shape.width % self.num_heads != 0:
            raise ValueError(
                f"width {self.shape.width} must be divisible by num_heads {self.num_heads}"
            )
        if self.image_resolution % self.patch_size != 0:
            raise ValueError(
                f"image_resolution {self.image_resolution} must be divisible by "
                f"patch_size {self.patch_size}"
            )
        return self

    @property
    def num_tokens(self) -> int:
        return (self.image_resolution // self.patch_size) ** 2

    def with_shape(self, shape: Shape) -> "ModelConfig":
        return self.model_copy(update={"shape": shape})


class CostBreakdown(BaseModel):
    """Parameter count split into its architectural components."""

    model_config = ConfigDict(frozen=True)

    components: Dict[str, int]
    forward_flops: float = Field(..., description="GFLOPs per example")

    @model_validator(mode="after")
    def _check_positive(self) -> "CostBreakdown":
        for name, value in self.components.items():
            if value <= 0:
                raise ValueError(f"component {name} must be strictly positive, got {value}")
        return self

    @computed_field  # type: ignore[prop-decorator]
    @property
    def param_count(self) -> int:
        return sum(self.components.values())


def _block_attention(width: int) -> int:
    # q, k, v and output projections with bias
    return 4 * width * width + 4 * width


def _block_mlp(width: int, mlp_dim: int) -> int:
    return 2 * width * mlp_dim + width + mlp_dim


def _validate(config: ModelConfig) -> ModelConfig:
    if not isinstance(config, ModelConfig):
        raise InputValidationError(
            f"expected ModelConfig, got {type(config).__name__}", invariant="config type"
        )
    return config


def param_breakdown(config: ModelConfig) -> Dict[str, int]:
    """
    Count parameters per component.

    Class/output heads are excluded; their size depends on the pretraining
    label set.

    Args:
        config: Model configuration.

    Returns:
        Mapping of component name to parameter count. Disabled components are
        omitted so every reported component is strictly positive.
    """
    config = _validate(config)
    w, d, m = config.shape.as_tuple()
    p = config.patch_size

    components = {
        "patch_embedding": 3 * p * p * w + w,
        "attention": d * _block_attention(w),
        "mlp": d * _block_mlp(w, m),
        "layer_norm": d * 4 * w,
    }
    if config.include_pos_embedding:
        components["position_embedding"] = config.num_tokens * w
    if config.include_pooling_head:
        components["pooling_head"] = _block_attention(w) + _block_mlp(w, m)
    return components


def param_count(config: ModelConfig) -> int:
    """Total parameter count of the encoder described by ``config``."""
    return sum(param_breakdown(config).values())


def forward_flops(config: ModelConfig) -> float:
    """
    Forward FLOPs per example in GFLOPs.

    Two FLOPs per parameter per token plus the attention score and value
    matmuls, 4 * L^2 * width per block.
    """
    config = _validate(config)
    tokens = config.num_tokens
    w, d, _ = config.shape.as_tuple()
    flops = 2.0 * param_count(config) * tokens + 4.0 * tokens * tokens * w * d
    return flops / GIGA


def cost_breakdown(config: ModelConfig) -> CostBreakdown:
    return CostBreakdown(components=param_breakdown(config), forward_flops=forward_flops(config))


def training_compute(
    config: ModelConfig, examples_seen: int, flops_multiplier: float = 1.0
) -> float:
    """
    Total training compute in GFLOPs.

    The default multiplier of 1.0 counts forward FLOPs only, which is the
    accounting that reproduces the published pretraining budgets; pass 3.0 to
    include the backward pass.
    """
    if examples_seen < 0:
        raise InputValidationError(
            f"examples_seen must be >= 0, got {examples_seen}", invariant="examples_seen >= 0"
        )
    if not flops_multiplier > 0:
        raise InputValidationError(
            f"flops_multiplier must be > 0, got {flops_multiplier}", invariant="flops_multiplier > 0"
        )
    return forward_flops(config) * examples_seen * flops_multiplier


def examples_for_compute(
    config: ModelConfig, compute: float, flops_multiplier: float = 1.0
) -> int:
    """
    Largest example count whose training compute does not exceed ``compute``.

    Inverse of :func:`training_compute`; the floor is corrected against the
    forward product so that ``examples_for_compute(training_compute(n)) == n``.
    """
    if not compute >= 0 or math.isinf(compute):
        raise InputValidationError(
            f"compute must be a finite value >= 0, got {compute}", invariant="compute >= 0"
        )
    if not flops_multiplier > 0:
        raise InputValidationError(
            f"flops_multiplier must be > 0, got {flops_multiplier}", invariant="flops_multiplier > 0"
        )
    per_example = forward_flops(config)
    examples = int(math.floor(compute / (per_example * flops_multiplier)))
    if per_example * (examples + 1) * flops_multiplier <= compute:
        examples += 1
    while examples > 0 and per_example * examples * flops_multiplier > compute:
        examples -= 1
    return examples
