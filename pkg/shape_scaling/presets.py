"""
Published architectures, exponent sets and sweep designs.

Shapes are (width, depth, mlp_dim). Example counts are absolute numbers of
training images, compute is GFLOPs.
"""

from typing import Dict, Tuple

from .config import ExponentPreset
from .cost_model import ModelConfig
from .models import Shape

# name -> (shape, patch size)
_ARCHITECTURES: Dict[str, Tuple[Tuple[int, int, int], int]] = {
    "vit-b/14": ((768, 12, 3072), 14),
    "vit-l/16": ((1024, 24, 4096), 16),
    "vit-g/14": ((1408, 40, 6144), 14),
    "vit-G/14": ((1664, 48, 8192), 14),
    "sovit-150m/14": ((880, 18, 2320), 14),
    "sovit-400m/14": ((1152, 27, 4304), 14),
}

EXPONENT_PRESETS: Dict[ExponentPreset, Dict[str, float]] = {
    ExponentPreset.CLASSIFICATION: {"width": 0.22, "depth": 0.45, "mlp_dim": 0.60},
    ExponentPreset.MULTITASK: {"width": 0.25, "depth": 0.49, "mlp_dim": 0.62},
}

# Grid sweep that located the small compute-optimal seed shape.
SEED_SHAPE = Shape(width=608, depth=10, mlp_dim=928)
SEED_EXAMPLES = 600_000_000
GRID_RANGES: Dict[str, Tuple[int, ...]] = {
    "width": (416, 512, 608, 768),
    "depth": (6, 8, 10, 12),
    "mlp_dim": (768, 928, 1088, 1360),
}

# Star sweep around a large centre, one dimension varied at a time.
STAR_CENTER = Shape(width=1968, depth=40, mlp_dim=6144)
STAR_GRIDS: Dict[str, Tuple[int, ...]] = {
    "width": (608, 768, 928, 1088, 1328, 1648),
    "depth": (8, 10, 12, 16, 20, 24),
    "mlp_dim": (1088, 1360, 1728, 2160, 2592, 3072),
}
# 500K, 1M and 2M steps at batch size 128.
STAR_CHECKPOINTS: Tuple[int, ...] = (64_000_000, 128_000_000, 256_000_000)
# plan_star settings that regenerate STAR_GRIDS from STAR_CENTER.
STAR_STEP_FACTORS: Dict[str, float] = {"width": 1.22, "depth": 1.25, "mlp_dim": 1.22}
STAR_CEILING_RATIOS: Dict[str, float] = {"width": 0.85, "depth": 0.6, "mlp_dim": 0.5}
STAR_POINTS_PER_DIM = 6

# Budget of the largest jointly scaled classification model.
SOVIT_400M_COMPUTE = 9e12
SOVIT_400M_EXAMPLES = 40_000_000_000

TUNING_NOTE = (
    "learning rate and weight decay are swept per architecture before the "
    "shape sweep; the manifest records shapes and durations only"
)


def architecture_names() -> Tuple[str, ...]:
    return tuple(_ARCHITECTURES)


def architecture(name: str, image_resolution: int = 224, **overrides) -> ModelConfig:
    """
    Build the ModelConfig of a published architecture.

    Raises:
        KeyError: If ``name`` is not a known architecture.
    """
    try:
        dims, patch = _ARCHITECTURES[name]
    except KeyError:
        known = ", ".join(_ARCHITECTURES)
        raise KeyError(f"unknown architecture {name!r}; known: {known}") from None
    settings = {"patch_size": patch, "image_resolution": image_resolution, "num_heads": 16}
    settings.update(overrides)
    return ModelConfig(shape=Shape(width=dims[0], depth=dims[1], mlp_dim=dims[2]), **settings)


def exponents(preset: ExponentPreset) -> Dict[str, float]:
    return dict(EXPONENT_PRESETS[ExponentPreset(preset)])
