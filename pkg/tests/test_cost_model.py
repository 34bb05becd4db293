"""
Tests for parameter, FLOPs and training compute accounting.
"""

import pytest
from pydantic import ValidationError

from shape_scaling import presets
from shape_scaling.config import CostSettings
from shape_scaling.cost_model import (
    ModelConfig,
    cost_breakdown,
    examples_for_compute,
    forward_flops,
    param_breakdown,
    param_count,
    training_compute,
)
from shape_scaling.exceptions import InputValidationError
from shape_scaling.models import Shape


def unit_config(**overrides) -> ModelConfig:
    settings = {"patch_size": 1, "image_resolution": 1, "num_heads": 1}
    settings.update(overrides)
    return ModelConfig(shape=Shape(width=1, depth=1, mlp_dim=1), **settings)


class TestModelConfig:
    """Test ModelConfig validation."""

    def test_defaults(self):
        """Test the default patch, resolution and head settings."""
        config = ModelConfig(shape=Shape(width=768, depth=12, mlp_dim=3072))
        assert config.patch_size == 14
        assert config.image_resolution == 224
        assert config.num_heads == 16
        assert config.num_tokens == 256

    def test_width_not_divisible_by_heads(self):
        """Test that width must be a multiple of the head count."""
        with pytest.raises(ValidationError, match="divisible by num_heads"):
            ModelConfig(shape=Shape(width=100, depth=2, mlp_dim=64), num_heads=16)

    def test_resolution_not_divisible_by_patch(self):
        """Test that the resolution must be a multiple of the patch size."""
        with pytest.raises(ValidationError, match="divisible by patch_size"):
            ModelConfig(shape=Shape(width=64, depth=2, mlp_dim=64), image_resolution=225)

    def test_zero_dimension_rejected(self):
        """Test that zero-sized shapes are rejected."""
        with pytest.raises(ValidationError):
            Shape(width=0, depth=1, mlp_dim=1)

    def test_with_shape(self):
        """Test swapping the shape keeps structural settings."""
        config = presets.architecture("vit-l/16")
        other = config.with_shape(Shape(width=512, depth=4, mlp_dim=512))
        assert other.patch_size == 16
        assert other.shape.width == 512


class TestParamCount:
    """Test parameter counting."""

    def test_unit_shape_hand_count(self):
        """Test the closed-form count of the unit shape."""
        # patch 4 + attention 8 + mlp 4 + norms 4 + position 1 + head 12
        assert param_count(unit_config()) == 33

    def test_unit_shape_without_optional_parts(self):
        """Test the unit shape without pooling head and position embedding."""
        config = unit_config(include_pooling_head=False, include_pos_embedding=False)
        assert param_count(config) == 20
        assert set(param_breakdown(config)) == {"patch_embedding", "attention", "mlp", "layer_norm"}

    def test_breakdown_sums_to_total(self):
        """Test that the breakdown components sum to param_count."""
        config = presets.architecture("sovit-400m/14")
        breakdown = cost_breakdown(config)
        assert breakdown.param_count == sum(breakdown.components.values())
        assert breakdown.param_count == param_count(config)
        assert all(value > 0 for value in breakdown.components.values())

    @pytest.mark.parametrize(
        "name,resolution,expected",
        [
            ("vit-g/14", 224, 1011e6),
            ("sovit-400m/14", 224, 428e6),
            ("vit-l/16", 384, 303e6),
        ],
    )
    def test_published_param_counts(self, name, resolution, expected):
        """Test parameter counts against published figures within 5%."""
        config = presets.architecture(name, image_resolution=resolution)
        assert param_count(config) == pytest.approx(expected, rel=0.05)

    def test_sovit_400m_exact(self):
        """Test the exact SoViT-400m/14 count including the pooling head."""
        assert param_count(presets.architecture("sovit-400m/14")) == 427_674_944

    @pytest.mark.parametrize("dimension", ["width", "depth", "mlp_dim"])
    def test_monotone_in_each_dimension(self, dimension):
        """Test that growing any dimension never shrinks the count."""
        base = Shape(width=256, depth=4, mlp_dim=512)
        step = {"width": 16, "depth": 1, "mlp_dim": 16}[dimension]
        config = ModelConfig(shape=base)
        bigger = config.with_shape(base.replace(**{dimension: getattr(base, dimension) + step}))
        assert param_count(bigger) > param_count(config)


class TestForwardFlops:
    """Test forward FLOPs."""

    def test_unit_shape(self):
        """Test FLOPs of the unit shape: 2 per parameter plus attention matmuls."""
        assert forward_flops(unit_config()) == pytest.approx((2 * 33 + 4) / 1e9)

    @pytest.mark.parametrize(
        "name,resolution,expected",
        [
            ("vit-l/16", 384, 383.0),
            ("sovit-400m/14", 224, 221.0),
            ("sovit-400m/14", 518, 1374.0),
            ("vit-g/14", 518, 3208.0),
        ],
    )
    def test_published_flops(self, name, resolution, expected):
        """Test GFLOPs per example against published figures within 5%."""
        config = presets.architecture(name, image_resolution=resolution)
        assert forward_flops(config) == pytest.approx(expected, rel=0.05)

    def test_flops_grow_with_resolution(self):
        """Test that more tokens cost more FLOPs."""
        low = presets.architecture("vit-b/14", image_resolution=224)
        high = presets.architecture("vit-b/14", image_resolution=448)
        assert forward_flops(high) > 4 * forward_flops(low)


class TestTrainingCompute:
    """Test total training compute and its inverse."""

    def test_sovit_400m_budget(self):
        """Test that 40B examples of SoViT-400m cost about 9T GFLOPs."""
        config = presets.architecture("sovit-400m/14")
        assert training_compute(config, 40_000_000_000) == pytest.approx(9e12, rel=0.05)

    def test_vit_g_budget(self):
        """Test that 16B examples of ViT-g cost about 9T GFLOPs."""
        config = presets.architecture("vit-g/14")
        assert training_compute(config, 16_000_000_000) == pytest.approx(9e12, rel=0.05)

    def test_multiplier(self):
        """Test that the multiplier scales compute linearly."""
        config = presets.architecture("vit-b/14")
        forward_only = training_compute(config, 1000)
        assert training_compute(config, 1000, flops_multiplier=3.0) == pytest.approx(3 * forward_only)

    def test_zero_examples(self):
        """Test that no examples cost no compute."""
        assert training_compute(presets.architecture("vit-b/14"), 0) == 0.0

    def test_negative_examples(self):
        """Test that a negative example count is rejected."""
        with pytest.raises(InputValidationError) as excinfo:
            training_compute(presets.architecture("vit-b/14"), -1)
        assert excinfo.value.invariant == "examples_seen >= 0"

    def test_bad_multiplier(self):
        """Test that a non-positive multiplier is rejected."""
        with pytest.raises(InputValidationError):
            training_compute(presets.architecture("vit-b/14"), 10, flops_multiplier=0.0)

    @pytest.mark.parametrize("examples", [0, 1, 7, 600_000_000, 40_000_000_000])
    def test_examples_for_compute_inverts(self, examples):
        """Test that examples_for_compute recovers the example count exactly."""
        config = presets.architecture("sovit-400m/14")
        compute = training_compute(config, examples)
        assert examples_for_compute(config, compute) == examples

    def test_examples_for_compute_never_overshoots(self):
        """Test that the returned count fits inside the budget."""
        config = CostSettings().config_for(presets.SEED_SHAPE)
        budget = 1e10
        examples = examples_for_compute(config, budget)
        assert training_compute(config, examples) <= budget
        assert training_compute(config, examples + 1) > budget

    def test_examples_for_compute_rejects_negative(self):
        """Test that negative or infinite compute is rejected."""
        config = presets.architecture("vit-b/14")
        with pytest.raises(InputValidationError):
            examples_for_compute(config, -1.0)
        with pytest.raises(InputValidationError):
            examples_for_compute(config, float("inf"))


class TestPresets:
    """Test published architecture presets."""

    def test_architecture_names(self):
        """Test that every listed preset builds."""
        for name in presets.architecture_names():
            assert param_count(presets.architecture(name)) > 0

    def test_unknown_architecture(self):
        """Test that unknown presets raise KeyError listing the known ones."""
        with pytest.raises(KeyError, match="vit-b/14"):
            presets.architecture("vit-z/3")

    def test_overrides(self):
        """Test structural overrides of a preset."""
        config = presets.architecture("vit-b/14", include_pooling_head=False)
        assert config.include_pooling_head is False
