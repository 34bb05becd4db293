"""
Tests for joint shape scaling and the frontier table.
"""

import math

import pytest
from pydantic import ValidationError

from shape_scaling import presets
from shape_scaling.config import CostSettings, ExponentPreset
from shape_scaling.cost_model import training_compute
from shape_scaling.exceptions import InfeasibleDesignError, InputValidationError
from shape_scaling.law import optimal_shape_dim, scaling_exponent
from shape_scaling.models import Shape
from shape_scaling.oracle import default_ground_truth
from shape_scaling.scaler import (
    SCALING_RULE,
    ScaledModel,
    ScalingPlan,
    equal_weights,
    frontier_table,
    growth_factors,
    optimize_shape,
    reconcile_examples,
    round_shape,
    scale_shape,
)

X0 = presets.SEED_SHAPE
EXPONENTS = presets.exponents(ExponentPreset.CLASSIFICATION)


@pytest.fixture(scope="module")
def t0():
    return training_compute(CostSettings().config_for(X0), presets.SEED_EXAMPLES)


def plan(t0, target, **overrides):
    values = {"x0": X0, "t0": t0, "s": EXPONENTS, "w": equal_weights(list(EXPONENTS)), "target_compute": target}
    values.update(overrides)
    return ScalingPlan(**values)


class TestScalingPlan:
    """Test ScalingPlan validation."""

    def test_seed_compute(self, t0):
        """Test the seed compute of 600M examples at the seed shape."""
        assert t0 == pytest.approx(9.946e9, rel=1e-3)

    def test_weights_must_sum_to_one(self, t0):
        """Test that allocation weights sum to one."""
        with pytest.raises(ValidationError, match="sum to 1"):
            plan(t0, 1e12, w={"width": 0.5, "depth": 0.5, "mlp_dim": 0.5})

    def test_weights_cover_exponents(self, t0):
        """Test that weights and exponents name the same dimensions."""
        with pytest.raises(ValidationError, match="must cover"):
            plan(t0, 1e12, w={"width": 0.5, "depth": 0.5})

    def test_nonpositive_exponent(self, t0):
        """Test that exponents must be strictly positive."""
        with pytest.raises(ValidationError):
            plan(t0, 1e12, s={"width": 0.0, "depth": 0.45, "mlp_dim": 0.6})

    def test_downscaling_rejected(self, t0):
        """Test that targets below the seed compute are rejected."""
        with pytest.raises(ValidationError, match="below t0"):
            plan(t0, t0 / 2)

    def test_tau(self, t0):
        """Test the compute multiplier."""
        assert plan(t0, 10 * t0).tau == pytest.approx(10.0)


class TestScaleShape:
    """Test the real-valued scaling rule."""

    def test_identity_at_seed_compute(self, t0):
        """Test that tau = 1 returns the seed shape."""
        assert scale_shape(plan(t0, t0)) == {"width": 608.0, "depth": 10.0, "mlp_dim": 928.0}

    def test_rule(self, t0):
        """Test x_k = x0_k * tau ** (w_k * s_k)."""
        scaled = scale_shape(plan(t0, 1000 * t0))
        for name, exponent in EXPONENTS.items():
            expected = getattr(X0, name) * 1000 ** (exponent / 3)
            assert scaled[name] == pytest.approx(expected, rel=1e-12)

    def test_growth_ordering(self, t0):
        """Test that MLP grows fastest and width slowest under the classification exponents."""
        growth = growth_factors(plan(t0, 100 * t0))
        assert growth["mlp_dim"] > growth["depth"] > growth["width"] > 1.0

    @pytest.mark.parametrize("dimension", ["width", "depth", "mlp_dim"])
    def test_single_dimension_matches_law(self, dimension):
        """Test that a one-dimension plan follows the law's optimal value across compute."""
        law = default_ground_truth().restrict(dimension, presets.STAR_CENTER)
        t0 = 1e10
        s = {dimension: scaling_exponent(law)}
        for target in (1e11, 1e12, 1e13):
            single = ScalingPlan(x0=X0, t0=t0, s=s, w={dimension: 1.0}, target_compute=target)
            ratio = scale_shape(single)[dimension] / getattr(X0, dimension)
            expected = optimal_shape_dim(law, target) / optimal_shape_dim(law, t0)
            assert ratio == pytest.approx(expected, rel=1e-9)

    def test_partial_plan(self, t0):
        """Test that unplanned dimensions keep their seed value."""
        partial = plan(t0, 100 * t0, s={"depth": 0.45}, w={"depth": 1.0})
        scaled = scale_shape(partial)
        assert scaled["width"] == 608.0
        assert scaled["depth"] == pytest.approx(10 * 100 ** 0.45)


class TestRounding:
    """Test rounding to valid architectures."""

    def test_multiples(self):
        """Test rounding to the head count and MLP multiple."""
        shape = round_shape({"width": 1003.9, "depth": 27.4, "mlp_dim": 3611.0})
        assert shape == Shape(width=1008, depth=27, mlp_dim=3616)

    def test_ties_round_up(self):
        """Test that halfway values round up."""
        shape = round_shape({"width": 1000.0, "depth": 2.5, "mlp_dim": 24.0})
        assert shape == Shape(width=1008, depth=3, mlp_dim=32)

    def test_at_least_one_multiple(self):
        """Test that small values round to one multiple."""
        assert round_shape({"width": 3.0, "depth": 0.2, "mlp_dim": 1.0}) == Shape(width=16, depth=1, mlp_dim=16)

    def test_nonpositive(self):
        """Test that non-positive values are rejected."""
        with pytest.raises(InputValidationError):
            round_shape({"width": 0.0, "depth": 1.0, "mlp_dim": 1.0})


class TestReconcileExamples:
    """Test spending the budget on training duration."""

    def test_budget_spent(self):
        """Test that the achieved compute is within one example below the target."""
        model = reconcile_examples(X0, 1e12)
        assert model.achieved_compute <= model.target_compute
        assert model.target_compute - model.achieved_compute < model.per_example_compute

    def test_budget_below_one_example(self):
        """Test that a budget below one example is infeasible."""
        with pytest.raises(InfeasibleDesignError):
            reconcile_examples(X0, 1.0)

    def test_model_rejects_overspend(self):
        """Test that a scaled model cannot exceed its target."""
        with pytest.raises(ValidationError, match="exceeds target"):
            ScaledModel(
                real_shape={"width": 1.0, "depth": 1.0, "mlp_dim": 1.0},
                rounded_shape=X0,
                target_compute=10.0,
                training_examples=2,
                achieved_compute=11.0,
                per_example_compute=5.5,
                param_count=1,
            )


class TestOptimizeShape:
    """Test the joint scaling of the seed shape."""

    def test_sovit_400m_direction(self, t0):
        """Test that scaling to 9T GFLOPs lands near SoViT-400m."""
        model = optimize_shape(plan(t0, presets.SOVIT_400M_COMPUTE))
        shape = model.rounded_shape
        assert shape.width == pytest.approx(1152, rel=0.20)
        assert shape.mlp_dim == pytest.approx(4304, rel=0.20)
        assert abs(shape.depth - 27) <= 2
        assert shape == Shape(width=1008, depth=28, mlp_dim=3616)

    def test_model_fields(self, t0):
        """Test the bookkeeping of a scaled model."""
        model = optimize_shape(plan(t0, 100 * t0))
        assert model.training_examples >= 1
        assert model.achieved_compute <= 100 * t0
        assert set(model.real_shape) == {"width", "depth", "mlp_dim"}

    def test_identity(self, t0):
        """Test that the seed compute reproduces the seed shape and duration."""
        model = optimize_shape(plan(t0, t0))
        assert model.rounded_shape == X0
        assert model.training_examples == presets.SEED_EXAMPLES


class TestFrontierTable:
    """Test the predicted frontier table."""

    def test_decades(self, t0):
        """Test rows and parameter growth per compute decade."""
        table = frontier_table(X0, t0, EXPONENTS, None, [t0, 10 * t0, 100 * t0])
        assert [(r.width, r.depth, r.mlp_dim) for r in table.rows] == [
            (608, 10, 928),
            (720, 14, 1472),
            (848, 20, 2336),
        ]
        assert table.rows[1].params == 63_624_000
        assert table.rows[2].params == 144_526_208
        for low, high in zip(table.rows, table.rows[1:]):
            assert 2.0 <= high.params / low.params <= 3.0
        assert table.monotone

    def test_multitask_params_sublinear(self, t0):
        """Test that parameters grow slower than compute per decade under the multitask exponents."""
        multitask = presets.exponents(ExponentPreset.MULTITASK)
        table = frontier_table(X0, t0, multitask, None, [t0 * 10 ** k for k in range(5)])
        for low, high in zip(table.rows, table.rows[1:]):
            assert 1.0 < high.params / low.params < 10.0
            assert high.examples > low.examples
        assert table.monotone

    def test_metadata(self, t0):
        """Test that the table records the scaling rule and inputs."""
        table = frontier_table(X0, t0, EXPONENTS, None, [1e10, 1e11])
        assert table.metadata["scaling_rule"] == SCALING_RULE
        assert table.metadata["x0"] == "608,10,928"
        assert table.metadata["monotone"] == "true"
        assert math.isclose(float(table.metadata["t0_gflops"]), t0)

    @pytest.mark.parametrize(
        "grid",
        [[], [1e11, 1e10], [1e9, 1e10, 1e11]],
    )
    def test_invalid_grid(self, t0, grid):
        """Test that empty, unsorted or sub-seed grids are rejected."""
        with pytest.raises(InputValidationError):
            frontier_table(X0, t0, EXPONENTS, None, grid)
