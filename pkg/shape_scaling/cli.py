"""
Shape Scaling CLI.

Command-line interface for cost queries, sweep planning, simulation, law
fitting, seed selection and joint scaling.
"""

import argparse
import logging
import sys
from typing import Dict, List, Optional, Tuple, Union

from pydantic import ValidationError

from . import presets
from .__version__ import __version__
from .config import CostSettings, ExponentPreset, FitObjective, FitOptions, ToolConfig
from .config_loader import find_config_file, load_config
from .cost_model import cost_breakdown, training_compute
from .exceptions import (
    ConfigurationError,
    InfeasibleDesignError,
    InputValidationError,
    NonConvergenceError,
    ShapeScalingError,
)
from .fit import exponent_stability, extrapolation_check, fit_dimension, fit_star, star_extrapolation_check
from .models import DIMENSIONS, RunRecord, Shape, check_dimension
from .oracle import GroundTruth, NoiseModel, NoiseSpec, default_ground_truth, gen_center_runs, gen_runs
from .records import (
    emit_frontier,
    emit_records,
    load_design,
    parse_count,
    parse_quantity,
    parse_quantity_list,
    parse_records,
    read_text,
    write_json,
    write_manifest,
)
from .scaler import SCALING_RULE, ScalingPlan, equal_weights, frontier_table, optimize_shape
from .sweeps import BinningSpec, StarSweepSpec, plan_grid, plan_star, published_star_design, select_seed_shape

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_INCONCLUSIVE = 2


def setup_logging(verbose: bool = False, level: str = "INFO", fmt: Optional[str] = None) -> None:
    """Set up logging configuration. Logs go to stderr so stdout artifacts stay clean."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else getattr(logging, level),
        format=fmt or "%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
        stream=sys.stderr,
    )


# ============================================================================
# Argument helpers
# ============================================================================

def _mapping(text: str) -> Dict[str, float]:
    """Parse ``width=0.22,depth=0.45,mlp_dim=0.6``."""
    result = {}
    for part in text.split(","):
        if not part.strip():
            continue
        if "=" not in part:
            raise InputValidationError(f"expected name=value, got {part!r}", invariant="name=value pairs")
        name, value = part.split("=", 1)
        result[check_dimension(name.strip())] = parse_quantity(value)
    return result


def _scalar_or_mapping(text: str) -> Union[float, Dict[str, float]]:
    return _mapping(text) if "=" in text else parse_quantity(text)


def _int_list(text: str) -> List[int]:
    return [parse_count(part) for part in text.split(",") if part.strip()]


def _load_tool_config(path: Optional[str]) -> Tuple[ToolConfig, Optional[str]]:
    """The tool configuration and the file it came from, if any."""
    if path:
        return load_config(path), path
    found = find_config_file()
    if found is not None:
        logger.info("Using configuration %s", found)
        return load_config(found), str(found)
    return ToolConfig(), None


def _cost_settings(args: argparse.Namespace, config: ToolConfig) -> CostSettings:
    overrides = {
        "patch_size": getattr(args, "patch", None),
        "image_resolution": getattr(args, "res", None),
        "num_heads": getattr(args, "heads", None),
        "flops_multiplier": getattr(args, "multiplier", None),
    }
    if getattr(args, "no_pooling_head", False):
        overrides["include_pooling_head"] = False
    if getattr(args, "no_pos_embedding", False):
        overrides["include_pos_embedding"] = False
    updates = {key: value for key, value in overrides.items() if value is not None}
    return CostSettings.model_validate({**config.cost.model_dump(), **updates})


def _fit_options(args: argparse.Namespace, config: ToolConfig) -> FitOptions:
    updates = {"seed": args.seed}
    if getattr(args, "restarts", None) is not None:
        updates["restarts"] = args.restarts
    if getattr(args, "objective", None) is not None:
        updates["objective"] = args.objective
    if getattr(args, "workers", None) is not None:
        updates["workers"] = args.workers
    return FitOptions.model_validate({**config.fit.model_dump(), **updates})


def _exponents_and_weights(args: argparse.Namespace, config: ToolConfig):
    if args.exponents:
        exponents = _mapping(args.exponents)
    elif args.preset is None and config.scaler.exponents is not None:
        exponents = dict(config.scaler.exponents)
    else:
        exponents = presets.exponents(args.preset or config.scaler.preset)
    if args.weights:
        weights = _mapping(args.weights)
    elif config.scaler.weights is not None and set(config.scaler.weights) == set(exponents):
        weights = dict(config.scaler.weights)
    else:
        weights = equal_weights([name for name in DIMENSIONS if name in exponents])
    return exponents, weights


def _seed_compute(args: argparse.Namespace, x0: Shape, cost: CostSettings) -> float:
    if args.t0 is not None:
        return parse_quantity(args.t0)
    examples = parse_count(args.t0_examples)
    return training_compute(cost.config_for(x0), examples, cost.flops_multiplier)


def _parse_run_records(args: argparse.Namespace, config: ToolConfig, path: str) -> List[RunRecord]:
    # an explicit --config overrides a cost sidecar; an auto-detected one only fills in for a missing sidecar
    explicit = config.cost if args.config else None
    fallback = config.cost if getattr(args, "config_source", None) else None
    return parse_records(path, cost=explicit, default_cost=fallback)


def _records(args: argparse.Namespace, config: ToolConfig, path: str) -> List[RunRecord]:
    records = _parse_run_records(args, config, path)
    if getattr(args, "metric", None):
        records = [r for r in records if r.metric_name == args.metric]
    return records


# ============================================================================
# Commands
# ============================================================================

def cost_command(args: argparse.Namespace, config: ToolConfig) -> int:
    """Handle the cost command."""
    cost = _cost_settings(args, config)
    if args.preset:
        shape = presets.architecture(args.preset).shape
        if args.patch is None:
            cost = cost.model_copy(update={"patch_size": presets.architecture(args.preset).patch_size})
    else:
        missing = [flag for flag in ("width", "depth", "mlp") if getattr(args, flag) is None]
        if missing:
            raise InputValidationError(
                f"missing --{', --'.join(missing)} (or pass --preset)", invariant="shape given"
            )
        shape = Shape(width=args.width, depth=args.depth, mlp_dim=args.mlp)

    model_config = cost.config_for(shape)
    breakdown = cost_breakdown(model_config)
    report = {
        "shape": shape.as_dict(),
        "patch_size": model_config.patch_size,
        "image_resolution": model_config.image_resolution,
        "num_heads": model_config.num_heads,
        "num_tokens": model_config.num_tokens,
        "param_count": breakdown.param_count,
        "forward_gflops": breakdown.forward_flops,
        "components": breakdown.components,
    }
    if args.examples is not None:
        examples = parse_count(args.examples)
        report["examples_seen"] = examples
        report["flops_multiplier"] = cost.flops_multiplier
        report["training_compute_gflops"] = training_compute(model_config, examples, cost.flops_multiplier)
    write_json(report, args.output)
    return EXIT_OK


def plan_star_command(args: argparse.Namespace, config: ToolConfig) -> int:
    """Handle the plan-star command."""
    cost = _cost_settings(args, config)
    if args.published:
        spec: StarSweepSpec = published_star_design(cost)
    else:
        center = Shape.from_text(args.center) if args.center else presets.STAR_CENTER
        if args.published_settings:
            step, ceiling = presets.STAR_STEP_FACTORS, presets.STAR_CEILING_RATIOS
        else:
            step, ceiling = _scalar_or_mapping(args.step), _scalar_or_mapping(args.ceiling)
        checkpoints = _int_list(args.checkpoints) if args.checkpoints else presets.STAR_CHECKPOINTS
        spec = plan_star(
            center,
            step_factor=step,
            points_per_dim=args.points,
            ceiling_ratio=ceiling,
            checkpoints=checkpoints,
            cost=cost,
            mlp_multiple=config.scaler.mlp_multiple,
        )
    write_manifest(spec, args.output)
    return EXIT_OK


def plan_grid_command(args: argparse.Namespace, config: ToolConfig) -> int:
    """Handle the plan-grid command."""
    cost = _cost_settings(args, config)
    ranges = {
        "width": _int_list(args.width) if args.width else list(presets.GRID_RANGES["width"]),
        "depth": _int_list(args.depth) if args.depth else list(presets.GRID_RANGES["depth"]),
        "mlp_dim": _int_list(args.mlp) if args.mlp else list(presets.GRID_RANGES["mlp_dim"]),
    }
    if args.budgets:
        spec = plan_grid(ranges, compute_budgets=parse_quantity_list(args.budgets), cost=cost)
    else:
        examples = parse_count(args.examples) if args.examples else presets.SEED_EXAMPLES
        spec = plan_grid(ranges, examples_per_run=examples, cost=cost)
    write_manifest(spec, args.output)
    return EXIT_OK


def simulate_command(args: argparse.Namespace, config: ToolConfig) -> int:
    """Handle the simulate command."""
    design = load_design(args.design)
    if args.truth:
        truth = GroundTruth.model_validate_json(read_text(args.truth))
    else:
        truth = default_ground_truth(t_ref=parse_quantity(args.t_ref))
    noise = NoiseSpec(
        model=NoiseModel(args.noise) if args.sigma > 0 else NoiseModel.NONE,
        sigma=args.sigma,
        seed=args.seed,
    )
    cost = config.cost if args.config else None
    records = gen_runs(truth, design, noise, cost=cost, metric_name=args.metric)
    if args.include_center:
        if not isinstance(design, StarSweepSpec):
            raise InputValidationError("--include-center needs a star design", invariant="star design")
        centre_noise = noise.model_copy(update={"seed": (args.seed + 1) % 2**64})
        records += gen_center_runs(truth, design, centre_noise, cost=cost, metric_name=args.metric)
    emit_records(records, args.output, fmt=args.format)
    return EXIT_OK


def fit_command(args: argparse.Namespace, config: ToolConfig) -> int:
    """Handle the fit command."""
    options = _fit_options(args, config)
    records = _records(args, config, args.records)
    report = fit_dimension(records, options, args.dimension)
    if args.holdout:
        holdout = _parse_run_records(args, config, args.holdout)
        if args.metric:
            holdout = [r for r in holdout if r.metric_name == args.metric]
    else:
        holdout = [r for r in records if r.tag == "center"]
    if holdout:
        extrapolation_check(report, holdout)
    write_json(report, args.output)
    return EXIT_OK if report.converged else EXIT_INCONCLUSIVE


def fit_star_command(args: argparse.Namespace, config: ToolConfig) -> int:
    """Handle the fit-star command."""
    options = _fit_options(args, config)
    records = _records(args, config, args.records)
    report = fit_star(records, Shape.from_text(args.anchor), parse_quantity(args.anchor_compute), options)
    holdout = [r for r in records if r.tag == "center"]
    if holdout:
        star_extrapolation_check(report, holdout)
    write_json(report, args.output)
    return EXIT_OK if report.converged else EXIT_INCONCLUSIVE


def exponents_command(args: argparse.Namespace, config: ToolConfig) -> int:
    """Handle the exponents command."""
    options = _fit_options(args, config)
    records = _records(args, config, args.records)
    if args.dimension:
        dimensions = [check_dimension(args.dimension)]
    else:
        tested = {r.dimension_under_test for r in records} - {None}
        dimensions = [name for name in DIMENSIONS if name in tested]
    if not dimensions:
        raise InputValidationError(
            "records carry no dimension_under_test; pass --dimension", invariant="dimension given"
        )

    reports = []
    for dimension in dimensions:
        by_metric: Dict[str, List[RunRecord]] = {}
        for record in records:
            if record.dimension_under_test in (dimension, None):
                by_metric.setdefault(record.metric_name, []).append(record)
        reports.append(exponent_stability(by_metric, options, dimension))

    write_json([report.model_dump(mode="json") for report in reports], args.output)
    return EXIT_INCONCLUSIVE if any(report.errors for report in reports) else EXIT_OK


def select_seed_command(args: argparse.Namespace, config: ToolConfig) -> int:
    """Handle the select-seed command."""
    records = _records(args, config, args.records)
    binning = BinningSpec(
        edges=parse_quantity_list(args.bins) if args.bins else None,
        min_run=args.min_run,
    )
    selection = select_seed_shape(records, binning)
    write_json(selection, args.output)
    return EXIT_OK if selection.conclusive else EXIT_INCONCLUSIVE


def optimize_shape_command(args: argparse.Namespace, config: ToolConfig) -> int:
    """Handle the optimize-shape command."""
    cost = _cost_settings(args, config)
    x0 = Shape.from_text(args.x0)
    exponents, weights = _exponents_and_weights(args, config)
    plan = ScalingPlan(
        x0=x0,
        t0=_seed_compute(args, x0, cost),
        s=exponents,
        w=weights,
        target_compute=parse_quantity(args.target),
    )
    model = optimize_shape(plan, cost, config.scaler.mlp_multiple)
    payload = model.model_dump(mode="json")
    payload["plan"] = plan.model_dump(mode="json")
    payload["scaling_rule"] = SCALING_RULE
    write_json(payload, args.output)
    return EXIT_OK


def frontier_command(args: argparse.Namespace, config: ToolConfig) -> int:
    """Handle the frontier command."""
    cost = _cost_settings(args, config)
    x0 = Shape.from_text(args.x0)
    exponents, weights = _exponents_and_weights(args, config)
    table = frontier_table(
        x0,
        _seed_compute(args, x0, cost),
        exponents,
        weights,
        parse_quantity_list(args.grid),
        cost=cost,
        mlp_multiple=config.scaler.mlp_multiple,
    )
    emit_frontier(table, args.output, fmt=args.format)
    return EXIT_OK


COMMANDS = {
    "cost": cost_command,
    "plan-star": plan_star_command,
    "plan-grid": plan_grid_command,
    "simulate": simulate_command,
    "fit": fit_command,
    "fit-star": fit_star_command,
    "exponents": exponents_command,
    "select-seed": select_seed_command,
    "optimize-shape": optimize_shape_command,
    "frontier": frontier_command,
}


# ============================================================================
# Parser
# ============================================================================

def _add_output(parser: argparse.ArgumentParser, what: str) -> None:
    parser.add_argument(
        "-o", "--output",
        type=str,
        default="-",
        help=f"Output file for the {what} (default: stdout)",
    )


def _add_cost_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("cost model")
    group.add_argument("--res", type=int, help="Image resolution in pixels per side (default: config, 224)")
    group.add_argument("--patch", type=int, help="Patch size in pixels per side (default: config, 14)")
    group.add_argument("--heads", type=int, help="Attention heads; width must divide evenly (default: config, 16)")
    group.add_argument(
        "--multiplier",
        type=float,
        help="Training FLOPs per forward FLOP; 3.0 adds the backward pass (default: config, 1.0)",
    )
    group.add_argument("--no-pooling-head", action="store_true", help="Exclude the pooling head from counts")
    group.add_argument("--no-pos-embedding", action="store_true", help="Exclude positional embeddings")


def _add_scaling_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--x0",
        type=str,
        default=",".join(str(v) for v in presets.SEED_SHAPE.as_tuple()),
        help="Seed shape width,depth,mlp_dim (default: 608,10,928)",
    )
    t0 = parser.add_mutually_exclusive_group(required=True)
    t0.add_argument("--t0", type=str, help="Seed compute in GFLOPs, e.g. 9.9e9")
    t0.add_argument("--t0-examples", type=str, help="Seed compute as training examples at x0, e.g. 600M")
    parser.add_argument(
        "--preset",
        type=str,
        choices=[p.value for p in ExponentPreset],
        help="Published exponent set (default: config, classification)",
    )
    parser.add_argument("--exponents", type=str, help="Explicit exponents, e.g. width=0.22,depth=0.45,mlp_dim=0.6")
    parser.add_argument("--weights", type=str, help="Compute shares summing to 1 (default: 1/D each)")
    _add_cost_flags(parser)


def create_parser() -> argparse.ArgumentParser:
    """Create the CLI argument parser."""
    parser = argparse.ArgumentParser(
        prog="shape-scaling",
        description="Compute-optimal shape scaling for vision transformers",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "-v", "--verbose",
        action="store_true",
        help="Enable verbose logging",
    )
    parser.add_argument(
        "-c", "--config",
        type=str,
        help="Path to shape_scaling.toml or .json (default: auto-detect)",
    )

    subparsers = parser.add_subparsers(dest="command", help="Available commands")

    # Cost command
    cost_parser = subparsers.add_parser("cost", help="Parameter count, forward GFLOPs and training compute")
    cost_parser.add_argument("--width", type=int, help="Width (channels)")
    cost_parser.add_argument("--depth", type=int, help="Depth (encoder blocks)")
    cost_parser.add_argument("--mlp", type=int, help="MLP hidden dimension (channels)")
    cost_parser.add_argument(
        "--preset", type=str, choices=presets.architecture_names(), help="Published architecture"
    )
    cost_parser.add_argument("--examples", type=str, help="Training examples for total compute, e.g. 40B")
    _add_cost_flags(cost_parser)
    _add_output(cost_parser, "JSON cost report")

    # Plan-star command
    star_parser = subparsers.add_parser("plan-star", help="Plan a star sweep and emit its run manifest")
    star_parser.add_argument("--center", type=str, help="Centre shape width,depth,mlp_dim (default: 1968,40,6144)")
    star_parser.add_argument(
        "--step", type=str, default="1.2",
        help="Ratio between consecutive grid values, scalar or width=..,depth=..,mlp_dim=.. (default: 1.2)",
    )
    star_parser.add_argument("--points", type=int, default=6, help="Grid points per dimension (default: 6)")
    star_parser.add_argument(
        "--ceiling", type=str, default="0.85",
        help="Largest grid value as a fraction of the centre, scalar or per dimension (default: 0.85)",
    )
    star_parser.add_argument(
        "--checkpoints", type=str,
        help="Example counts evaluated per run (default: 64M,128M,256M)",
    )
    star_parser.add_argument(
        "--published-settings", action="store_true",
        help="Use the per-dimension step and ceiling that regenerate the published grids",
    )
    star_parser.add_argument("--published", action="store_true", help="Emit the published grids verbatim")
    _add_cost_flags(star_parser)
    _add_output(star_parser, "JSON run manifest")

    # Plan-grid command
    grid_parser = subparsers.add_parser("plan-grid", help="Plan a grid sweep and emit its run manifest")
    grid_parser.add_argument("--width", type=str, help="Widths, e.g. 416,512,608,768 (default: published grid)")
    grid_parser.add_argument("--depth", type=str, help="Depths, e.g. 6,8,10,12 (default: published grid)")
    grid_parser.add_argument("--mlp", type=str, help="MLP dims, e.g. 768,928,1088,1360 (default: published grid)")
    duration = grid_parser.add_mutually_exclusive_group()
    duration.add_argument("--examples", type=str, help="Training examples per run (default: 600M)")
    duration.add_argument("--budgets", type=str, help="Shared compute budgets in GFLOPs, e.g. 8e9,1e10,1.2e10")
    _add_cost_flags(grid_parser)
    _add_output(grid_parser, "JSON run manifest")

    # Simulate command
    sim_parser = subparsers.add_parser("simulate", help="Generate run records from the synthetic ground truth")
    sim_parser.add_argument("--design", type=str, required=True, help="Run manifest or sweep design JSON")
    sim_parser.add_argument("--seed", type=int, required=True, help="Noise seed (64-bit unsigned)")
    sim_parser.add_argument("--sigma", type=float, default=0.0, help="Noise level; log-scale std for lognormal (default: 0)")
    sim_parser.add_argument(
        "--noise", type=str, choices=[NoiseModel.LOGNORMAL.value, NoiseModel.ADDITIVE.value],
        default=NoiseModel.LOGNORMAL.value, help="Noise model (default: lognormal)",
    )
    sim_parser.add_argument("--truth", type=str, help="GroundTruth JSON (default: built-in ground truth)")
    sim_parser.add_argument(
        "--t-ref", type=str, default="1e10",
        help="GFLOPs at which the built-in ground truth is optimal at 608,10,928 (default: 1e10)",
    )
    sim_parser.add_argument("--metric", type=str, default="loss", help="Metric name (default: loss)")
    sim_parser.add_argument("--include-center", action="store_true", help="Append star-centre holdout records")
    sim_parser.add_argument(
        "--format", type=str, choices=["csv", "jsonl"], help="Record format (default: from output suffix, csv)"
    )
    _add_output(sim_parser, "run records")

    # Fit command
    fit_parser = subparsers.add_parser("fit", help="Fit one dimension's law to run records")
    fit_parser.add_argument("--records", type=str, required=True, help="Run record file (CSV or .jsonl)")
    fit_parser.add_argument("--seed", type=int, required=True, help="Seed of the restart schedule")
    fit_parser.add_argument("--dimension", type=str, choices=list(DIMENSIONS), help="Dimension under test")
    fit_parser.add_argument("--metric", type=str, help="Use only records of this metric")
    fit_parser.add_argument("--holdout", type=str, help="Held-out record file for the extrapolation check (default: centre-tagged records)")
    fit_parser.add_argument("--restarts", type=int, help="Restart count (default: config, 32)")
    fit_parser.add_argument(
        "--objective", type=str, choices=[o.value for o in FitObjective], help="Relative-error objective"
    )
    fit_parser.add_argument("--workers", type=int, help="Threads running restarts (default: 1)")
    _add_output(fit_parser, "JSON fit report")

    # Fit-star command
    star_fit_parser = subparsers.add_parser(
        "fit-star", help="Fit the decomposable loss to every arm of a star sweep at once"
    )
    star_fit_parser.add_argument("--records", type=str, required=True, help="Star-sweep run record file")
    star_fit_parser.add_argument("--seed", type=int, required=True, help="Seed of the restart schedule")
    star_fit_parser.add_argument(
        "--anchor",
        type=str,
        default=",".join(str(v) for v in presets.SEED_SHAPE.as_tuple()),
        help="Shape optimal at the anchor compute, width,depth,mlp_dim (default: 608,10,928)",
    )
    star_fit_parser.add_argument(
        "--anchor-compute", type=str, required=True, help="GFLOPs at which the anchor is optimal, e.g. 1e10"
    )
    star_fit_parser.add_argument("--metric", type=str, help="Use only records of this metric")
    star_fit_parser.add_argument("--restarts", type=int, help="Restart count (default: config, 32)")
    star_fit_parser.add_argument(
        "--objective", type=str, choices=[o.value for o in FitObjective], help="Relative-error objective"
    )
    star_fit_parser.add_argument("--workers", type=int, help="Threads running restarts (default: 1)")
    _add_output(star_fit_parser, "JSON star fit report")

    # Exponents command
    exp_parser = subparsers.add_parser("exponents", help="Compare fitted exponents across metrics")
    exp_parser.add_argument("--records", type=str, required=True, help="Run record file with one or more metrics")
    exp_parser.add_argument("--seed", type=int, required=True, help="Seed of the restart schedule")
    exp_parser.add_argument("--dimension", type=str, choices=list(DIMENSIONS), help="Dimension (default: all)")
    exp_parser.add_argument("--restarts", type=int, help="Restart count (default: config, 32)")
    exp_parser.add_argument("--workers", type=int, help="Threads running restarts (default: 1)")
    _add_output(exp_parser, "JSON stability report")

    # Select-seed command
    seed_parser = subparsers.add_parser("select-seed", help="Select the seed shape from grid-sweep records")
    seed_parser.add_argument("--records", type=str, required=True, help="Grid-sweep run record file")
    seed_parser.add_argument("--bins", type=str, help="Compute budgets in GFLOPs (default: distinct record computes)")
    seed_parser.add_argument("--min-run", type=int, default=2, help="Contiguous bins a conclusive seed must win (default: 2)")
    _add_output(seed_parser, "JSON seed selection")

    # Optimize-shape command
    opt_parser = subparsers.add_parser("optimize-shape", help="Scale the seed shape to a compute budget")
    opt_parser.add_argument("--target", type=str, required=True, help="Target compute in GFLOPs, e.g. 9T")
    _add_scaling_flags(opt_parser)
    _add_output(opt_parser, "JSON scaled model")

    # Frontier command
    frontier_parser = subparsers.add_parser("frontier", help="Emit the predicted efficiency frontier")
    frontier_parser.add_argument(
        "--grid", type=str, required=True, help="Ascending compute values in GFLOPs, all >= t0, e.g. 1e10,1e11,1e12"
    )
    frontier_parser.add_argument(
        "--format", type=str, choices=["csv", "json"], default="csv", help="Table format (default: csv)"
    )
    _add_scaling_flags(frontier_parser)
    _add_output(frontier_parser, "frontier table")

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main CLI entry point."""
    parser = create_parser()
    args = parser.parse_args(argv)

    if args.command is None:
        parser.print_help()
        return EXIT_INVALID

    try:
        config, args.config_source = _load_tool_config(args.config)
    except ConfigurationError as e:
        print(f"Configuration error: {e}", file=sys.stderr)
        for item in e.validation_errors:
            print(f"  {item}", file=sys.stderr)
        return EXIT_INVALID

    setup_logging(args.verbose, config.logging.level, config.logging.format)

    try:
        return COMMANDS[args.command](args, config)
    except NonConvergenceError as e:
        print(f"Non-convergence: {e}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    except (InputValidationError, InfeasibleDesignError, ConfigurationError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except ValidationError as e:
        print(f"Validation error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except (ShapeScalingError, ValueError, KeyError, OSError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
