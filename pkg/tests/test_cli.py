"""
Test suite for CLI functionality.
"""

import csv
import json

import pytest

from shape_scaling import cli, presets
from shape_scaling.cli import EXIT_INCONCLUSIVE, EXIT_INVALID, EXIT_OK, create_parser, main
from shape_scaling.config import CostSettings
from shape_scaling.cost_model import training_compute
from shape_scaling.exceptions import NonConvergenceError
from shape_scaling.models import Shape

ISOFLOP_BUDGETS = "8e9,9e9,1e10,1.1e10,1.25e10"


@pytest.fixture(autouse=True)
def isolated_cwd(tmp_path, monkeypatch):
    """Run every command where no configuration file is auto-detected."""
    monkeypatch.chdir(tmp_path)
    return tmp_path


def read_json(path):
    with open(path, encoding="utf-8") as f:
        return json.load(f)


def star_manifest(tmp_path):
    path = tmp_path / "star.json"
    assert main(["plan-star", "--published", "-o", str(path)]) == EXIT_OK
    return path


def simulated_star(tmp_path, *extra):
    records = tmp_path / "star.csv"
    code = main(
        ["simulate", "--design", str(star_manifest(tmp_path)), "--seed", "0", "--include-center",
         "-o", str(records), *extra]
    )
    assert code == EXIT_OK
    return records


def simulated_isoflop(tmp_path):
    design = tmp_path / "grid.json"
    records = tmp_path / "grid.csv"
    assert main(["plan-grid", "--budgets", ISOFLOP_BUDGETS, "-o", str(design)]) == EXIT_OK
    assert main(["simulate", "--design", str(design), "--seed", "0", "-o", str(records)]) == EXIT_OK
    return records


def examples_only_records(tmp_path):
    """Width-arm records carrying examples_seen but no compute_gflops."""
    path = tmp_path / "arm.csv"
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["width", "depth", "mlp_dim", "dimension_under_test", "examples_seen", "metric_name", "metric_value"])
        for width in (608, 768, 928, 1088):
            for examples in (64_000_000, 128_000_000, 256_000_000):
                loss = 0.3 + 60.0 / width + 3e7 / examples
                writer.writerow([width, 40, 6144, "width", examples, "loss", loss])
    return path


class TestParser:
    """Test argument parsing."""

    def test_create_parser(self):
        """Test argument parser creation."""
        parser = create_parser()
        with pytest.raises(SystemExit):
            parser.parse_args(["--help"])

    def test_version(self, capsys):
        """Test the version flag."""
        with pytest.raises(SystemExit):
            create_parser().parse_args(["--version"])
        assert "shape-scaling" in capsys.readouterr().out

    def test_parser_cost_command(self):
        """Test cost command parsing."""
        args = create_parser().parse_args(["cost", "--width", "608", "--depth", "10", "--mlp", "928"])
        assert args.command == "cost"
        assert (args.width, args.depth, args.mlp) == (608, 10, 928)
        assert args.output == "-"
        assert args.no_pooling_head is False

    def test_parser_optimize_defaults(self):
        """Test optimize-shape defaults."""
        args = create_parser().parse_args(["optimize-shape", "--target", "9T", "--t0-examples", "600M"])
        assert args.x0 == "608,10,928"
        assert args.t0 is None
        assert args.preset is None

    def test_seed_compute_required(self):
        """Test that one of --t0 and --t0-examples is required."""
        with pytest.raises(SystemExit):
            create_parser().parse_args(["optimize-shape", "--target", "9T"])

    def test_seed_compute_exclusive(self):
        """Test that --t0 and --t0-examples are mutually exclusive."""
        with pytest.raises(SystemExit):
            create_parser().parse_args(
                ["frontier", "--grid", "1e10", "--t0", "1e10", "--t0-examples", "600M"]
            )

    def test_fit_requires_seed(self):
        """Test that the fit command needs an explicit seed."""
        with pytest.raises(SystemExit):
            create_parser().parse_args(["fit", "--records", "runs.csv"])

    def test_exponents_requires_seed(self):
        """Test that the exponents command needs an explicit seed."""
        with pytest.raises(SystemExit):
            create_parser().parse_args(["exponents", "--records", "runs.csv"])

    def test_fit_star_requires_seed_and_anchor_compute(self):
        """Test that fit-star needs an explicit seed and anchor compute."""
        parser = create_parser()
        with pytest.raises(SystemExit):
            parser.parse_args(["fit-star", "--records", "runs.csv", "--anchor-compute", "1e10"])
        with pytest.raises(SystemExit):
            parser.parse_args(["fit-star", "--records", "runs.csv", "--seed", "0"])
        args = parser.parse_args(["fit-star", "--records", "runs.csv", "--seed", "0", "--anchor-compute", "1e10"])
        assert args.anchor == "608,10,928"


class TestMain:
    """Test top-level dispatch and exit codes."""

    def test_no_command(self, capsys):
        """Test that running without a command prints help and fails."""
        assert main([]) == EXIT_INVALID
        assert "usage" in capsys.readouterr().out

    def test_missing_config(self, capsys):
        """Test that an explicit missing config file is reported."""
        assert main(["-c", "nowhere.toml", "cost", "--preset", "vit-b/14"]) == EXIT_INVALID
        assert "Configuration error" in capsys.readouterr().err

    def test_config_applies(self, isolated_cwd):
        """Test that an auto-detected config changes cost settings."""
        (isolated_cwd / "shape_scaling.toml").write_text("[cost]\nimage_resolution = 448\n")
        out = isolated_cwd / "cost.json"
        assert main(["cost", "--width", "608", "--depth", "10", "--mlp", "928", "-o", str(out)]) == EXIT_OK
        assert read_json(out)["image_resolution"] == 448

    def test_non_convergence_exit_code(self, isolated_cwd, monkeypatch, capsys):
        """Test that a diverged fit exits with the inconclusive code."""
        records = simulated_star(isolated_cwd)

        def diverged(*args, **kwargs):
            raise NonConvergenceError("all restarts diverged", best_params={}, objective_value=1e12)

        monkeypatch.setattr(cli, "fit_dimension", diverged)
        code = main(["fit", "--records", str(records), "--dimension", "width", "--seed", "0"])
        assert code == EXIT_INCONCLUSIVE
        assert "Non-convergence" in capsys.readouterr().err


class TestCostCommand:
    """Test the cost command."""

    def test_published_architecture(self, isolated_cwd):
        """Test counts and training compute for a published architecture."""
        out = isolated_cwd / "cost.json"
        assert main(["cost", "--preset", "sovit-400m/14", "--examples", "40B", "-o", str(out)]) == EXIT_OK
        report = read_json(out)
        assert report["shape"] == {"width": 1152, "depth": 27, "mlp_dim": 4304}
        assert report["patch_size"] == 14
        assert report["num_tokens"] == 256
        assert report["param_count"] == 427_674_944
        assert report["examples_seen"] == 40_000_000_000
        assert report["training_compute_gflops"] == pytest.approx(9e12, rel=0.05)
        assert sum(report["components"].values()) == report["param_count"]

    def test_stdout(self, capsys):
        """Test that the report goes to stdout by default."""
        assert main(["cost", "--width", "608", "--depth", "10", "--mlp", "928"]) == EXIT_OK
        assert json.loads(capsys.readouterr().out)["param_count"] == 29_259_872

    def test_missing_dimensions(self, capsys):
        """Test that a shape or preset is required."""
        assert main(["cost", "--width", "608"]) == EXIT_INVALID
        assert "--depth" in capsys.readouterr().err

    def test_width_not_divisible_by_heads(self):
        """Test that invalid architectures exit with the invalid code."""
        assert main(["cost", "--width", "600", "--depth", "10", "--mlp", "928"]) == EXIT_INVALID


class TestPlanCommands:
    """Test the sweep planning commands."""

    def test_exact_star(self, isolated_cwd):
        """Test that the published star grids are emitted verbatim."""
        manifest = read_json(star_manifest(isolated_cwd))
        assert manifest["total_runs"] == 18
        assert manifest["design"]["grids"] == {k: list(v) for k, v in presets.STAR_GRIDS.items()}

    def test_star_published_settings(self, isolated_cwd):
        """Test the grids regenerated from the published step and ceiling."""
        out = isolated_cwd / "star.json"
        assert main(["plan-star", "--published-settings", "-o", str(out)]) == EXIT_OK
        grids = read_json(out)["design"]["grids"]
        assert grids["depth"] == [8, 10, 12, 15, 19, 24]

    def test_star_custom(self, isolated_cwd):
        """Test a custom centre and checkpoints."""
        out = isolated_cwd / "star.json"
        code = main(
            ["plan-star", "--center", "1024,24,4096", "--step", "1.25", "--points", "4",
             "--ceiling", "0.8", "--checkpoints", "1M,2M", "-o", str(out)]
        )
        assert code == EXIT_OK
        design = read_json(out)["design"]
        assert design["checkpoints"] == [1_000_000, 2_000_000]
        assert all(len(grid) == 4 for grid in design["grids"].values())

    def test_grid_budgets(self, isolated_cwd):
        """Test an IsoFlop grid counts one run per shape and budget."""
        out = isolated_cwd / "grid.json"
        assert main(["plan-grid", "--budgets", ISOFLOP_BUDGETS, "-o", str(out)]) == EXIT_OK
        assert read_json(out)["total_runs"] == 64 * 5

    def test_grid_too_small(self):
        """Test that a range without interior values is rejected."""
        assert main(["plan-grid", "--width", "416,512"]) == EXIT_INVALID


class TestSimulateCommand:
    """Test the simulate command."""

    def test_byte_identical(self, isolated_cwd):
        """Test that equal seeds give byte-identical record files."""
        design = star_manifest(isolated_cwd)
        outputs = []
        for name in ("first.csv", "second.csv"):
            path = isolated_cwd / name
            code = main(["simulate", "--design", str(design), "--seed", "7", "--sigma", "0.01", "-o", str(path)])
            assert code == EXIT_OK
            outputs.append(path.read_bytes())
        assert outputs[0] == outputs[1]

    def test_seed_changes_output(self, isolated_cwd):
        """Test that different seeds give different noisy records."""
        design = star_manifest(isolated_cwd)
        texts = []
        for seed in ("1", "2"):
            path = isolated_cwd / f"runs{seed}.csv"
            main(["simulate", "--design", str(design), "--seed", seed, "--sigma", "0.01", "-o", str(path)])
            texts.append(path.read_text())
        assert texts[0] != texts[1]

    def test_center_records(self, isolated_cwd):
        """Test that centre holdout records are appended."""
        with open(simulated_star(isolated_cwd), newline="") as f:
            rows = list(csv.DictReader(f))
        assert len(rows) == 57
        assert sum(row["tag"] == "center" for row in rows) == 3

    def test_jsonl_output(self, isolated_cwd):
        """Test JSON lines output chosen by suffix."""
        path = isolated_cwd / "runs.jsonl"
        assert main(["simulate", "--design", str(star_manifest(isolated_cwd)), "--seed", "0", "-o", str(path)]) == EXIT_OK
        assert len(path.read_text().splitlines()) == 54

    def test_center_needs_star(self, isolated_cwd):
        """Test that centre records need a star design."""
        design = isolated_cwd / "grid.json"
        main(["plan-grid", "-o", str(design)])
        assert main(["simulate", "--design", str(design), "--seed", "0", "--include-center"]) == EXIT_INVALID


class TestFitCommands:
    """Test the fit and exponents commands."""

    def test_fit_with_center_holdout(self, isolated_cwd):
        """Test fitting one dimension and checking it against the centre runs."""
        out = isolated_cwd / "fit.json"
        code = main(
            ["fit", "--records", str(simulated_star(isolated_cwd)), "--dimension", "width",
             "--seed", "0", "--restarts", "8", "-o", str(out)]
        )
        report = read_json(out)
        assert code == (EXIT_OK if report["converged"] else EXIT_INCONCLUSIVE)
        assert report["dimension"] == "width"
        assert report["n_records"] == 18
        assert report["s"] == pytest.approx(0.22, rel=0.02)
        assert report["holdout_relative_error"] < 0.05

    def test_fit_star(self, isolated_cwd):
        """Test the joint star fit against the centre runs."""
        out = isolated_cwd / "star-fit.json"
        code = main(
            ["fit-star", "--records", str(simulated_star(isolated_cwd)), "--seed", "0", "--restarts", "8",
             "--anchor-compute", "1e10", "-o", str(out)]
        )
        report = read_json(out)
        assert code == (EXIT_OK if report["converged"] else EXIT_INCONCLUSIVE)
        assert report["n_records"] == 54
        assert report["anchor"] == {"width": 608, "depth": 10, "mlp_dim": 928}
        assert report["s"] == pytest.approx({"width": 0.22, "depth": 0.45, "mlp_dim": 0.6}, rel=0.02)
        assert report["holdout_relative_error"] < 1e-3

    def test_auto_detected_config_derives_compute(self, isolated_cwd):
        """Test that an auto-detected config supplies the cost context when records have no sidecar."""
        (isolated_cwd / "shape_scaling.toml").write_text("[cost]\nimage_resolution = 448\n")
        records = examples_only_records(isolated_cwd)
        out = isolated_cwd / "fit.json"
        main(["fit", "--records", str(records), "--seed", "0", "--restarts", "2", "-o", str(out)])
        expected = training_compute(
            CostSettings(image_resolution=448).config_for(Shape(width=608, depth=40, mlp_dim=6144)), 64_000_000
        )
        assert read_json(out)["t_range"][0] == pytest.approx(expected, rel=1e-12)

    def test_sidecar_beats_auto_detected_config(self, isolated_cwd):
        """Test that a cost sidecar takes precedence over an auto-detected config."""
        (isolated_cwd / "shape_scaling.toml").write_text("[cost]\nimage_resolution = 448\n")
        records = examples_only_records(isolated_cwd)
        (isolated_cwd / "arm.cost.json").write_text(CostSettings().model_dump_json())
        out = isolated_cwd / "fit.json"
        main(["fit", "--records", str(records), "--seed", "0", "--restarts", "2", "-o", str(out)])
        expected = training_compute(CostSettings().config_for(Shape(width=608, depth=40, mlp_dim=6144)), 64_000_000)
        assert read_json(out)["t_range"][0] == pytest.approx(expected, rel=1e-12)

    def test_no_cost_context(self, isolated_cwd, capsys):
        """Test that records without compute need some cost context."""
        assert main(["fit", "--records", str(examples_only_records(isolated_cwd)), "--seed", "0"]) == EXIT_INVALID
        assert "cost context" in capsys.readouterr().err

    def test_fit_needs_dimension(self, isolated_cwd):
        """Test that records over several dimensions need --dimension."""
        code = main(["fit", "--records", str(simulated_star(isolated_cwd)), "--seed", "0"])
        assert code == EXIT_INVALID

    def test_exponents(self, isolated_cwd):
        """Test one stability report per swept dimension."""
        out = isolated_cwd / "exponents.json"
        code = main(
            ["exponents", "--records", str(simulated_star(isolated_cwd)), "--seed", "0", "--restarts", "8",
             "-o", str(out)]
        )
        assert code == EXIT_OK
        reports = read_json(out)
        assert [r["dimension"] for r in reports] == ["width", "depth", "mlp_dim"]
        assert all(r["spread"] == 0.0 for r in reports)


class TestSelectSeedCommand:
    """Test the select-seed command."""

    def test_isoflop_selection(self, isolated_cwd):
        """Test that the oracle seed is recovered from an IsoFlop grid."""
        out = isolated_cwd / "seed.json"
        assert main(["select-seed", "--records", str(simulated_isoflop(isolated_cwd)), "-o", str(out)]) == EXIT_OK
        selection = read_json(out)
        assert selection["x0"] == {"width": 608, "depth": 10, "mlp_dim": 928}
        assert selection["bins_won"] == 3
        assert selection["conclusive"] is True

    def test_non_conclusive(self, isolated_cwd):
        """Test that too short a winning run exits with the inconclusive code."""
        records = simulated_isoflop(isolated_cwd)
        assert main(["select-seed", "--records", str(records), "--min-run", "4"]) == EXIT_INCONCLUSIVE


class TestScalingCommands:
    """Test the optimize-shape and frontier commands."""

    def test_optimize_shape(self, isolated_cwd):
        """Test scaling the seed shape to the SoViT-400m budget."""
        out = isolated_cwd / "model.json"
        code = main(["optimize-shape", "--target", "9T", "--t0-examples", "600M", "-o", str(out)])
        assert code == EXIT_OK
        payload = read_json(out)
        assert payload["rounded_shape"] == {"width": 1008, "depth": 28, "mlp_dim": 3616}
        assert payload["achieved_compute"] <= 9e12
        assert payload["plan"]["w"] == pytest.approx({"width": 1 / 3, "depth": 1 / 3, "mlp_dim": 1 / 3})
        assert "scaling_rule" in payload

    def test_target_below_seed(self):
        """Test that downscaling is rejected."""
        assert main(["optimize-shape", "--target", "1e9", "--t0-examples", "600M"]) == EXIT_INVALID

    def test_bad_weights(self):
        """Test that weights not summing to one are rejected."""
        code = main(
            ["optimize-shape", "--target", "9T", "--t0", "1e10", "--weights", "width=0.5,depth=0.5,mlp_dim=0.5"]
        )
        assert code == EXIT_INVALID

    def test_frontier_csv(self, isolated_cwd):
        """Test one CSV row per compute value."""
        out = isolated_cwd / "frontier.csv"
        code = main(["frontier", "--grid", "1e10,1e11,1e12", "--t0-examples", "600M", "-o", str(out)])
        assert code == EXIT_OK
        with open(out, newline="") as f:
            rows = list(csv.DictReader(f))
        assert [float(row["compute_gflops"]) for row in rows] == [1e10, 1e11, 1e12]
        params = [int(row["params"]) for row in rows]
        assert params == sorted(params)

    def test_frontier_json(self, isolated_cwd):
        """Test the JSON table with its metadata."""
        out = isolated_cwd / "frontier.json"
        code = main(["frontier", "--grid", "1e10,1e11", "--t0", "9.946e9", "--format", "json", "-o", str(out)])
        assert code == EXIT_OK
        table = read_json(out)
        assert table["metadata"]["x0"] == "608,10,928"
        assert len(table["rows"]) == 2

    def test_frontier_below_seed_compute(self, capsys):
        """Test that a grid starting below the seed compute is rejected."""
        code = main(["frontier", "--grid", "1e9,1e10,1e11", "--t0-examples", "600M"])
        assert code == EXIT_INVALID
        assert "below t0" in capsys.readouterr().err
