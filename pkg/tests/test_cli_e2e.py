"""End-to-end tests of the teg-sim command line.

Each test runs a subcommand through click's test runner against the shipped reference
design and checks the printed summary, the artifacts and the exit code.
"""

import pytest
from pathlib import Path
import sys

from click.testing import CliRunner

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from teg_sim.cli import cli


@pytest.fixture
def runner():
    return CliRunner()


def invoke(runner, out, *args):
    return runner.invoke(cli, ["--out", str(out), "--no-timestamp", *args])


class TestCommands:
    def test_materials_zt(self, runner, tmp_path):
        result = invoke(runner, tmp_path, "materials", "zt")
        assert result.exit_code == 0, result.output
        assert "discrepancy" in result.output
        assert (tmp_path / "materials-zt.csv").exists()

    def test_leg_resistance(self, runner, tmp_path):
        result = invoke(runner, tmp_path, "leg", "resistance")
        assert result.exit_code == 0, result.output
        assert "1.4816e+05 K/W" in result.output

    def test_leg_sweep_width(self, runner, tmp_path):
        result = invoke(runner, tmp_path, "leg", "sweep-width")
        assert result.exit_code == 0, result.output
        assert "R strictly decreases with width" in result.output
        assert (tmp_path / "leg-sweep-width.csv").exists()

    def test_leg_sweep_height_reports_fit(self, runner, tmp_path):
        result = invoke(runner, tmp_path, "leg", "sweep-height")
        assert result.exit_code == 0, result.output
        assert "R^2" in result.output

    def test_leg_sweep_mask(self, runner, tmp_path):
        result = invoke(runner, tmp_path, "leg", "sweep-mask")
        assert result.exit_code == 0, result.output
        assert "10-3" in result.output

    def test_network_solve(self, runner, tmp_path):
        result = invoke(runner, tmp_path, "network", "solve")
        assert result.exit_code == 0, result.output
        assert "dT_junctions" in result.output
        assert (tmp_path / "network-solve.csv").exists()

    def test_gen_simulate_headline(self, runner, tmp_path):
        result = invoke(runner, tmp_path, "gen", "simulate")
        assert result.exit_code == 0, result.output
        assert "open-circuit voltage above 1 V" in result.output
        text = (tmp_path / "gen-simulate.csv").read_text(encoding="utf-8")
        assert text.startswith("# teg-sim ")
        assert "# config-sha256: " in text
        assert "10-3-A" in text

    def test_gen_simulate_type_b(self, runner, tmp_path):
        result = invoke(runner, tmp_path, "gen", "simulate", "--type", "B")
        assert result.exit_code == 0, result.output
        assert "4700 couples" in result.output

    def test_gen_sweep_plot_format(self, runner, tmp_path):
        result = invoke(runner, tmp_path, "--format", "plot", "gen", "sweep")
        assert result.exit_code == 0, result.output
        lines = (tmp_path / "gen-sweep.dat").read_text(encoding="utf-8").splitlines()
        assert len(lines) == 20
        assert lines[0].startswith("3-1-A ")

    def test_gen_optimize(self, runner, tmp_path):
        result = invoke(runner, tmp_path, "gen", "optimize")
        assert result.exit_code == 0, result.output
        assert "n* = 610" in result.output

    def test_gen_arrangements(self, runner, tmp_path):
        result = invoke(runner, tmp_path, "gen", "arrangements")
        assert result.exit_code == 0, result.output
        for name in ("sandwich", "chip", "rim"):
            assert name in result.output

    def test_scenario_chuck(self, runner, tmp_path):
        result = invoke(runner, tmp_path, "scenario", "chuck", "--natural")
        assert result.exit_code == 0, result.output
        assert "ratio 2.40" in result.output
        assert "ratios" in result.output
        assert (tmp_path / "scenario-chuck.csv").exists()
        assert (tmp_path / "scenario-chuck-curve.csv").exists()

    def test_scenario_chuck_matrix(self, runner, tmp_path):
        result = invoke(runner, tmp_path, "scenario", "chuck", "--matrix")
        assert result.exit_code == 0, result.output
        lines = (tmp_path / "scenario-chuck.csv").read_text(encoding="utf-8").splitlines()
        assert len([line for line in lines if not line.startswith("#")]) == 9

    def test_scenario_chuck_at_ambient(self, runner, tmp_path):
        """Chuck at ambient gives zero density; the rim ratio is reported undefined."""
        result = invoke(runner, tmp_path, "--set", "scenario.chuck_temperature=22.0", "scenario", "chuck")
        assert result.exit_code == 0, result.output
        assert "ratio undefined" in result.output
        assert (tmp_path / "scenario-chuck.csv").exists()

    def test_scenario_chuck_matrix_at_ambient(self, runner, tmp_path):
        result = invoke(runner, tmp_path, "--set", "scenario.chuck_temperature=22.0", "scenario", "chuck", "--matrix")
        assert result.exit_code == 0, result.output

    def test_config_show(self, runner, tmp_path):
        result = runner.invoke(cli, ["--set", "geometry.middle_width_b=2.0", "config", "show"])
        assert result.exit_code == 0, result.output
        assert "middle_width_b: 2.0" in result.output

    def test_config_from_environment_variable(self, runner, tmp_path):
        path = tmp_path / "narrow.yaml"
        path.write_text("geometry:\n  middle_width_b: 1.0\n", encoding="utf-8")
        result = runner.invoke(cli, ["config", "show"], env={"TEG_SIM_CONFIG": str(path)})
        assert result.exit_code == 0, result.output
        assert "middle_width_b: 1.0" in result.output


class TestDeterminism:
    @pytest.mark.parametrize(
        "args, artifact",
        [
            (("materials", "zt"), "materials-zt.csv"),
            (("gen", "sweep"), "gen-sweep.csv"),
            (("scenario", "chuck"), "scenario-chuck-curve.csv"),
        ],
    )
    def test_repeated_runs_identical(self, runner, tmp_path, args, artifact):
        assert invoke(runner, tmp_path, *args).exit_code == 0
        first = (tmp_path / artifact).read_bytes()
        assert invoke(runner, tmp_path, *args).exit_code == 0
        assert (tmp_path / artifact).read_bytes() == first


class TestExitCodes:
    def test_unknown_subcommand(self, runner):
        result = runner.invoke(cli, ["frobnicate"])
        assert result.exit_code == 2
        assert "Usage" in result.output

    def test_missing_config_file(self, runner, tmp_path):
        result = runner.invoke(cli, ["--config", str(tmp_path / "absent.yaml"), "config", "show"])
        assert result.exit_code == 2
        assert "not found" in result.output

    def test_malformed_override(self, runner):
        result = runner.invoke(cli, ["--set", "geometry", "config", "show"])
        assert result.exit_code == 2

    def test_validation_failure(self, runner, tmp_path):
        result = invoke(runner, tmp_path, "--set", "geometry.middle_width_b=12.0", "gen", "simulate")
        assert result.exit_code == 4
        assert "Validation failed" in result.output
        assert "end_width_a >= middle_width_b" in result.output

    def test_solver_non_convergence(self, runner, tmp_path):
        result = invoke(
            runner,
            tmp_path,
            "--resolution", "1",
            "--set", "solver.iteration_factor=1",
            "--set", "solver.tolerance=1.0e-15",
            "leg", "resistance", "--backend", "numeric",
        )
        assert result.exit_code == 3
        assert "did not converge" in result.output

    def test_resource_limit(self, runner, tmp_path):
        result = invoke(runner, tmp_path, "--resolution", "50", "leg", "resistance", "--backend", "numeric")
        assert result.exit_code == 5
        assert "--resolution" in result.output
