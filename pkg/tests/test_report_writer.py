"""Tests for CSV and plot-data artifacts."""

import pandas as pd
import pytest
from pathlib import Path
import sys

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from teg_sim import __version__
from teg_sim.config import load_config
from teg_sim.report_writer import ReportWriter


@pytest.fixture
def table():
    return pd.DataFrame({"n_couples": [100, 200], "P_matched_W": [1.0e-7, 2.5e-7]})


class TestReportWriter:
    def setup_method(self):
        self.config = load_config()

    def test_csv_header_carries_config(self, tmp_path, table):
        writer = ReportWriter(self.config, "gen optimize", tmp_path, "csv", timestamp=False)
        path = writer.write("gen-optimize", table, ("n_couples", "P_matched_W"))
        lines = path.read_text(encoding="utf-8").splitlines()
        assert path.name == "gen-optimize.csv"
        assert lines[0] == f"# teg-sim {__version__} gen optimize"
        assert lines[1] == f"# config-sha256: {self.config.digest()}"
        assert lines[2].startswith("# config: {")
        assert lines[3] == "n_couples,P_matched_W"
        assert lines[4] == "100,1e-07"

    def test_timestamp_line_optional(self, tmp_path, table):
        stamped = ReportWriter(self.config, "x", tmp_path, "csv", timestamp=True).header_lines()
        plain = ReportWriter(self.config, "x", tmp_path, "csv", timestamp=False).header_lines()
        assert stamped[-1].startswith("# generated: ")
        assert len(stamped) == len(plain) + 1

    def test_plot_format_is_two_bare_columns(self, tmp_path, table):
        writer = ReportWriter(self.config, "gen optimize", tmp_path, "plot", timestamp=False)
        path = writer.write("gen-optimize", table, ("n_couples", "P_matched_W"))
        assert path.name == "gen-optimize.dat"
        assert path.read_text(encoding="utf-8") == "100 1e-07\n200 2.5e-07\n"

    def test_output_directory_created(self, tmp_path, table):
        target = tmp_path / "nested" / "runs"
        ReportWriter(self.config, "x", target, "csv", timestamp=False).write("x", table, ("n_couples", "P_matched_W"))
        assert (target / "x.csv").exists()

    def test_same_inputs_same_bytes(self, tmp_path, table):
        writer = ReportWriter(self.config, "x", tmp_path, "csv", timestamp=False)
        first = writer.write("x", table, ("n_couples", "P_matched_W")).read_bytes()
        second = writer.write("x", table, ("n_couples", "P_matched_W")).read_bytes()
        assert first == second
