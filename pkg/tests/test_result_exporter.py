"""
Unit tests for ResultExporter class.
"""

import json
import shutil
import tempfile
from pathlib import Path

import pandas as pd
import pytest

from tilt_coverage.exceptions import ResultExportError
from tilt_coverage.models import ExperimentSpec, NetworkConfig, ResultRow
from tilt_coverage.result_exporter import HEIGHT_BLIND_NOTE, UNITS_NOTE, ResultExporter


class TestResultExporter:
    """Test cases for ResultExporter."""

    def setup_method(self):
        """Set up test fixtures."""
        self.temp_dir = tempfile.mkdtemp()
        self.exporter = ResultExporter(output_directory=self.temp_dir)
        self.spec = ExperimentSpec(scenario_id="unit", network=NetworkConfig(),
                                   axis="sir_threshold_db", grid=[0.0, 5.0],
                                   modes=["3dbf_height_aware", "2dbf"])

        # Create sample rows for testing
        self.sample_rows = [
            ResultRow(scenario_id="unit", height_case="base", evaluator="analytic",
                      mode="3dbf_height_aware", axis="sir_threshold_db", axis_value=0.0,
                      beta_deg=12.345678901234567, p_cov=0.7123456789012345, err_estimate=3.1e-7),
            ResultRow(scenario_id="unit", height_case="base", evaluator="analytic",
                      mode="3dbf_height_aware", axis="sir_threshold_db", axis_value=5.0,
                      beta_deg=13.0, p_cov=0.51, err_estimate=2.9e-7),
            ResultRow(scenario_id="unit", height_case="base", evaluator="montecarlo",
                      mode="2dbf", axis="sir_threshold_db", axis_value=0.0,
                      beta_deg=None, p_cov=0.6, ci_halfwidth=0.002, seed=2 ** 63 + 5),
        ]

    def teardown_method(self):
        """Clean up test fixtures."""
        shutil.rmtree(self.temp_dir, ignore_errors=True)

    def test_default_path_uses_scenario_id(self):
        path = self.exporter.export_rows(self.sample_rows, self.spec)
        assert path == str(Path(self.temp_dir) / "unit.csv")
        assert Path(path).exists()

    def test_explicit_path_creates_directories(self):
        target = Path(self.temp_dir) / "nested" / "out.csv"
        self.exporter.export_rows(self.sample_rows, self.spec, str(target))
        assert target.exists()

    def test_header_block(self):
        """Test the provenance header written above the table."""
        path = self.exporter.export_rows(self.sample_rows, self.spec, generated_at="2024-05-01T12:00:00")
        lines = Path(path).read_text(encoding="utf-8").splitlines()

        assert lines[0] == "# generated_at: 2024-05-01T12:00:00"
        assert lines[1] == f"# {UNITS_NOTE}"
        assert lines[2] == f"# {HEIGHT_BLIND_NOTE}"
        assert lines[3] == "# spec:"
        column_line = next(line for line in lines if not line.startswith("#"))
        assert column_line.split(",") == ResultExporter.COLUMNS

    def test_floats_round_trip_exactly(self):
        path = self.exporter.export_rows(self.sample_rows, self.spec)
        frame = self.exporter.read_results(path)

        assert list(frame.columns) == ResultExporter.COLUMNS
        assert frame.loc[0, "p_cov"] == 0.7123456789012345
        assert frame.loc[0, "beta_deg"] == 12.345678901234567
        assert frame.loc[0, "err_estimate"] == 3.1e-7

    def test_blank_fields_for_non_applicable_values(self):
        path = self.exporter.export_rows(self.sample_rows, self.spec)
        data_lines = [line for line in Path(path).read_text().splitlines() if not line.startswith("#")]
        assert data_lines[3] == f"unit,base,montecarlo,2dbf,sir_threshold_db,0.0,,0.6,0.002,,{2 ** 63 + 5}"

        frame = self.exporter.read_results(path)
        assert pd.isna(frame.loc[2, "beta_deg"])
        assert pd.isna(frame.loc[0, "ci_halfwidth"])

    def test_identical_runs_differ_only_in_timestamp(self):
        """Test that output is byte-identical apart from the first line."""
        first = Path(self.exporter.export_rows(self.sample_rows, self.spec, str(Path(self.temp_dir) / "a.csv"),
                                               generated_at="2024-01-01T00:00:00")).read_text()
        second = Path(self.exporter.export_rows(self.sample_rows, self.spec, str(Path(self.temp_dir) / "b.csv"),
                                                generated_at="2025-01-01T00:00:00")).read_text()
        assert first != second
        assert first.splitlines()[1:] == second.splitlines()[1:]

    def test_spec_round_trips_through_header(self):
        path = self.exporter.export_rows(self.sample_rows, self.spec, generated_at="2024-05-01T12:00:00")
        metadata = self.exporter.read_metadata(path)
        assert metadata["generated_at"] == "2024-05-01T12:00:00"
        assert metadata["spec"] == self.spec.to_dict()

    def test_timing_column_only_when_requested(self):
        rows = [ResultRow(**{**self.sample_rows[1].to_dict(), "runtime_ms": 12.5})]
        plain = self.exporter.read_results(self.exporter.export_rows(rows, self.spec))
        assert "runtime_ms" not in plain.columns

        timed_exporter = ResultExporter(self.temp_dir, include_timing=True)
        timed = timed_exporter.read_results(timed_exporter.export_rows(rows, self.spec,
                                                                       str(Path(self.temp_dir) / "t.csv")))
        assert timed.loc[0, "runtime_ms"] == 12.5

    def test_json_format(self):
        path = self.exporter.export_rows(self.sample_rows, self.spec, fmt="json", generated_at="2024-05-01")
        assert path.endswith("unit.json")
        with open(path, encoding="utf-8") as f:
            document = json.load(f)
        assert document["metadata"]["generated_at"] == "2024-05-01"
        assert document["metadata"]["spec"]["scenario_id"] == "unit"
        assert len(document["rows"]) == 3
        assert document["rows"][2]["beta_deg"] is None
        assert "runtime_ms" not in document["rows"][0]

        frame = self.exporter.read_results(path)
        assert frame.loc[1, "p_cov"] == 0.51

    def test_unsupported_format(self):
        with pytest.raises(ResultExportError, match="Unsupported"):
            self.exporter.export_rows(self.sample_rows, self.spec, fmt="xlsx")

    def test_invalid_probability_rejected(self):
        bad = [ResultRow(scenario_id="unit", height_case="base", evaluator="analytic", mode="2dbf",
                         axis="sir_threshold_db", axis_value=0.0, beta_deg=None, p_cov=1.5)]
        with pytest.raises(ResultExportError, match="validation"):
            self.exporter.export_rows(bad, self.spec)

    def test_unwritable_target(self):
        """Test that an OS-level write failure becomes ResultExportError."""
        with pytest.raises(ResultExportError) as exc_info:
            self.exporter.export_rows(self.sample_rows, self.spec, output_path=self.temp_dir)
        assert exc_info.value.details["file_path"] == self.temp_dir

    def test_empty_table(self):
        path = self.exporter.export_rows([], self.spec)
        frame = self.exporter.read_results(path)
        assert frame.empty
        assert list(frame.columns) == ResultExporter.COLUMNS

    def test_read_missing_file(self):
        with pytest.raises(FileNotFoundError):
            self.exporter.read_results(str(Path(self.temp_dir) / "missing.csv"))

    def test_summarize_picks_best_row_per_group(self):
        path = self.exporter.export_rows(self.sample_rows, self.spec)
        summary = ResultExporter.summarize(self.exporter.read_results(path))

        assert len(summary) == 2
        aware = summary[summary["mode"] == "3dbf_height_aware"].iloc[0]
        assert aware["axis_value"] == 0.0
        assert aware["p_cov"] == 0.7123456789012345
