"""
Persistence of experiment result tables.

CSV files open with a block of '#' lines: the generation timestamp (the only
content that changes between identical runs), units, the height-blind note
and the full experiment spec as YAML. Floats are written with repr so that
values survive a round trip bit for bit.
"""

import csv
import json
import logging
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional

import pandas as pd
import yaml

from .exceptions import ResultExportError
from .models import ExperimentSpec, ResultRow

logger = logging.getLogger(__name__)

UNITS_NOTE = ("units: tilt, axis tilt and beta_deg in degrees; sir_threshold_db in dB; "
              "bs_density in BS per m^2; heights and radii in m")
HEIGHT_BLIND_NOTE = ("3dbf_height_blind: tilt optimised as if every user were at ground height "
                     "(a = 0, h0 = 30.5 m), coverage then evaluated under the configured height model")

SUMMARY_KEYS = ["scenario_id", "height_case", "evaluator", "mode"]


class ResultExporter:
    """Writes result rows as CSV or JSON, and reads them back."""

    COLUMNS = [
        "scenario_id",
        "height_case",
        "evaluator",
        "mode",
        "axis",
        "axis_value",
        "beta_deg",
        "p_cov",
        "ci_halfwidth",
        "err_estimate",
        "seed",
    ]
    TIMING_COLUMN = "runtime_ms"
    FORMATS = ("csv", "json")

    def __init__(self, output_directory: str = "./results", include_timing: bool = False):
        """Initialize the exporter with output directory."""
        self.output_directory = Path(output_directory)
        self.include_timing = include_timing
        self.encoding = "utf-8"

    @property
    def columns(self) -> List[str]:
        return self.COLUMNS + ([self.TIMING_COLUMN] if self.include_timing else [])

    def resolve_path(self, spec: ExperimentSpec, output_path: Optional[str] = None,
                     fmt: str = "csv") -> Path:
        """Explicit path, else the spec's output path, else <output_directory>/<scenario>.<fmt>."""
        if output_path:
            return Path(output_path)
        if spec.output_path:
            return Path(spec.output_path)
        return self.output_directory / f"{spec.scenario_id}.{fmt}"

    def export_rows(self, rows: List[ResultRow], spec: ExperimentSpec, output_path: Optional[str] = None,
                    fmt: str = "csv", generated_at: Optional[str] = None) -> str:
        """Write the table and return its path."""
        if fmt not in self.FORMATS:
            raise ResultExportError(f"Unsupported output format '{fmt}'", details={"format": fmt})
        if not self.validate_rows(rows):
            raise ResultExportError("Result rows failed validation")

        file_path = self.resolve_path(spec, output_path, fmt)
        generated_at = generated_at or datetime.now().isoformat(timespec="seconds")
        try:
            file_path.parent.mkdir(parents=True, exist_ok=True)
            if fmt == "csv":
                self._write_csv(file_path, rows, spec, generated_at)
            else:
                self._write_json(file_path, rows, spec, generated_at)
        except OSError as e:
            logger.error(f"Failed to export results to {file_path}: {e}")
            raise ResultExportError(f"Result export failed: {e}", file_path=str(file_path))

        logger.info(f"Successfully exported {len(rows)} rows to {file_path}")
        return str(file_path)

    def validate_rows(self, rows: List[ResultRow]) -> bool:
        """Check every row is a ResultRow with a probability in [0, 1]."""
        for i, row in enumerate(rows):
            if not isinstance(row, ResultRow):
                logger.error(f"Row {i} is not a ResultRow")
                return False
            if not 0.0 <= row.p_cov <= 1.0:
                logger.error(f"Row {i}: p_cov {row.p_cov} outside [0, 1]")
                return False
        return True

    def header_lines(self, spec: ExperimentSpec, generated_at: str) -> List[str]:
        spec_yaml = yaml.safe_dump(spec.to_dict(), sort_keys=True, default_flow_style=False)
        lines = [f"# generated_at: {generated_at}", f"# {UNITS_NOTE}", f"# {HEIGHT_BLIND_NOTE}", "# spec:"]
        lines.extend(f"#   {line}" for line in spec_yaml.splitlines())
        return lines

    def _write_csv(self, file_path: Path, rows: List[ResultRow], spec: ExperimentSpec,
                   generated_at: str) -> None:
        with open(file_path, "w", newline="", encoding=self.encoding) as csvfile:
            for line in self.header_lines(spec, generated_at):
                csvfile.write(line + "\n")
            writer = csv.DictWriter(csvfile, fieldnames=self.columns, extrasaction="ignore",
                                    lineterminator="\n")
            writer.writeheader()
            for row in rows:
                writer.writerow({k: self._format_value(v) for k, v in row.to_dict().items()})

    def _write_json(self, file_path: Path, rows: List[ResultRow], spec: ExperimentSpec,
                    generated_at: str) -> None:
        columns = self.columns
        document = {
            "metadata": {
                "generated_at": generated_at,
                "units": UNITS_NOTE,
                "note": HEIGHT_BLIND_NOTE,
                "spec": spec.to_dict(),
            },
            "rows": [{k: v for k, v in row.to_dict().items() if k in columns} for row in rows],
        }
        with open(file_path, "w", encoding=self.encoding) as f:
            json.dump(document, f, indent=2)
            f.write("\n")

    @staticmethod
    def _format_value(value: Any) -> str:
        if value is None:
            return ""
        if isinstance(value, float):
            return repr(value)
        return str(value)

    def read_results(self, file_path: str) -> pd.DataFrame:
        """Load a result file written by export_rows into a DataFrame."""
        file_path = Path(file_path)
        if not file_path.exists():
            raise FileNotFoundError(f"Result file not found: {file_path}")
        if file_path.suffix.lower() == ".json":
            with open(file_path, "r", encoding=self.encoding) as f:
                document = json.load(f)
            frame = pd.DataFrame(document["rows"])
        else:
            frame = pd.read_csv(file_path, comment="#", encoding=self.encoding)
        logger.info(f"Successfully read {len(frame)} rows from {file_path}")
        return frame

    def read_metadata(self, file_path: str) -> Dict[str, Any]:
        """Header of a result file as a dict; a CSV spec block is parsed back from YAML."""
        if Path(file_path).suffix.lower() == ".json":
            with open(file_path, "r", encoding=self.encoding) as f:
                return json.load(f)["metadata"]

        metadata: Dict[str, Any] = {}
        spec_lines: List[str] = []
        with open(file_path, "r", encoding=self.encoding) as f:
            for line in f:
                if not line.startswith("#"):
                    break
                text = line[1:].rstrip("\n")
                if text.startswith("   "):
                    spec_lines.append(text[3:])
                elif text.startswith(" generated_at: "):
                    metadata["generated_at"] = text[len(" generated_at: "):]
        metadata["spec"] = yaml.safe_load("\n".join(spec_lines)) if spec_lines else {}
        return metadata

    @staticmethod
    def summarize(frame: pd.DataFrame) -> pd.DataFrame:
        """Best-coverage row of each (scenario, height case, evaluator, mode) group."""
        if frame.empty:
            return frame
        best = frame.loc[frame.groupby(SUMMARY_KEYS, sort=False)["p_cov"].idxmax()]
        return best[SUMMARY_KEYS + ["axis", "axis_value", "beta_deg", "p_cov"]].reset_index(drop=True)
