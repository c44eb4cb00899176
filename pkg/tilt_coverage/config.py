"""
Configuration management for the tilt coverage toolkit.

Run settings come from the environment (a .env file is honoured).
Experiments come from YAML files whose sections mirror the data models;
unknown keys and ill-typed values are rejected with the dotted field name,
syntax errors with the line number.
"""

import logging
import os
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import yaml
from dotenv import load_dotenv

from .exceptions import ConfigurationError, FileOperationError
from .models import (
    AntennaPattern,
    ExperimentSpec,
    HeightCase,
    HeightModel,
    McCampaign,
    NetworkConfig,
    PathLossModel,
    QuadratureSpec,
    RunSettings,
    TiltSearchSpec,
)

logger = logging.getLogger(__name__)

EVALUATOR_ALIASES = {"analytic": "analytic", "mc": "montecarlo", "montecarlo": "montecarlo"}

# value kinds: float, int, bool, str, float? (nullable float), list (handled by the caller)
PATTERN_FIELDS = {"tilt_deg": "float", "theta3db_deg": "float", "sll_el_db": "float", "enabled": "bool"}
PATH_LOSS_FIELDS = {"exponent_v": "float", "scale_c": "float"}
HEIGHT_FIELDS = {"a": "float", "b": "float", "c": "float", "h_min": "float", "h_max": "float",
                 "h_atom": "float"}
NETWORK_FIELDS = {"lambda_bs": "float", "h_bs": "float", "h0": "float", "exclusion_radius": "float?",
                  "sir_threshold_db": "float", "approx_order": "int"}
NETWORK_SECTIONS = {"pattern", "path_loss", "height_model"}
CAMPAIGN_FIELDS = {"trials": "int", "seed": "int", "window_radius": "float?", "record_sir": "bool",
                   "block_size": "int", "tail_correction": "bool"}
QUADRATURE_FIELDS = {"rel_tol": "float", "abs_tol": "float", "outer_trunc_mass": "float",
                     "radial_trunc_factor": "float", "panel_order": "int", "height_nodes": "int",
                     "max_panels": "int", "min_radial_segments": "int", "max_radial_segments": "int"}
TILT_SEARCH_FIELDS = {"grid_step_deg": "float", "refine": "bool", "refine_tol_deg": "float",
                      "evaluator": "str"}
HEIGHT_CASE_FIELDS = {"label": "str", "a": "float", "h0": "float"}
SWEEP_FIELDS = {"axis", "grid"}
OUTPUT_FIELDS = {"path": "str"}
TOP_LEVEL = {"scenario", "network", "sweep", "height_cases", "evaluators", "modes", "campaign",
             "quadrature", "tilt_search", "output"}


def _env_bool(name: str, default: str) -> bool:
    return os.getenv(name, default).strip().lower() in ("1", "true", "yes", "on")


def _check_value(value: Any, kind: str, field: str) -> Any:
    """Check one scalar against its kind and return it in canonical form."""
    if kind == "float?" and value is None:
        return None
    if kind in ("float", "float?"):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigurationError(f"Expected a number, got {value!r}", field=field)
        return float(value)
    if kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigurationError(f"Expected an integer, got {value!r}", field=field)
        return value
    if kind == "bool":
        if not isinstance(value, bool):
            raise ConfigurationError(f"Expected true or false, got {value!r}", field=field)
        return value
    if not isinstance(value, str):
        raise ConfigurationError(f"Expected a string, got {value!r}", field=field)
    return value


def _section(data: Any, field: str, schema, extra: frozenset = frozenset()) -> Dict[str, Any]:
    """Check a mapping section: known keys only, scalar kinds per schema."""
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigurationError(f"Section '{field}' must be a mapping", field=field)
    allowed = set(schema) | set(extra)
    checked = {}
    for key, value in data.items():
        if key not in allowed:
            raise ConfigurationError(f"Unknown key '{key}'", field=f"{field}.{key}")
        if isinstance(schema, dict) and key in schema:
            checked[key] = _check_value(value, schema[key], f"{field}.{key}")
        else:
            checked[key] = value
    return checked


def _string_list(data: Any, field: str) -> List[str]:
    if isinstance(data, str):
        data = [data]
    if not isinstance(data, list) or not all(isinstance(v, str) for v in data):
        raise ConfigurationError(f"'{field}' must be a list of names", field=field)
    return data


def expand_grid(data: Any, field: str = "sweep.grid") -> List[float]:
    """A list of numbers, or {start, stop, step} expanded with stop included."""
    if isinstance(data, list):
        return [_check_value(v, "float", f"{field}[{i}]") for i, v in enumerate(data)]
    if isinstance(data, dict):
        spec = _section(data, field, {"start": "float", "stop": "float", "step": "float"})
        missing = {"start", "stop", "step"} - set(spec)
        if missing:
            raise ConfigurationError(f"Grid range is missing {sorted(missing)}", field=field)
        if spec["step"] == 0.0 or (spec["stop"] - spec["start"]) * spec["step"] < 0.0:
            raise ConfigurationError("Grid step must be nonzero and point from start to stop", field=field)
        values = np.arange(spec["start"], spec["stop"] + 0.5 * spec["step"], spec["step"])
        return [float(round(v, 10)) for v in values]
    raise ConfigurationError("Grid must be a list or a {start, stop, step} mapping", field=field)


class ConfigManager:
    """Handles configuration loading and validation."""

    @staticmethod
    def load_settings() -> RunSettings:
        """Load run settings from environment variables."""
        load_dotenv()
        try:
            jobs = int(os.getenv("TILTCOV_JOBS", "1"))
        except ValueError:
            raise ConfigurationError("TILTCOV_JOBS must be an integer", field="TILTCOV_JOBS")

        return RunSettings(
            jobs=jobs,
            log_dir=os.getenv("TILTCOV_LOG_DIR", "./logs"),
            output_directory=os.getenv("TILTCOV_OUTPUT_DIRECTORY", "./results"),
            show_progress=_env_bool("TILTCOV_SHOW_PROGRESS", "true"),
            enable_cache=_env_bool("TILTCOV_CACHE", "false"),
            include_timing=_env_bool("TILTCOV_INCLUDE_TIMING", "false"),
        )

    @staticmethod
    def load_experiment(path: str) -> ExperimentSpec:
        """Parse and fully validate an experiment file."""
        file_path = Path(path)
        try:
            text = file_path.read_text(encoding="utf-8")
        except OSError as e:
            raise FileOperationError(f"Cannot read config file: {e}", file_path=str(file_path),
                                     operation="read")

        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as e:
            mark = getattr(e, "problem_mark", None)
            line = mark.line + 1 if mark is not None else None
            problem = getattr(e, "problem", None) or str(e)
            raise ConfigurationError(f"Invalid YAML in {file_path.name}: {problem}", line=line)

        spec = ConfigManager.build_experiment(data)
        logger.info(f"Loaded experiment '{spec.scenario_id}' from {file_path}")
        return spec

    @staticmethod
    def build_network(data: Any, field: str = "network") -> NetworkConfig:
        """NetworkConfig from a (possibly partial) mapping; missing keys take defaults."""
        network = _section(data, field, NETWORK_FIELDS, frozenset(NETWORK_SECTIONS))
        pattern = AntennaPattern(**_section(network.pop("pattern", None), f"{field}.pattern", PATTERN_FIELDS))
        path_loss = PathLossModel(**_section(network.pop("path_loss", None), f"{field}.path_loss",
                                             PATH_LOSS_FIELDS))
        heights = HeightModel(**_section(network.pop("height_model", None), f"{field}.height_model",
                                         HEIGHT_FIELDS))
        return NetworkConfig(pattern=pattern, path_loss=path_loss, height_model=heights, **network)

    @staticmethod
    def build_experiment(data: Any) -> ExperimentSpec:
        """ExperimentSpec from the parsed YAML document."""
        if not isinstance(data, dict):
            raise ConfigurationError("Experiment file must contain a mapping at the top level")
        unknown = set(data) - TOP_LEVEL
        if unknown:
            raise ConfigurationError(f"Unknown key '{sorted(unknown)[0]}'", field=sorted(unknown)[0])
        for required in ("scenario", "sweep"):
            if required not in data:
                raise ConfigurationError(f"Missing required section '{required}'", field=required)

        scenario = _check_value(data["scenario"], "str", "scenario")
        network = ConfigManager.build_network(data.get("network"))

        sweep = _section(data["sweep"], "sweep", SWEEP_FIELDS)
        if "axis" not in sweep or "grid" not in sweep:
            raise ConfigurationError("Sweep needs both 'axis' and 'grid'", field="sweep")
        axis = _check_value(sweep["axis"], "str", "sweep.axis")
        grid = expand_grid(sweep["grid"])

        cases = []
        raw_cases = data.get("height_cases") or []
        if not isinstance(raw_cases, list):
            raise ConfigurationError("'height_cases' must be a list", field="height_cases")
        for i, raw in enumerate(raw_cases):
            case = _section(raw, f"height_cases[{i}]", HEIGHT_CASE_FIELDS)
            if set(case) != set(HEIGHT_CASE_FIELDS):
                raise ConfigurationError("Height case needs label, a and h0", field=f"height_cases[{i}]")
            cases.append(HeightCase(**case))

        evaluators = [ConfigManager.normalize_evaluator(e)
                      for e in _string_list(data.get("evaluators", ["analytic"]), "evaluators")]
        modes = _string_list(data.get("modes", ["3dbf_height_aware"]), "modes")

        tilt_search = _section(data.get("tilt_search"), "tilt_search", TILT_SEARCH_FIELDS)
        if "evaluator" in tilt_search:
            tilt_search["evaluator"] = ConfigManager.normalize_evaluator(tilt_search["evaluator"])
        output = _section(data.get("output"), "output", OUTPUT_FIELDS)

        return ExperimentSpec(
            scenario_id=scenario,
            network=network,
            axis=axis,
            grid=grid,
            evaluators=evaluators,
            modes=modes,
            campaign=McCampaign(**_section(data.get("campaign"), "campaign", CAMPAIGN_FIELDS)),
            quadrature=QuadratureSpec(**_section(data.get("quadrature"), "quadrature", QUADRATURE_FIELDS)),
            tilt_search=TiltSearchSpec(**tilt_search),
            height_cases=cases,
            output_path=output.get("path"),
        )

    @staticmethod
    def normalize_evaluator(name: str) -> str:
        """Canonical evaluator name; accepts 'mc' for Monte Carlo."""
        key = str(name).strip().lower()
        if key not in EVALUATOR_ALIASES:
            raise ConfigurationError(f"Unknown evaluator '{name}'", field="evaluators")
        return EVALUATOR_ALIASES[key]

    @staticmethod
    def validate_experiment(spec: ExperimentSpec) -> bool:
        """Validate an experiment without raising."""
        try:
            spec.validate()
            return True
        except ValueError:
            return False

    @staticmethod
    def evaluator_choice(choice: Optional[str]) -> Optional[List[str]]:
        """Evaluator list for a CLI --evaluator value; None leaves the spec's own."""
        if choice is None:
            return None
        if choice == "both":
            return ["analytic", "montecarlo"]
        return [ConfigManager.normalize_evaluator(choice)]
