"""
Command-line interface.

Verbs:
    coverage   evaluate one operating point
    sweep      run the experiment described by a YAML file
    figures    run the built-in scenarios
    validate   parse and validate a YAML file, or every built-in scenario,
               without computing

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 I/O failure.
"""

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional

import yaml

from .cache import EvaluationCache
from .config import ConfigManager
from .exceptions import (
    EXIT_OK,
    ConfigurationError,
    FileOperationError,
    PartialResultsError,
    TiltCoverageError,
    ValidationError,
    exit_code_for,
)
from .experiment import ExperimentRunner
from .logging_config import ExperimentLogger, get_user_friendly_error_message, log_system_info
from .models import ComparisonMode, ExperimentSpec, HeightCase, RunSettings, SweepAxis
from .result_exporter import ResultExporter
from .scenarios import emit_builtin_scenarios

logger = logging.getLogger(__name__)


def _u64(value: str) -> int:
    seed = int(value)
    if not 0 <= seed < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return seed


def _positive_int(value: str) -> int:
    number = int(value)
    if number < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return number


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one sub-command per verb."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=str, help="Output file (coverage, sweep) or directory (figures)")
    common.add_argument("--seed", type=_u64, help="Monte Carlo seed (unsigned 64-bit)")
    common.add_argument("--trials", type=_positive_int, help="Monte Carlo trial count")
    common.add_argument("--evaluator", choices=["analytic", "mc", "both"],
                        help="Evaluator(s) to run (default: as configured)")
    common.add_argument("--format", choices=["csv", "json"], default="csv", dest="fmt",
                        help="Result file format (default: csv)")
    common.add_argument("--jobs", type=_positive_int, help="Worker processes (default: TILTCOV_JOBS or 1)")
    common.add_argument("--log-dir", type=str, help="Log directory (default: TILTCOV_LOG_DIR or ./logs)")
    common.add_argument("--timing", action="store_true", help="Add a runtime_ms column to the results")
    common.add_argument("--no-progress", action="store_true", help="Hide progress bars")
    common.add_argument("--clear-cache", action="store_true",
                        help="Delete cached evaluations before running")

    parser = argparse.ArgumentParser(
        prog="tilt-coverage",
        description="Uplink coverage probability and optimal antenna tilt for 3D beamforming "
                    "with height-distributed users",
    )
    verbs = parser.add_subparsers(dest="verb", required=True)

    coverage = verbs.add_parser("coverage", parents=[common], help="Evaluate a single operating point")
    coverage.add_argument("--config", type=str, help="YAML file with a network section")
    coverage.add_argument("--tilt", type=float, help="Tilt angle in degrees")
    coverage.add_argument("--sir-threshold-db", type=float, help="SIR threshold in dB")
    coverage.add_argument("--density", type=float, help="BS density in BS per m^2")
    coverage.add_argument("--a", type=float, dest="mixture_a", help="Height mixture weight a")
    coverage.add_argument("--h0", type=float, help="Typical-user effective height in m")

    sweep = verbs.add_parser("sweep", parents=[common], help="Run an experiment file")
    sweep.add_argument("--config", type=str, required=True, help="YAML experiment file")

    figures = verbs.add_parser("figures", parents=[common], help="Run the built-in scenarios")
    figures.add_argument("--scenario", action="append", dest="scenarios",
                         help="Only run this built-in scenario (repeatable)")

    validate = verbs.add_parser("validate", help="Parse and validate an experiment file")
    validate.add_argument("--config", type=str,
                          help="YAML experiment file (default: check the built-in scenarios)")
    return parser


def resolve_settings(args: argparse.Namespace) -> RunSettings:
    """Environment settings with command-line overrides."""
    settings = ConfigManager.load_settings()
    overrides = {}
    if getattr(args, "jobs", None):
        overrides["jobs"] = args.jobs
    if getattr(args, "log_dir", None):
        overrides["log_dir"] = args.log_dir
    if getattr(args, "timing", False):
        overrides["include_timing"] = True
    if getattr(args, "no_progress", False):
        overrides["show_progress"] = False
    return replace(settings, **overrides) if overrides else settings


def apply_overrides(spec: ExperimentSpec, args: argparse.Namespace) -> ExperimentSpec:
    """Seed, trial count and evaluator choice from the command line."""
    campaign = spec.campaign
    if args.seed is not None:
        campaign = replace(campaign, seed=args.seed)
    if args.trials is not None:
        campaign = replace(campaign, trials=args.trials)
    evaluators = ConfigManager.evaluator_choice(args.evaluator) or spec.evaluators
    return replace(spec, campaign=campaign, evaluators=evaluators)


def load_network_file(path: str):
    """Network from a YAML file: its 'network' section, or the whole mapping."""
    try:
        data = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    except OSError as e:
        raise FileOperationError(f"Cannot read config file: {e}", file_path=path, operation="read")
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        raise ConfigurationError(f"Invalid YAML in {path}", line=mark.line + 1 if mark else None)
    if isinstance(data, dict) and "network" in data:
        data = data["network"]
    return ConfigManager.build_network(data)


def coverage_spec(args: argparse.Namespace) -> ExperimentSpec:
    """Single-point experiment from the coverage verb's flags."""
    network = load_network_file(args.config) if args.config else ConfigManager.build_network({})
    if args.sir_threshold_db is not None:
        network = network.with_threshold(args.sir_threshold_db)
    if args.density is not None:
        network = network.with_density(args.density)
    a = network.height_model.a if args.mixture_a is None else args.mixture_a
    h0 = network.h0 if args.h0 is None else args.h0
    tilt = network.pattern.tilt_deg if args.tilt is None else args.tilt
    return ExperimentSpec(
        scenario_id="coverage",
        network=network,
        axis=SweepAxis.TILT,
        grid=[tilt],
        modes=[ComparisonMode.HEIGHT_AWARE],
        height_cases=[HeightCase("point", a=a, h0=h0)],
    )


def print_summary(path: str, exporter: ResultExporter) -> None:
    metadata = exporter.read_metadata(path)
    campaign = (metadata.get("spec") or {}).get("campaign") or {}
    print(f"   Generated at {metadata.get('generated_at', '-')}, seed {campaign.get('seed', '-')}")
    frame = exporter.read_results(path)
    summary = exporter.summarize(frame)
    if not summary.empty:
        print("\n📊 Best coverage per group")
        print(summary.to_string(index=False))


def run_specs(specs: List[ExperimentSpec], args: argparse.Namespace, settings: RunSettings,
              experiment_logger: ExperimentLogger, out_is_dir: bool = False) -> int:
    """Run each spec, printing results; returns the worst exit code."""
    runner = ExperimentRunner(settings, experiment_logger)
    if getattr(args, "clear_cache", False):
        cleared = (runner.cache or EvaluationCache(str(runner.cache_dir))).clear_cache()
        print(f"🗑️  Cleared {cleared} cached evaluation(s)")
    exit_code = EXIT_OK
    for spec in specs:
        spec = apply_overrides(spec, args)
        output_path = None
        if args.out:
            output_path = str(Path(args.out) / f"{spec.scenario_id}.{args.fmt}") if out_is_dir else args.out
        print(f"🚀 Running scenario '{spec.scenario_id}' ({spec.axis.value}, {len(spec.grid)} points)")
        try:
            outcome = runner.run(spec, output_path, args.fmt)
            print(f"✅ Results saved: {outcome.output_path}")
            print_summary(outcome.output_path, runner.exporter)
        except PartialResultsError as e:
            print(f"⚠️  {e.message}")
            print(f"   Partial results saved: {e.details.get('output_path')}")
            experiment_logger.log_error_with_context(e, {"scenario": spec.scenario_id})
            exit_code = max(exit_code, exit_code_for(e))
    if runner.cache:
        stats = runner.cache.get_cache_stats()
        print(f"💾 Cache: {stats['hits']} hit(s), {stats['misses']} miss(es), "
              f"{stats['total_entries']} entries in {stats['cache_dir']}")
        experiment_logger.log_run_stats(stats)
    return exit_code


def validate_command(config_path: Optional[str]) -> int:
    """Check one experiment file, or every built-in scenario when no file is given."""
    if config_path:
        spec = ConfigManager.load_experiment(config_path)
        print(f"✅ {config_path} is valid: scenario '{spec.scenario_id}', "
              f"{spec.axis.value} axis with {len(spec.grid)} points, "
              f"{len(spec.cases())} height case(s)")
        return EXIT_OK

    invalid = []
    for spec in emit_builtin_scenarios():
        if ConfigManager.validate_experiment(spec):
            print(f"✅ {spec.scenario_id}: {spec.axis.value} axis with {len(spec.grid)} points")
        else:
            print(f"❌ {spec.scenario_id} failed validation")
            invalid.append(spec.scenario_id)
    if invalid:
        raise ValidationError(f"Built-in scenario(s) failed validation: {', '.join(invalid)}",
                              field="scenario")
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    """Entry point; returns the process exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        if args.verb == "validate":
            return validate_command(args.config)

        settings = resolve_settings(args)
        experiment_logger = ExperimentLogger(log_dir=settings.log_dir)
        log_system_info(experiment_logger.get_logger())

        if args.verb == "coverage":
            specs = [coverage_spec(args)]
        elif args.verb == "sweep":
            specs = [ConfigManager.load_experiment(args.config)]
        else:
            specs = emit_builtin_scenarios()
            if args.scenarios:
                known = {s.scenario_id for s in specs}
                unknown = [s for s in args.scenarios if s not in known]
                if unknown:
                    raise ConfigurationError(f"Unknown built-in scenario(s): {', '.join(unknown)}",
                                             field="scenario", details={"known": sorted(known)})
                specs = [s for s in specs if s.scenario_id in args.scenarios]

        return run_specs(specs, args, settings, experiment_logger, out_is_dir=args.verb == "figures")

    except TiltCoverageError as e:
        print(get_user_friendly_error_message(e))
        print(f"   {e}")
        if e.details:
            print(f"   Details: {e.details}")
        return exit_code_for(e)
    except OSError as e:
        print(get_user_friendly_error_message(e))
        return exit_code_for(e)
    except KeyboardInterrupt:
        print("\n⏹️  Run interrupted by user")
        return 130


if __name__ == "__main__":
    sys.exit(main())
