"""
Experiment orchestration.

An ExperimentSpec expands into one task per (height case, mode, evaluator,
axis value). Tasks are independent and go through the worker pool; rows are
assembled in that logical order whatever order the tasks finish in. Failed
tasks do not stop the run: the successful rows are written and a
PartialResultsError reports the rest.
"""

import logging
import time
from dataclasses import asdict, dataclass, replace
from datetime import datetime
from functools import partial
from pathlib import Path
from typing import Any, Dict, List, Optional

from .cache import EvaluationCache
from .evaluation import evaluate_point
from .exceptions import PartialResultsError
from .logging_config import ExperimentLogger
from .models import (
    GROUND_HEIGHT_CASE_A,
    GROUND_TYPICAL_H0,
    ComparisonMode,
    Evaluator,
    ExperimentSpec,
    HeightCase,
    McCampaign,
    NetworkConfig,
    QuadratureSpec,
    ResultRow,
    RunSettings,
    SweepAxis,
    TiltSearchSpec,
)
from .optimizer import optimize_tilt
from .result_exporter import ResultExporter
from .worker_pool import WorkerPool

logger = logging.getLogger(__name__)


@dataclass
class ExperimentOutcome:
    """Rows of a finished experiment and the file they were written to."""
    rows: List[ResultRow]
    output_path: str


def point_network(base: NetworkConfig, axis: SweepAxis, value: float, case: HeightCase) -> NetworkConfig:
    """Network of one grid point: height case applied, axis parameter set."""
    cfg = base.with_height_case(case.a, case.h0)
    if axis is SweepAxis.TILT:
        return cfg.with_tilt(value)
    if axis is SweepAxis.SIR_THRESHOLD:
        return cfg.with_threshold(value)
    return cfg.with_density(value)


def evaluate_task(cfg: NetworkConfig, axis: SweepAxis, mode: ComparisonMode, evaluator: Evaluator,
                  quad: QuadratureSpec, campaign: McCampaign, tilt_search: TiltSearchSpec) -> Dict[str, Any]:
    """Evaluate one grid point in one comparison mode.

    On the tilt axis the tilt is given. Elsewhere the height-aware mode
    optimises tilt under the configured heights, the height-blind mode
    optimises under the ground height case and is evaluated under the
    configured heights, and 2dbf disables the vertical pattern.
    """
    start = time.perf_counter()
    search = replace(tilt_search, evaluator=evaluator)

    if mode is ComparisonMode.OMNI_2DBF:
        beta = cfg.pattern.tilt_deg if axis is SweepAxis.TILT else None
        point = evaluate_point(cfg.with_pattern_disabled(), evaluator, quad, campaign)
    elif axis is SweepAxis.TILT:
        beta = cfg.pattern.tilt_deg
        point = evaluate_point(cfg, evaluator, quad, campaign)
    elif mode is ComparisonMode.HEIGHT_AWARE:
        beta, _ = optimize_tilt(cfg, search, quad, campaign)
        point = evaluate_point(cfg.with_tilt(beta), evaluator, quad, campaign)
    else:
        blind = cfg.with_height_case(GROUND_HEIGHT_CASE_A, GROUND_TYPICAL_H0)
        beta, _ = optimize_tilt(blind, search, quad, campaign)
        point = evaluate_point(cfg.with_tilt(beta), evaluator, quad, campaign)

    return {
        "beta_deg": beta,
        "p_cov": point.p_cov,
        "ci_halfwidth": point.ci_halfwidth,
        "err_estimate": point.err_estimate,
        "seed": point.seed,
        "runtime_ms": (time.perf_counter() - start) * 1000.0,
    }


@dataclass
class _PlannedTask:
    case: HeightCase
    mode: ComparisonMode
    evaluator: Evaluator
    value: float
    cfg: NetworkConfig

    def descriptor(self, spec: ExperimentSpec) -> Dict[str, Any]:
        """Everything that determines this task's values."""
        return {
            "network": self.cfg.to_dict(),
            "axis": spec.axis.value,
            "mode": self.mode.value,
            "evaluator": self.evaluator.value,
            "quadrature": asdict(spec.quadrature) if self.evaluator is Evaluator.ANALYTIC else None,
            "campaign": asdict(spec.campaign) if self.evaluator is Evaluator.MONTECARLO else None,
            "tilt_search": {"grid_step_deg": spec.tilt_search.grid_step_deg,
                            "refine": spec.tilt_search.refine,
                            "refine_tol_deg": spec.tilt_search.refine_tol_deg},
        }


class ExperimentRunner:
    """Runs experiment specs and persists their result tables."""

    def __init__(self, settings: Optional[RunSettings] = None,
                 experiment_logger: Optional[ExperimentLogger] = None):
        """Initialize the runner with run settings."""
        self.settings = settings or RunSettings()
        self.experiment_logger = experiment_logger
        self.pool = WorkerPool(self.settings.jobs, self.settings.show_progress)
        self.exporter = ResultExporter(self.settings.output_directory, self.settings.include_timing)
        self.cache_dir = Path(self.settings.output_directory) / "cache"
        self.cache = EvaluationCache(str(self.cache_dir)) if self.settings.enable_cache else None
        self.stats: Dict[str, Any] = {}

    def plan(self, spec: ExperimentSpec) -> List[_PlannedTask]:
        """Tasks in row order: height case, mode, evaluator, axis value."""
        tasks = []
        for case in spec.cases():
            for mode in spec.modes:
                for evaluator in spec.evaluators:
                    for value in spec.grid:
                        cfg = point_network(spec.network, spec.axis, value, case)
                        tasks.append(_PlannedTask(case, mode, evaluator, value, cfg))
        return tasks

    def run(self, spec: ExperimentSpec, output_path: Optional[str] = None,
            fmt: str = "csv") -> ExperimentOutcome:
        """Execute the experiment, write its table and return the rows."""
        spec.validate()
        planned = self.plan(spec)
        self.stats = {
            "scenario_id": spec.scenario_id,
            "tasks": len(planned),
            "cached": 0,
            "failed": 0,
            "start_time": datetime.now(),
            "end_time": None,
        }
        logger.info(f"Running scenario '{spec.scenario_id}': {len(planned)} tasks "
                    f"({spec.axis.value} axis, {len(spec.grid)} points)")

        values: List[Any] = [None] * len(planned)
        pending = []
        for index, task in enumerate(planned):
            cached = self.cache.get(task.descriptor(spec)) if self.cache else None
            if cached is not None:
                values[index] = cached
                self.stats["cached"] += 1
            else:
                pending.append(index)

        callables = [partial(evaluate_task, planned[i].cfg, spec.axis, planned[i].mode,
                             planned[i].evaluator, spec.quadrature, spec.campaign, spec.tilt_search)
                     for i in pending]
        for index, outcome in zip(pending, self.pool.run(callables, description=spec.scenario_id)):
            values[index] = outcome
            if self.cache and not isinstance(outcome, Exception):
                self.cache.store(planned[index].descriptor(spec), outcome, persist=False)
        if self.cache and pending:
            self.cache.flush()

        rows, failures = self._assemble_rows(spec, planned, values)
        self.stats["failed"] = len(failures)
        self.stats["end_time"] = datetime.now()

        path = self.exporter.export_rows(rows, spec, output_path, fmt)
        if self.experiment_logger:
            self.experiment_logger.log_file_operation("write", path, "success",
                                                      details={"rows": len(rows), "format": fmt})
            self.experiment_logger.log_run_stats(self.stats)

        if failures:
            raise PartialResultsError(
                f"{len(failures)} of {len(planned)} evaluations failed in scenario '{spec.scenario_id}'",
                successful_count=len(rows),
                failed_count=len(failures),
                partial_results=rows,
                details={"output_path": path, "failures": failures},
            )
        return ExperimentOutcome(rows=rows, output_path=path)

    def _assemble_rows(self, spec: ExperimentSpec, planned: List[_PlannedTask], values: List[Any]):
        rows, failures = [], []
        for task, value in zip(planned, values):
            context = {"scenario": spec.scenario_id, "height_case": task.case.label,
                       "mode": task.mode.value, "evaluator": task.evaluator.value,
                       spec.axis.value: task.value}
            if isinstance(value, Exception):
                failures.append({**context, "error": str(value)})
                if self.experiment_logger:
                    self.experiment_logger.log_error_with_context(value, context)
                else:
                    logger.error(f"{type(value).__name__}: {value} | Context: {context}")
                continue

            if self.experiment_logger:
                self.experiment_logger.log_evaluation(task.evaluator.value, value["beta_deg"], "success",
                                                      value["runtime_ms"] / 1000.0, context)
            rows.append(ResultRow(
                scenario_id=spec.scenario_id,
                height_case=task.case.label,
                evaluator=task.evaluator.value,
                mode=task.mode.value,
                axis=spec.axis.value,
                axis_value=task.value,
                beta_deg=value["beta_deg"],
                p_cov=value["p_cov"],
                ci_halfwidth=value["ci_halfwidth"],
                err_estimate=value["err_estimate"],
                seed=value["seed"],
                runtime_ms=value["runtime_ms"] if self.settings.include_timing else None,
            ))
        return rows, failures

    def get_stats(self) -> Dict[str, Any]:
        """Get statistics of the last run."""
        return self.stats.copy()


def run_experiment(spec: ExperimentSpec, settings: Optional[RunSettings] = None,
                   output_path: Optional[str] = None, fmt: str = "csv") -> ExperimentOutcome:
    """Run one experiment with default wiring."""
    return ExperimentRunner(settings).run(spec, output_path, fmt)
