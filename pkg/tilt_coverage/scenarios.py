"""
Built-in experiment scenarios.

Two BS densities, each with a tilt sweep at a 4 dB threshold over the four
user-height cases and a threshold sweep comparing the three beamforming
modes, plus two density sweeps.
"""

from typing import List

from .models import (
    AntennaPattern,
    ComparisonMode,
    Evaluator,
    ExperimentSpec,
    HeightCase,
    HeightModel,
    McCampaign,
    NetworkConfig,
    PathLossModel,
    SweepAxis,
    TiltSearchSpec,
)
from .optimizer import tilt_grid

SPARSE_DENSITY = 1e-6
DENSE_DENSITY = 5e-5
DEFAULT_THRESHOLD_DB = 4.0

TILT_SWEEP_CASES = [
    HeightCase("a1_h0_10", a=1.0, h0=10.0),
    HeightCase("a1_h0_30.5", a=1.0, h0=30.5),
    HeightCase("a0_h0_10", a=0.0, h0=10.0),
    HeightCase("a0_h0_30.5", a=0.0, h0=30.5),
]

ALL_MODES = [ComparisonMode.HEIGHT_AWARE, ComparisonMode.HEIGHT_BLIND, ComparisonMode.OMNI_2DBF]

THRESHOLD_GRID_DB = [float(t) for t in range(-10, 21)]
DENSITY_GRID = [1e-6, 2e-6, 5e-6, 1e-5, 2e-5, 5e-5]


def base_network(lambda_bs: float, h0: float = 30.5) -> NetworkConfig:
    """Network shared by every built-in scenario."""
    return NetworkConfig(
        lambda_bs=lambda_bs,
        h_bs=32.0,
        pattern=AntennaPattern(tilt_deg=10.0, theta3db_deg=10.0, sll_el_db=20.0),
        path_loss=PathLossModel(exponent_v=3.6, scale_c=1.0),
        height_model=HeightModel(a=1.0, b=0.0047, c=-0.047, h_min=10.0, h_max=30.5, h_atom=30.5),
        h0=h0,
        sir_threshold_db=DEFAULT_THRESHOLD_DB,
        approx_order=5,
    )


def _tilt_sweep(scenario_id: str, lambda_bs: float) -> ExperimentSpec:
    return ExperimentSpec(
        scenario_id=scenario_id,
        network=base_network(lambda_bs),
        axis=SweepAxis.TILT,
        grid=tilt_grid(0.5),
        evaluators=[Evaluator.ANALYTIC],
        modes=[ComparisonMode.HEIGHT_AWARE, ComparisonMode.OMNI_2DBF],
        campaign=McCampaign(trials=200_000, seed=1),
        height_cases=list(TILT_SWEEP_CASES),
    )


def _optimised_sweep(scenario_id: str, lambda_bs: float, axis: SweepAxis, grid: List[float],
                     h0: float) -> ExperimentSpec:
    label = "a1_h0_10" if h0 == 10.0 else "a1_h0_30.5"
    return ExperimentSpec(
        scenario_id=scenario_id,
        network=base_network(lambda_bs, h0=h0),
        axis=axis,
        grid=list(grid),
        evaluators=[Evaluator.ANALYTIC],
        modes=list(ALL_MODES),
        campaign=McCampaign(trials=200_000, seed=1),
        tilt_search=TiltSearchSpec(grid_step_deg=1.0, refine=True, refine_tol_deg=0.05),
        height_cases=[HeightCase(label, a=1.0, h0=h0)],
    )


def emit_builtin_scenarios() -> List[ExperimentSpec]:
    """The six canonical scenarios, in a fixed order."""
    return [
        _tilt_sweep("fig3", SPARSE_DENSITY),
        _tilt_sweep("fig4", DENSE_DENSITY),
        _optimised_sweep("fig5", SPARSE_DENSITY, SweepAxis.SIR_THRESHOLD, THRESHOLD_GRID_DB, h0=10.0),
        _optimised_sweep("fig6", DENSE_DENSITY, SweepAxis.SIR_THRESHOLD, THRESHOLD_GRID_DB, h0=10.0),
        _optimised_sweep("density_h0_10", SPARSE_DENSITY, SweepAxis.BS_DENSITY, DENSITY_GRID, h0=10.0),
        _optimised_sweep("density_h0_30p5", SPARSE_DENSITY, SweepAxis.BS_DENSITY, DENSITY_GRID, h0=30.5),
    ]
