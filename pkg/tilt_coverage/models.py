"""
Data models for the tilt coverage toolkit.

Angles are degrees and thresholds are dB at this boundary; the numerical
modules convert to radians and linear units internally.
"""

import math
from dataclasses import dataclass, field, asdict, replace
from enum import Enum
from typing import List, Optional

from .exceptions import ConfigurationError, ValidationError


class Evaluator(str, Enum):
    """Coverage evaluators."""
    ANALYTIC = "analytic"
    MONTECARLO = "montecarlo"


class ComparisonMode(str, Enum):
    """Beamforming comparison modes of an experiment."""
    HEIGHT_AWARE = "3dbf_height_aware"
    HEIGHT_BLIND = "3dbf_height_blind"
    OMNI_2DBF = "2dbf"


class SweepAxis(str, Enum):
    """Axes an experiment can sweep."""
    TILT = "tilt"
    SIR_THRESHOLD = "sir_threshold_db"
    BS_DENSITY = "bs_density"


# Height case the height-blind design assumes: every user at ground-floor height
GROUND_HEIGHT_CASE_A = 0.0
GROUND_TYPICAL_H0 = 30.5


def _enum_value(value):
    return value.value if isinstance(value, Enum) else value


def _plain(obj):
    """asdict() with enums flattened to their values."""
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return _enum_value(obj)


@dataclass
class AntennaPattern:
    """Vertical BS antenna pattern: tilt, half-power beamwidth, side-lobe floor."""
    tilt_deg: float = 10.0
    theta3db_deg: float = 10.0
    sll_el_db: float = 20.0
    enabled: bool = True

    def __post_init__(self):
        """Validate the pattern after initialization."""
        self.validate()

    def validate(self) -> bool:
        """Validate the pattern data."""
        if not 0.0 <= self.tilt_deg <= 90.0:
            raise ConfigurationError("Tilt angle must lie in [0, 90] degrees",
                                     field="pattern.tilt_deg", details={"value": self.tilt_deg})
        if not self.theta3db_deg > 0.0:
            raise ConfigurationError("Half-power beamwidth must be positive",
                                     field="pattern.theta3db_deg", details={"value": self.theta3db_deg})
        if not self.sll_el_db > 0.0:
            raise ConfigurationError("Side-lobe level must be a positive attenuation in dB",
                                     field="pattern.sll_el_db", details={"value": self.sll_el_db})
        return True

    @property
    def gain_floor(self) -> float:
        """Smallest linear gain the pattern can produce."""
        return 1.0 if not self.enabled else 10.0 ** (-0.1 * self.sll_el_db)


@dataclass
class PathLossModel:
    """Distance-power law L(d) = C * d^-v."""
    exponent_v: float = 3.6
    scale_c: float = 1.0

    def __post_init__(self):
        """Validate the path-loss model after initialization."""
        self.validate()

    def validate(self) -> bool:
        """Validate the path-loss model data."""
        if not self.exponent_v > 2.0:
            raise ConfigurationError("Path-loss exponent must exceed 2 for the interference integral to converge",
                                     field="path_loss.exponent_v", details={"value": self.exponent_v})
        if not self.scale_c > 0.0:
            raise ConfigurationError("Path-loss scale must be positive",
                                     field="path_loss.scale_c", details={"value": self.scale_c})
        return True


@dataclass
class HeightModel:
    """Effective-height law: weight a on a linear density, weight 1 - a on a point mass."""
    a: float = 1.0
    b: float = 0.0047
    c: float = -0.047
    h_min: float = 10.0
    h_max: float = 30.5
    h_atom: float = 30.5

    # raw linear density may integrate to 1 only within this tolerance
    NORMALIZATION_TOLERANCE = 0.02

    def __post_init__(self):
        """Validate the height model after initialization."""
        self.validate()

    def validate(self) -> bool:
        """Validate the height model data."""
        if not 0.0 <= self.a <= 1.0:
            raise ConfigurationError("Mixture weight a must lie in [0, 1]",
                                     field="height_model.a", details={"value": self.a})
        if not self.h_min < self.h_max:
            raise ConfigurationError("h_min must be smaller than h_max",
                                     field="height_model.h_min",
                                     details={"h_min": self.h_min, "h_max": self.h_max})
        if self.h_min < 0.0 or self.h_atom < 0.0:
            raise ConfigurationError("Effective heights cannot be negative", field="height_model.h_min")

        # linear, so checking both edges covers the whole support
        for edge in (self.h_min, self.h_max):
            if self.b * edge + self.c < -1e-12:
                raise ConfigurationError("Linear density b*h + c is negative inside the support",
                                         field="height_model.b", details={"h": edge})

        raw_mass = self.raw_mass
        if abs(raw_mass - 1.0) > self.NORMALIZATION_TOLERANCE:
            raise ConfigurationError(
                f"Linear density integrates to {raw_mass:.5f}, not 1 within {self.NORMALIZATION_TOLERANCE}",
                field="height_model.c", details={"raw_mass": raw_mass})
        return True

    @property
    def raw_mass(self) -> float:
        """Closed-form integral of b*h + c over [h_min, h_max]."""
        return (0.5 * self.b * (self.h_max ** 2 - self.h_min ** 2)
                + self.c * (self.h_max - self.h_min))

    @property
    def normalization(self) -> float:
        """Renormalization constant Z of the continuous part."""
        return self.raw_mass


@dataclass
class NetworkConfig:
    """Everything the coverage analysis of a single operating point depends on."""
    lambda_bs: float = 1e-6
    h_bs: float = 32.0
    pattern: AntennaPattern = field(default_factory=AntennaPattern)
    path_loss: PathLossModel = field(default_factory=PathLossModel)
    height_model: HeightModel = field(default_factory=HeightModel)
    h0: float = 30.5
    exclusion_radius: Optional[float] = None
    sir_threshold_db: float = 4.0
    approx_order: int = 5

    def __post_init__(self):
        """Validate the configuration after initialization."""
        self.validate()

    def validate(self) -> bool:
        """Validate the configuration data."""
        if not self.lambda_bs > 0.0:
            raise ConfigurationError("BS density must be positive",
                                     field="network.lambda_bs", details={"value": self.lambda_bs})
        if self.exclusion_radius is not None and self.exclusion_radius < 0.0:
            raise ConfigurationError("Exclusion radius cannot be negative",
                                     field="network.exclusion_radius",
                                     details={"value": self.exclusion_radius})
        if isinstance(self.approx_order, bool) or int(self.approx_order) != self.approx_order \
                or self.approx_order < 1:
            raise ConfigurationError("Approximation order N must be a positive integer",
                                     field="network.approx_order", details={"value": self.approx_order})
        self.approx_order = int(self.approx_order)

        heights = self.height_model
        if not heights.h_min <= self.h0 <= heights.h_atom:
            raise ConfigurationError(
                f"Typical-user effective height h0={self.h0} lies outside [{heights.h_min}, {heights.h_atom}]",
                field="network.h0")
        if self.h_bs < max(heights.h_max, heights.h_atom, self.h0):
            raise ConfigurationError("BS height must be at least the largest effective height",
                                     field="network.h_bs", details={"value": self.h_bs})
        if not math.isfinite(self.sir_threshold_db):
            raise ConfigurationError("SIR threshold must be finite", field="network.sir_threshold_db")
        return True

    @property
    def tau_linear(self) -> float:
        """SIR threshold as a linear ratio."""
        return 10.0 ** (self.sir_threshold_db / 10.0)

    @property
    def mean_cell_radius(self) -> float:
        """Radius of the disc holding one BS on average, sqrt(1/(pi*lambda))."""
        return math.sqrt(1.0 / (math.pi * self.lambda_bs))

    @property
    def resolved_exclusion_radius(self) -> float:
        """Exclusion radius, falling back to the mean cell radius."""
        if self.exclusion_radius is None:
            return self.mean_cell_radius
        return self.exclusion_radius

    def with_tilt(self, tilt_deg: float) -> "NetworkConfig":
        return replace(self, pattern=replace(self.pattern, tilt_deg=float(tilt_deg)))

    def with_pattern_disabled(self) -> "NetworkConfig":
        return replace(self, pattern=replace(self.pattern, enabled=False))

    def with_threshold(self, sir_threshold_db: float) -> "NetworkConfig":
        return replace(self, sir_threshold_db=float(sir_threshold_db))

    def with_density(self, lambda_bs: float) -> "NetworkConfig":
        return replace(self, lambda_bs=float(lambda_bs))

    def with_height_case(self, a: float, h0: float) -> "NetworkConfig":
        return replace(self, h0=float(h0), height_model=replace(self.height_model, a=float(a)))

    def to_dict(self) -> dict:
        """Convert NetworkConfig to a plain dictionary."""
        return _plain(asdict(self))


@dataclass
class QuadratureSpec:
    """Tolerances and budgets of the nested coverage quadrature."""
    rel_tol: float = 1e-6
    abs_tol: float = 1e-9
    outer_trunc_mass: float = 1e-6
    radial_trunc_factor: float = 2.0
    panel_order: int = 15
    height_nodes: int = 64
    max_panels: int = 1_000_000
    min_radial_segments: int = 4
    max_radial_segments: int = 16

    def __post_init__(self):
        """Validate the quadrature settings after initialization."""
        self.validate()

    def validate(self) -> bool:
        """Validate the quadrature settings."""
        if not 0.0 < self.rel_tol < 1.0:
            raise ConfigurationError("rel_tol must lie in (0, 1)", field="quadrature.rel_tol")
        if not 0.0 < self.abs_tol < 1.0:
            raise ConfigurationError("abs_tol must lie in (0, 1)", field="quadrature.abs_tol")
        if not 0.0 < self.outer_trunc_mass <= 1e-4:
            raise ConfigurationError("outer_trunc_mass must lie in (0, 1e-4]",
                                     field="quadrature.outer_trunc_mass")
        if not self.radial_trunc_factor > 1.0:
            raise ConfigurationError("radial_trunc_factor must exceed 1",
                                     field="quadrature.radial_trunc_factor")
        if self.panel_order < 2 or self.height_nodes < 2:
            raise ConfigurationError("Quadrature orders must be at least 2", field="quadrature.panel_order")
        if self.max_panels < 1:
            raise ConfigurationError("max_panels must be positive", field="quadrature.max_panels")
        if not 1 <= self.min_radial_segments <= self.max_radial_segments:
            raise ConfigurationError("Radial segment bounds are inconsistent",
                                     field="quadrature.min_radial_segments")
        return True


@dataclass
class CoverageResult:
    """Coverage probability with quadrature diagnostics."""
    p_cov: float
    terms: List[float]
    err_estimate: float
    evals: int
    unclamped: float = 0.0


@dataclass
class McCampaign:
    """Monte Carlo campaign settings."""
    trials: int = 200_000
    seed: int = 1
    window_radius: Optional[float] = None
    record_sir: bool = False
    block_size: int = 4096
    # add the mean interference from beyond the window to every trial with interferers
    tail_correction: bool = True

    def __post_init__(self):
        """Validate the campaign after initialization."""
        self.validate()

    def validate(self) -> bool:
        """Validate the campaign data."""
        if int(self.trials) != self.trials or self.trials < 1:
            raise ConfigurationError("Trial count must be a positive integer", field="campaign.trials")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2 ** 64:
            raise ConfigurationError("Seed must be an unsigned 64-bit integer", field="campaign.seed")
        if self.window_radius is not None and not self.window_radius > 0.0:
            raise ConfigurationError("Window radius must be positive", field="campaign.window_radius")
        if int(self.block_size) != self.block_size or self.block_size < 1:
            raise ConfigurationError("Block size must be a positive integer", field="campaign.block_size")
        if not isinstance(self.tail_correction, bool):
            raise ConfigurationError("tail_correction must be true or false", field="campaign.tail_correction")
        self.trials = int(self.trials)
        self.seed = int(self.seed)
        self.block_size = int(self.block_size)
        return True

    def resolved_window_radius(self, cfg: NetworkConfig) -> float:
        """Simulation disc radius for cfg; defaults to ten mean cell radii."""
        radius = self.window_radius if self.window_radius is not None else 10.0 * cfg.mean_cell_radius
        if not radius > cfg.resolved_exclusion_radius:
            raise ConfigurationError(
                f"Window radius {radius:.3f} m must exceed the exclusion radius "
                f"{cfg.resolved_exclusion_radius:.3f} m",
                field="campaign.window_radius")
        return radius

    @property
    def block_count(self) -> int:
        return -(-self.trials // self.block_size)


@dataclass
class McEstimate:
    """Empirical coverage at one threshold."""
    tau_db: float
    p_cov_hat: float
    ci_halfwidth_95: float
    trials: int
    sir_samples_db: Optional[List[float]] = None
    mean_interferers: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.p_cov_hat <= 1.0:
            raise ValidationError("Coverage estimate must lie in [0, 1]", field="p_cov_hat",
                                  value=str(self.p_cov_hat))


@dataclass
class TiltSearchSpec:
    """Grid-plus-refinement tilt search settings."""
    grid_step_deg: float = 0.5
    refine: bool = True
    refine_tol_deg: float = 0.05
    evaluator: Evaluator = Evaluator.ANALYTIC

    def __post_init__(self):
        """Validate the search settings after initialization."""
        self.validate()

    def validate(self) -> bool:
        """Validate the search settings."""
        if not 0.0 < self.grid_step_deg <= 90.0:
            raise ConfigurationError("Grid step must lie in (0, 90] degrees", field="tilt_search.grid_step_deg")
        if not self.refine_tol_deg > 0.0:
            raise ConfigurationError("Refinement tolerance must be positive", field="tilt_search.refine_tol_deg")
        try:
            self.evaluator = Evaluator(_enum_value(self.evaluator))
        except ValueError:
            raise ConfigurationError(f"Unknown evaluator '{self.evaluator}'", field="tilt_search.evaluator")
        return True


@dataclass
class TiltProfile:
    """Coverage against tilt with the located optimum."""
    betas_deg: List[float]
    p_cov: List[float]
    beta_star_deg: float
    p_star: float


@dataclass
class HeightCase:
    """One user-height scenario: mixture weight a and typical-user height h0."""
    label: str
    a: float
    h0: float

    def __post_init__(self):
        if not self.label or not str(self.label).strip():
            raise ConfigurationError("Height case label cannot be empty", field="height_cases.label")
        if not 0.0 <= self.a <= 1.0:
            raise ConfigurationError("Height case weight a must lie in [0, 1]", field="height_cases.a")


@dataclass
class ExperimentSpec:
    """A declarative sweep: base network, axis grid, evaluators and comparison modes."""
    scenario_id: str
    network: NetworkConfig
    axis: SweepAxis
    grid: List[float]
    evaluators: List[Evaluator] = field(default_factory=lambda: [Evaluator.ANALYTIC])
    modes: List[ComparisonMode] = field(default_factory=lambda: [ComparisonMode.HEIGHT_AWARE])
    campaign: McCampaign = field(default_factory=McCampaign)
    quadrature: QuadratureSpec = field(default_factory=QuadratureSpec)
    tilt_search: TiltSearchSpec = field(default_factory=TiltSearchSpec)
    height_cases: List[HeightCase] = field(default_factory=list)
    output_path: Optional[str] = None

    def __post_init__(self):
        """Validate the experiment after initialization."""
        self.validate()

    def validate(self) -> bool:
        """Validate the experiment; runs before any computation."""
        if not self.scenario_id or not str(self.scenario_id).strip():
            raise ValidationError("Scenario id cannot be empty", field="scenario")
        try:
            self.axis = SweepAxis(_enum_value(self.axis))
            self.evaluators = [Evaluator(_enum_value(e)) for e in self.evaluators]
            self.modes = [ComparisonMode(_enum_value(m)) for m in self.modes]
        except ValueError as e:
            raise ValidationError(f"Unknown experiment option: {e}", field="sweep")

        if not self.grid:
            raise ValidationError("Axis grid cannot be empty", field="sweep.grid")
        self.grid = [float(v) for v in self.grid]
        steps = [b - a for a, b in zip(self.grid, self.grid[1:])]
        if steps and not (all(s > 0 for s in steps) or all(s < 0 for s in steps)):
            raise ValidationError("Axis grid must be strictly monotone", field="sweep.grid")
        if not self.evaluators:
            raise ValidationError("At least one evaluator is required", field="evaluators")
        if not self.modes:
            raise ValidationError("At least one comparison mode is required", field="modes")
        if len(set(self.evaluators)) != len(self.evaluators) or len(set(self.modes)) != len(self.modes):
            raise ValidationError("Evaluators and modes must not repeat", field="modes")

        if self.axis is SweepAxis.TILT:
            if any(not 0.0 <= v <= 90.0 for v in self.grid):
                raise ValidationError("Tilt grid values must lie in [0, 90]", field="sweep.grid")
            if ComparisonMode.HEIGHT_BLIND in self.modes:
                raise ValidationError("Height-blind mode needs an optimised tilt; it cannot run on the tilt axis",
                                      field="modes", value=ComparisonMode.HEIGHT_BLIND.value)
        elif self.axis is SweepAxis.BS_DENSITY:
            if any(v <= 0.0 for v in self.grid):
                raise ValidationError("Density grid values must be positive", field="sweep.grid")
        elif any(not math.isfinite(v) for v in self.grid):
            raise ValidationError("Threshold grid values must be finite", field="sweep.grid")

        labels = [case.label for case in self.height_cases]
        if len(set(labels)) != len(labels):
            raise ValidationError("Height case labels must be unique", field="height_cases")
        for case in self.cases():
            # raises ConfigurationError for an h0 outside the height support
            self.network.with_height_case(case.a, case.h0)
        return True

    def cases(self) -> List[HeightCase]:
        """Height cases to run; the base network alone when none are listed."""
        if self.height_cases:
            return list(self.height_cases)
        return [HeightCase("base", self.network.height_model.a, self.network.h0)]

    def to_dict(self) -> dict:
        """Convert ExperimentSpec to a plain dictionary."""
        return _plain(asdict(self))


@dataclass
class ResultRow:
    """One self-describing line of an experiment table."""
    scenario_id: str
    height_case: str
    evaluator: str
    mode: str
    axis: str
    axis_value: float
    beta_deg: Optional[float]
    p_cov: float
    ci_halfwidth: Optional[float] = None
    err_estimate: Optional[float] = None
    seed: Optional[int] = None
    runtime_ms: Optional[float] = None

    def to_dict(self) -> dict:
        """Convert ResultRow to dictionary for export."""
        return _plain(asdict(self))


@dataclass
class RunSettings:
    """Process-level settings read from the environment."""
    jobs: int = 1
    log_dir: str = "./logs"
    output_directory: str = "./results"
    show_progress: bool = True
    enable_cache: bool = False
    include_timing: bool = False

    def __post_init__(self):
        """Validate the settings after initialization."""
        self.validate()

    def validate(self) -> bool:
        """Validate the settings data."""
        if self.jobs <= 0 or self.jobs > 256:
            raise ConfigurationError("Jobs must be between 1 and 256", field="jobs")
        return True
