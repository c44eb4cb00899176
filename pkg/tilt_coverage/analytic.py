"""
Analytic coverage probability by nested deterministic quadrature.

The coverage indicator is replaced by its order-N gamma approximation, which
turns Pr{SIR > tau} into an alternating binomial sum of Laplace-type
expectations. Each expectation is the PGFL of the pilot-contaminating
interferer field, conditioned on the serving distance x:

    exp(-2 pi lambda * int_{R_e}^inf r (1 - F(h0, r, x, n, tau)) dr)

where F averages over the interferer effective height. The outer integral
averages over the nearest-BS distance law.
"""

import logging
import math
from dataclasses import replace
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import comb, gammaln

from .exceptions import DomainError, NumericalError
from .geometry import elevation_angle, nearest_bs_pdf, nearest_bs_quantile, vertical_gain
from .models import CoverageResult, HeightModel, NetworkConfig, QuadratureSpec
from .quadrature import (
    adaptive_gauss_legendre,
    gauss_legendre_rule,
    integrate_log_doubling,
)

logger = logging.getLogger(__name__)

# below this fraction of the mean cell radius the radial integral runs in r, not ln r
_LOG_START_FRACTION = 0.01


def eta(n_order: int) -> float:
    """N (N!)^(-1/N), evaluated through log-gamma."""
    if isinstance(n_order, bool) or int(n_order) != n_order or n_order < 1:
        raise DomainError("Approximation order must be a positive integer", argument="n_order",
                          value=n_order)
    n_order = int(n_order)
    return float(np.exp(math.log(n_order) - gammaln(n_order + 1) / n_order))


def alternating_binomial_sum(values: Sequence[float], n_order: int) -> Tuple[float, List[float]]:
    """Sum_{n=1}^N (-1)^(n+1) C(N, n) values[n-1]; returns (total, signed terms).

    With values[n-1] = exp(-n s) the total is 1 - (1 - exp(-s))^N.
    """
    if len(values) != n_order:
        raise DomainError(f"Expected {n_order} values, got {len(values)}", argument="values")
    terms = [(-1.0) ** (n + 1) * float(comb(n_order, n, exact=True)) * float(values[n - 1])
             for n in range(1, n_order + 1)]
    return math.fsum(terms), terms


@lru_cache(maxsize=64)
def _height_rule(a: float, b: float, c: float, h_min: float, h_max: float, h_atom: float,
                 order: int) -> Tuple[np.ndarray, np.ndarray]:
    nodes, weights = gauss_legendre_rule(order)
    half = 0.5 * (h_max - h_min)
    heights = 0.5 * (h_max + h_min) + half * nodes
    z = 0.5 * b * (h_max ** 2 - h_min ** 2) + c * (h_max - h_min)
    density = np.maximum(b * heights + c, 0.0) / z

    all_nodes = np.append(heights, h_atom)
    all_weights = np.append(a * half * weights * density, 1.0 - a)
    keep = all_weights > 0.0
    rule_nodes, rule_weights = all_nodes[keep], all_weights[keep]
    rule_nodes.setflags(write=False)
    rule_weights.setflags(write=False)
    return rule_nodes, rule_weights


def height_quadrature_rule(model: HeightModel, order: int = 64) -> Tuple[np.ndarray, np.ndarray]:
    """One weighted rule for the mixture: Gauss nodes on the linear part plus the atom.

    Zero-weight parts are dropped, so a = 0 leaves a single node.
    """
    return _height_rule(model.a, model.b, model.c, model.h_min, model.h_max, model.h_atom, order)


def gain_ratio(cfg: NetworkConfig, h, r, h0, x):
    """G_l / G_0: interferer gain at (h, r) over serving gain at (h0, x)."""
    pattern = cfg.pattern
    g_l = vertical_gain(pattern, elevation_angle(h, r))
    g_0 = vertical_gain(pattern, elevation_angle(h0, x))
    return g_l / g_0


def _interference_ratio(cfg: NetworkConfig, r: np.ndarray, x: np.ndarray,
                        heights: np.ndarray) -> np.ndarray:
    """(G_l / G_0) * (d_l / d_0)^-v on an (r, x, height) grid."""
    v = cfg.path_loss.exponent_v
    r_col = r[:, None]
    h_row = heights[None, :]
    g_l = vertical_gain(cfg.pattern, elevation_angle(h_row, r_col))
    g_0 = vertical_gain(cfg.pattern, elevation_angle(cfg.h0, x))
    interferer_d2 = r_col * r_col + h_row * h_row
    serving_d2 = x * x + cfg.h0 * cfg.h0
    distance_term = np.power(interferer_d2[:, None, :] / serving_d2[None, :, None], -0.5 * v)
    return (g_l[:, None, :] / np.atleast_1d(g_0)[None, :, None]) * distance_term


def _one_minus_inner(cfg: NetworkConfig, r: np.ndarray, x: np.ndarray, n_values: np.ndarray,
                     tau_lin: float, rule: Tuple[np.ndarray, np.ndarray]) -> np.ndarray:
    """1 - F on an (r, x, n) grid, via expm1 to keep the far tail accurate."""
    heights, weights = rule
    ratio = _interference_ratio(cfg, r, x, heights)
    scale = eta(cfg.approx_order) * tau_lin * n_values
    exponent = ratio[:, :, None, :] * scale[None, None, :, None]
    return np.tensordot(-np.expm1(-exponent), weights, axes=([3], [0]))


def inner_expectation_F(cfg: NetworkConfig, h0: float, r: float, x: float, n: int, tau_lin: float,
                        height_nodes: int = 64) -> float:
    """Height-averaged Laplace factor of one interferer at horizontal distance r."""
    if not x > 0.0:
        raise DomainError("Serving distance must be positive", argument="x", value=x)
    if not 1 <= n <= cfg.approx_order:
        raise DomainError(f"n must lie in [1, {cfg.approx_order}]", argument="n", value=n)
    if r < 0.0:
        raise DomainError("Interferer distance cannot be negative", argument="r", value=r)
    local = cfg if h0 == cfg.h0 else replace(cfg, h0=h0)
    rule = height_quadrature_rule(local.height_model, height_nodes)
    one_minus = _one_minus_inner(local, np.array([float(r)]), np.array([float(x)]),
                                 np.array([float(n)]), tau_lin, rule)
    return float(1.0 - one_minus[0, 0, 0])


class _PgflIntegrator:
    """Radial PGFL exponents for every n at once, on a batch of serving distances."""

    def __init__(self, cfg: NetworkConfig, tau_lin: float, quad: QuadratureSpec):
        self.cfg = cfg
        self.tau_lin = tau_lin
        self.quad = quad
        self.rule = height_quadrature_rule(cfg.height_model, quad.height_nodes)
        self.n_values = np.arange(1, cfg.approx_order + 1, dtype=float)
        self.exclusion = cfg.resolved_exclusion_radius
        self.log_start = max(self.exclusion, _LOG_START_FRACTION * cfg.mean_cell_radius)
        self.max_error = 0.0
        self.evaluations = 0

    def exponents(self, x: np.ndarray) -> np.ndarray:
        """Array (len(x), N) of 2 pi lambda int r (1 - F) dr."""
        x = np.asarray(x, dtype=float)
        factor = 2.0 * math.pi * self.cfg.lambda_bs
        quad = self.quad

        def integrand(r: np.ndarray) -> np.ndarray:
            values = _one_minus_inner(self.cfg, r, x, self.n_values, self.tau_lin, self.rule)
            return factor * r[:, None, None] * values

        total = np.zeros((x.size, self.n_values.size))
        error = 0.0
        if self.exclusion < self.log_start:
            near = adaptive_gauss_legendre(integrand, self.exclusion, self.log_start,
                                           rel_tol=quad.rel_tol, abs_tol=quad.abs_tol,
                                           order=quad.panel_order, max_panels=quad.max_panels)
            total = total + near.value
            error += near.error
            self.evaluations += near.evaluations * x.size

        far = integrate_log_doubling(integrand, self.log_start, rel_tol=quad.rel_tol,
                                     abs_tol=quad.abs_tol, first_factor=quad.radial_trunc_factor,
                                     order=quad.panel_order, min_segments=quad.min_radial_segments,
                                     max_segments=quad.max_radial_segments,
                                     max_panels=quad.max_panels)
        total = total + far.value
        error += far.error
        self.evaluations += far.evaluations * x.size
        self.max_error = max(self.max_error, error)
        return np.maximum(total, 0.0)


def pgfl_exponent(cfg: NetworkConfig, x: float, n: int, tau_lin: float,
                  quad: Optional[QuadratureSpec] = None) -> float:
    """2 pi lambda int_{R_e}^inf r (1 - F(h0, r, x, n, tau)) dr for one (x, n)."""
    if not x > 0.0:
        raise DomainError("Serving distance must be positive", argument="x", value=x)
    if not 1 <= n <= cfg.approx_order:
        raise DomainError(f"n must lie in [1, {cfg.approx_order}]", argument="n", value=n)
    integrator = _PgflIntegrator(cfg, tau_lin, quad or QuadratureSpec())
    return float(integrator.exponents(np.array([float(x)]))[0, n - 1])


def coverage_probability(cfg: NetworkConfig, quad: Optional[QuadratureSpec] = None) -> CoverageResult:
    """Coverage probability of the typical user under the order-N gamma approximation."""
    quad = quad or QuadratureSpec()
    cfg.validate()
    n_order = cfg.approx_order
    integrator = _PgflIntegrator(cfg, cfg.tau_linear, quad)
    x_upper = nearest_bs_quantile(cfg.lambda_bs, quad.outer_trunc_mass)

    def outer_integrand(x: np.ndarray) -> np.ndarray:
        exponents = integrator.exponents(x)
        return np.exp(-exponents) * nearest_bs_pdf(cfg.lambda_bs, x)[:, None]

    try:
        outer = adaptive_gauss_legendre(outer_integrand, 0.0, x_upper, rel_tol=quad.rel_tol,
                                        abs_tol=quad.abs_tol, order=quad.panel_order,
                                        initial_panels=4, max_panels=quad.max_panels)
    except NumericalError as e:
        raise e.tagged(beta_deg=cfg.pattern.tilt_deg, sir_threshold_db=cfg.sir_threshold_db)

    total, terms = alternating_binomial_sum(list(np.atleast_1d(outer.value)), n_order)
    binomial_mass = float(2 ** n_order - 1)
    err_estimate = binomial_mass * (outer.error + integrator.max_error) + quad.outer_trunc_mass
    p_cov = min(max(total, 0.0), 1.0)

    logger.debug(
        f"Coverage tilt={cfg.pattern.tilt_deg} tau={cfg.sir_threshold_db}dB "
        f"lambda={cfg.lambda_bs:g}: p={p_cov:.6f} err={err_estimate:.2e} "
        f"evals={outer.evaluations + integrator.evaluations}")
    return CoverageResult(p_cov=p_cov, terms=terms, err_estimate=err_estimate,
                          evals=outer.evaluations + integrator.evaluations, unclamped=total)
