"""
Coverage-maximising tilt search.

A full grid sweep over [0, 90] degrees locates the best grid tilt; an
optional golden-section search then refines it inside the bracket formed by
the neighbouring grid points. Comparisons use (p_cov, -beta), so equal
coverage always resolves to the smaller tilt.
"""

import logging
import math
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .evaluation import evaluate_point
from .exceptions import NumericalError, ValidationError
from .models import McCampaign, NetworkConfig, QuadratureSpec, TiltProfile, TiltSearchSpec

logger = logging.getLogger(__name__)

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
INV_PHI_SQ = (3.0 - math.sqrt(5.0)) / 2.0


def tilt_grid(step_deg: float) -> List[float]:
    """0, step, 2 step, ... up to 90 degrees."""
    grid = np.arange(0.0, 90.0 + 0.5 * step_deg, step_deg)
    grid = grid[grid <= 90.0 + 1e-9]
    return [min(float(round(v, 10)), 90.0) for v in grid]


def _better(candidate: Tuple[float, float], incumbent: Tuple[float, float]) -> bool:
    """True when (beta, p) beats the incumbent on (p, -beta)."""
    return (candidate[1], -candidate[0]) > (incumbent[1], -incumbent[0])


def _coverage_at(cfg: NetworkConfig, spec: TiltSearchSpec, quad: Optional[QuadratureSpec],
                 campaign: Optional[McCampaign]) -> Callable[[float], float]:
    def objective(beta: float) -> float:
        try:
            return evaluate_point(cfg.with_tilt(beta), spec.evaluator, quad, campaign).p_cov
        except NumericalError as e:
            raise e.tagged(beta_deg=beta)
    return objective


def golden_section_maximize(objective: Callable[[float], float], lo: float, hi: float,
                            tol: float) -> Tuple[float, float]:
    """Golden-section search for a maximum of objective on [lo, hi].

    Returns the best point evaluated, not the bracket midpoint.
    """
    dist = hi - lo
    if dist <= tol:
        mid = 0.5 * (lo + hi)
        return mid, objective(mid)

    iterations = int(math.ceil(math.log(tol / dist) / math.log(INV_PHI)))
    c = lo + INV_PHI_SQ * dist
    d = lo + INV_PHI * dist
    yc, yd = objective(c), objective(d)
    best = max([(c, yc), (d, yd)], key=lambda p: (p[1], -p[0]))

    for _ in range(max(iterations - 1, 0)):
        if yc >= yd:
            hi, d, yd = d, c, yc
            dist = INV_PHI * dist
            c = lo + INV_PHI_SQ * dist
            yc = objective(c)
            if _better((c, yc), best):
                best = (c, yc)
        else:
            lo, c, yc = c, d, yd
            dist = INV_PHI * dist
            d = lo + INV_PHI * dist
            yd = objective(d)
            if _better((d, yd), best):
                best = (d, yd)
    return best


def sweep_tilt(cfg: NetworkConfig, spec: TiltSearchSpec, quad: Optional[QuadratureSpec] = None,
               campaign: Optional[McCampaign] = None,
               betas: Optional[Sequence[float]] = None) -> TiltProfile:
    """Coverage at every grid tilt, everything else held fixed."""
    spec.validate()
    grid = sorted(float(b) for b in (betas if betas is not None else tilt_grid(spec.grid_step_deg)))
    if not grid:
        raise ValidationError("Tilt grid cannot be empty", field="betas")
    if any(not 0.0 <= b <= 90.0 for b in grid):
        raise ValidationError("Tilt grid values must lie in [0, 90]", field="betas")

    objective = _coverage_at(cfg, spec, quad, campaign)
    values = [objective(beta) for beta in grid]
    best = max(range(len(grid)), key=lambda i: (values[i], -grid[i]))
    logger.debug(f"Tilt sweep over {len(grid)} points: beta*={grid[best]} p*={values[best]:.6f}")
    return TiltProfile(betas_deg=grid, p_cov=values, beta_star_deg=grid[best], p_star=values[best])


def optimize_tilt(cfg: NetworkConfig, spec: TiltSearchSpec, quad: Optional[QuadratureSpec] = None,
                  campaign: Optional[McCampaign] = None,
                  betas: Optional[Sequence[float]] = None) -> Tuple[float, float]:
    """(beta*, p*) from the grid argmax, refined by golden section when spec.refine is set.

    Refinement only ever replaces the grid optimum by a strictly better point.
    """
    profile = sweep_tilt(cfg, spec, quad, campaign, betas)
    beta_star, p_star = profile.beta_star_deg, profile.p_star
    grid = profile.betas_deg
    if not spec.refine or len(grid) == 1:
        return beta_star, p_star

    k = grid.index(beta_star)
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
    if hi - lo <= spec.refine_tol_deg:
        return beta_star, p_star

    beta_ref, p_ref = golden_section_maximize(_coverage_at(cfg, spec, quad, campaign), lo, hi,
                                              spec.refine_tol_deg)
    if p_ref > p_star:
        logger.debug(f"Refined tilt {beta_star} -> {beta_ref:.4f} (p {p_star:.6f} -> {p_ref:.6f})")
        return beta_ref, p_ref
    return beta_star, p_star


def optimize_over_thresholds(cfg: NetworkConfig, spec: TiltSearchSpec, tau_grid_db: Sequence[float],
                             quad: Optional[QuadratureSpec] = None,
                             campaign: Optional[McCampaign] = None) -> List[Tuple[float, float, float]]:
    """(tau_db, beta*, p*) for every threshold, each with its own optimal tilt."""
    if len(tau_grid_db) == 0:
        raise ValidationError("Threshold grid cannot be empty", field="tau_grid_db")
    optima = []
    for tau_db in tau_grid_db:
        try:
            beta_star, p_star = optimize_tilt(cfg.with_threshold(tau_db), spec, quad, campaign)
        except NumericalError as e:
            raise e.tagged(sir_threshold_db=tau_db)
        optima.append((float(tau_db), beta_star, p_star))
    return optima
