"""
Single entry point for evaluating coverage at one operating point.
"""

import logging
from dataclasses import dataclass
from typing import Optional

from .analytic import coverage_probability
from .models import Evaluator, McCampaign, NetworkConfig, QuadratureSpec
from .montecarlo import estimate_point

logger = logging.getLogger(__name__)


@dataclass
class PointEvaluation:
    """Coverage at one operating point, with the diagnostic its evaluator provides."""
    p_cov: float
    ci_halfwidth: Optional[float] = None
    err_estimate: Optional[float] = None
    seed: Optional[int] = None


def evaluate_point(cfg: NetworkConfig, evaluator: Evaluator, quad: Optional[QuadratureSpec] = None,
                   campaign: Optional[McCampaign] = None) -> PointEvaluation:
    """Coverage of cfg by the analytic integral or by Monte Carlo.

    Monte Carlo reuses the campaign seed at every call, so comparisons across
    tilts share their random numbers.
    """
    evaluator = Evaluator(evaluator)
    if evaluator is Evaluator.ANALYTIC:
        result = coverage_probability(cfg, quad)
        return PointEvaluation(p_cov=result.p_cov, err_estimate=result.err_estimate)

    campaign = campaign or McCampaign()
    estimate = estimate_point(cfg, campaign)
    return PointEvaluation(p_cov=estimate.p_cov_hat, ci_halfwidth=estimate.ci_halfwidth_95,
                           seed=campaign.seed)
