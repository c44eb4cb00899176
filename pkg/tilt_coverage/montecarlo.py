"""
Monte Carlo oracle for the coverage probability.

Each trial draws the serving distance from the nearest-BS law, a Poisson
number of pilot-contaminating interferers uniformly in the annulus
[R_e, W] around the serving BS, and an effective height per interferer.
Only distances enter the SIR, so interferer azimuths are never drawn.
Interferers beyond W are represented by their mean power, added to every
trial that has at least one interferer inside the window.

Trials are simulated in fixed-size blocks. Block k draws from a Philox
stream keyed by SeedSequence(seed, spawn_key=(k,)), so the estimate does not
depend on how blocks are spread over workers.
"""

import logging
import math
import time
from functools import partial
from typing import List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from .analytic import height_quadrature_rule
from .exceptions import DomainError, ValidationError
from .geometry import (
    db_to_linear,
    elevation_angle,
    height_sample,
    linear_to_db,
    nearest_bs_sample,
    path_loss,
    vertical_gain,
)
from .models import McCampaign, McEstimate, NetworkConfig, QuadratureSpec
from .quadrature import integrate_log_doubling

logger = logging.getLogger(__name__)

# SIR of a trial without interferers; exceeds every finite threshold
NO_INTERFERENCE_SIR = math.inf

_Z_95 = 1.96


def block_generator(seed: int, block: int) -> np.random.Generator:
    """Counter-based generator for one trial block."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(block,))))


def _received_power(cfg: NetworkConfig, horizontal: np.ndarray, heights) -> np.ndarray:
    gain = vertical_gain(cfg.pattern, elevation_angle(heights, horizontal))
    distance = np.sqrt(horizontal * horizontal + np.square(heights))
    return gain * path_loss(cfg.path_loss, distance)


def link_sir(cfg: NetworkConfig, x: float, radii: Sequence[float], heights: Sequence[float]) -> float:
    """Asymptotic SIR of one geometry: serving link at (h0, x), interferers at (heights, radii)."""
    radii = np.asarray(radii, dtype=float)
    heights = np.asarray(heights, dtype=float)
    if radii.shape != heights.shape:
        raise DomainError("Interferer radii and heights must have the same shape", argument="heights")
    if radii.size == 0:
        return NO_INTERFERENCE_SIR

    signal = float(_received_power(cfg, np.asarray([float(x)]), cfg.h0)[0])
    interference = math.fsum(_received_power(cfg, radii, heights))
    if interference <= 0.0:
        return NO_INTERFERENCE_SIR
    return signal / interference


def interference_tail(cfg: NetworkConfig, window_radius: float,
                      quad: Optional[QuadratureSpec] = None) -> float:
    """Mean interference power of the interferers beyond window_radius.

    Campbell's formula: 2 pi lambda int_W^inf r E_h[G C (r^2 + h^2)^(-v/2)] dr,
    integrated in s = r / W so the quadrature sees an O(1) integrand.
    """
    quad = quad or QuadratureSpec()
    heights, weights = height_quadrature_rule(cfg.height_model, quad.height_nodes)
    v = cfg.path_loss.exponent_v

    def scaled(s: np.ndarray) -> np.ndarray:
        radii = window_radius * s[:, None]
        gain = vertical_gain(cfg.pattern, elevation_angle(heights[None, :], radii))
        spread = np.power(s[:, None] ** 2 + (heights[None, :] / window_radius) ** 2, -0.5 * v)
        return s * ((gain * spread) @ weights)

    outcome = integrate_log_doubling(scaled, 1.0, rel_tol=quad.rel_tol, abs_tol=quad.abs_tol,
                                     first_factor=quad.radial_trunc_factor, order=quad.panel_order,
                                     min_segments=quad.min_radial_segments,
                                     max_segments=quad.max_radial_segments,
                                     max_panels=quad.max_panels)
    scale = 2.0 * math.pi * cfg.lambda_bs * cfg.path_loss.scale_c * window_radius ** (2.0 - v)
    return scale * float(outcome.value)


def realize_sir_block(cfg: NetworkConfig, rng: np.random.Generator, window_radius: float,
                      size: int, tail: float = 0.0) -> Tuple[np.ndarray, np.ndarray]:
    """SIR of `size` independent trials plus the interferer count of each.

    Draw order per block: serving distances, counts, interferer radii,
    interferer heights. `tail` is added to the interference of trials with
    at least one interferer; trials without any keep the no-interference SIR.
    """
    exclusion = cfg.resolved_exclusion_radius
    if not window_radius > exclusion:
        raise DomainError(f"Window radius must exceed the exclusion radius {exclusion:.3f} m",
                          argument="window_radius", value=window_radius)
    if tail < 0.0:
        raise DomainError("Tail interference cannot be negative", argument="tail", value=tail)

    serving = nearest_bs_sample(cfg.lambda_bs, rng, size)
    annulus = window_radius * window_radius - exclusion * exclusion
    counts = rng.poisson(cfg.lambda_bs * math.pi * annulus, size)
    total = int(counts.sum())
    radii = np.sqrt(exclusion * exclusion + rng.random(total) * annulus)
    heights = height_sample(cfg.height_model, rng, total)

    owner = np.repeat(np.arange(size), counts)
    interference = np.bincount(owner, weights=_received_power(cfg, radii, heights), minlength=size)
    interference = np.where(counts > 0, interference + tail, 0.0)
    signal = _received_power(cfg, serving, cfg.h0)
    with np.errstate(divide="ignore"):
        sir = np.where(interference > 0.0, signal / interference, NO_INTERFERENCE_SIR)
    return sir, counts


def realize_sir(cfg: NetworkConfig, rng: np.random.Generator, window_radius: float) -> float:
    """One trial's linear SIR."""
    sir, _ = realize_sir_block(cfg, rng, window_radius, 1)
    return float(sir[0])


def simulate_block(cfg: NetworkConfig, campaign: McCampaign, window_radius: float,
                   block: int, tail: float = 0.0) -> Tuple[np.ndarray, int]:
    """Trials of one block; returns (linear SIR samples, total interferer count)."""
    size = min(campaign.block_size, campaign.trials - block * campaign.block_size)
    sir, counts = realize_sir_block(cfg, block_generator(campaign.seed, block), window_radius, size,
                                    tail=tail)
    return sir, int(counts.sum())


def confidence_halfwidth(p_hat: float, trials: int) -> float:
    """Normal-approximation 95% half-width."""
    return _Z_95 * math.sqrt(p_hat * (1.0 - p_hat) / trials)


def estimate_coverage(cfg: NetworkConfig, campaign: McCampaign, tau_grid_db: Sequence[float],
                      pool=None, show_progress: bool = False) -> List[McEstimate]:
    """Empirical coverage at every threshold from one shared set of trials."""
    if len(tau_grid_db) == 0:
        raise ValidationError("Threshold grid cannot be empty", field="tau_grid_db")
    campaign.validate()
    window = campaign.resolved_window_radius(cfg)
    start = time.time()
    tail = interference_tail(cfg, window) if campaign.tail_correction else 0.0

    tasks = [partial(simulate_block, cfg, campaign, window, block, tail)
             for block in range(campaign.block_count)]
    if pool is not None:
        outcomes = pool.run(tasks, description="MC blocks")
        for outcome in outcomes:
            if isinstance(outcome, Exception):
                raise outcome
    else:
        outcomes = [task() for task in tqdm(tasks, desc="MC blocks", unit="block",
                                            disable=not show_progress, leave=False)]

    sir = np.concatenate([samples for samples, _ in outcomes])
    interferers = sum(count for _, count in outcomes)
    mean_interferers = interferers / campaign.trials
    samples_db = [float(v) for v in linear_to_db(sir)] if campaign.record_sir else None

    estimates = []
    for tau_db in tau_grid_db:
        covered = int(np.count_nonzero(sir > db_to_linear(float(tau_db))))
        p_hat = covered / campaign.trials
        estimates.append(McEstimate(
            tau_db=float(tau_db),
            p_cov_hat=p_hat,
            ci_halfwidth_95=confidence_halfwidth(p_hat, campaign.trials),
            trials=campaign.trials,
            sir_samples_db=samples_db,
            mean_interferers=mean_interferers,
        ))

    logger.debug(f"MC campaign seed={campaign.seed} trials={campaign.trials} "
                 f"tilt={cfg.pattern.tilt_deg} tail={tail:.3e}: {len(tau_grid_db)} thresholds, "
                 f"{mean_interferers:.2f} interferers/trial in {time.time() - start:.2f}s")
    return estimates


def estimate_point(cfg: NetworkConfig, campaign: McCampaign,
                   pool=None, show_progress: bool = False) -> McEstimate:
    """Empirical coverage at cfg's own threshold."""
    return estimate_coverage(cfg, campaign, [cfg.sir_threshold_db], pool=pool,
                             show_progress=show_progress)[0]
