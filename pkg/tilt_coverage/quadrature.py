"""
Gauss-Legendre quadrature building blocks.

Integrands are vectorised: they receive a 1-D array of nodes and return an
array whose leading axis matches the nodes. Any trailing axes are integrated
component-wise, so one call can carry a whole batch of related integrals.
"""

import heapq
import itertools
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, List, Tuple

import numpy as np

from .exceptions import NumericalError

logger = logging.getLogger(__name__)

Integrand = Callable[[np.ndarray], np.ndarray]


@dataclass
class QuadratureOutcome:
    """Value, error bound and cost of one integration."""
    value: np.ndarray
    error: float
    evaluations: int
    panels: int


@lru_cache(maxsize=None)
def gauss_legendre_rule(order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the order-point rule on [-1, 1]."""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def mapped_rule(a: float, b: float, order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Rule mapped onto [a, b]."""
    nodes, weights = gauss_legendre_rule(order)
    half = 0.5 * (b - a)
    return 0.5 * (a + b) + half * nodes, half * weights


def fixed_gauss_legendre(func: Integrand, a: float, b: float, order: int) -> np.ndarray:
    nodes, weights = mapped_rule(a, b, order)
    values = np.asarray(func(nodes), dtype=float)
    return np.tensordot(weights, values, axes=(0, 0))


def compensated_sum(values: List[np.ndarray]) -> np.ndarray:
    """Component-wise fsum, so totals do not depend on accumulation order."""
    stacked = np.stack([np.asarray(v, dtype=float) for v in values])
    if stacked.ndim == 1:
        return np.asarray(math.fsum(stacked))
    flat = stacked.reshape(stacked.shape[0], -1)
    sums = np.array([math.fsum(flat[:, k]) for k in range(flat.shape[1])])
    return sums.reshape(stacked.shape[1:])


def adaptive_gauss_legendre(func: Integrand, a: float, b: float, *, rel_tol: float, abs_tol: float,
                            order: int = 15, initial_panels: int = 1,
                            max_panels: int = 1_000_000) -> QuadratureOutcome:
    """Globally adaptive composite Gauss-Legendre integration by bisection.

    Each panel is compared with the sum of its two halves; the panel with the
    largest discrepancy is bisected until the summed discrepancy meets
    max(abs_tol, rel_tol * |value|) in every component.
    """
    if b <= a:
        return QuadratureOutcome(np.asarray(0.0), 0.0, 0, 0)

    evaluations = 0

    def integrate(lo: float, hi: float) -> np.ndarray:
        nonlocal evaluations
        evaluations += order
        return fixed_gauss_legendre(func, lo, hi, order)

    def make_panel(lo: float, hi: float, whole: np.ndarray):
        mid = 0.5 * (lo + hi)
        left = integrate(lo, mid)
        right = integrate(mid, hi)
        refined = left + right
        err = float(np.max(np.abs(refined - whole)))
        return (-err, next(counter), lo, hi, left, right, refined)

    counter = itertools.count()
    heap = []
    edges = np.linspace(a, b, initial_panels + 1)
    for lo, hi in zip(edges[:-1], edges[1:]):
        heapq.heappush(heap, make_panel(lo, hi, integrate(lo, hi)))
    # running totals; the returned value is re-summed exactly from the final panels
    total = sum(panel[6] for panel in heap)
    error = math.fsum(-panel[0] for panel in heap)

    min_width = (b - a) * 1e-12
    while True:
        tolerance = max(abs_tol, rel_tol * float(np.max(np.abs(total))))
        if error <= tolerance:
            break
        if len(heap) >= max_panels:
            raise NumericalError(
                f"Adaptive quadrature on [{a:.6g}, {b:.6g}] hit the {max_panels}-panel budget",
                partial_result=total, evaluations=evaluations,
                details={"error": error, "tolerance": tolerance})

        neg_err, _, lo, hi, left, right, refined = heapq.heappop(heap)
        total = total - refined
        error += neg_err
        mid = 0.5 * (lo + hi)
        if hi - lo <= min_width:
            # unresolvable at double precision; keep the panel as is
            heapq.heappush(heap, (0.0, next(counter), lo, hi, left, right, left + right))
            total = total + refined
            continue
        for child in (make_panel(lo, mid, left), make_panel(mid, hi, right)):
            heapq.heappush(heap, child)
            total = total + child[6]
            error -= child[0]

    value = compensated_sum([panel[6] for panel in heap])
    error = math.fsum(-panel[0] for panel in heap)
    return QuadratureOutcome(value, error, evaluations, len(heap))


def integrate_log_doubling(func: Integrand, start: float, *, rel_tol: float, abs_tol: float,
                           first_factor: float = 2.0, order: int = 15, min_segments: int = 4,
                           max_segments: int = 16, max_panels: int = 1_000_000) -> QuadratureOutcome:
    """Integrate func over [start, inf) with a geometrically growing upper limit.

    The integral runs in the log-radius variable u = ln r (Jacobian r), which
    turns a power-law tail into an exponential one. Segment k covers
    [start * f^(2^k - 1), start * f^(2^(k+1) - 1)], so the log of the upper
    limit doubles each segment. Growth stops once a segment past min_segments
    contributes less than abs_tol; that last contribution is added to the
    error as the tail allowance. start must be positive.
    """
    if start <= 0.0:
        raise NumericalError("Log-radius integration needs a positive lower limit",
                             details={"start": start})

    def in_log(u: np.ndarray) -> np.ndarray:
        r = np.exp(u)
        values = np.asarray(func(r), dtype=float)
        return values * r.reshape((-1,) + (1,) * (values.ndim - 1))

    step = math.log(first_factor)
    lo = math.log(start)
    width = step
    pieces = []
    error = 0.0
    evaluations = 0
    panels = 0
    for segment in range(max_segments):
        hi = lo + width
        outcome = adaptive_gauss_legendre(in_log, lo, hi, rel_tol=rel_tol, abs_tol=abs_tol,
                                          order=order, max_panels=max(1, max_panels - panels))
        if not np.all(np.isfinite(outcome.value)):
            raise NumericalError("Radial integrand overflowed before the tail became negligible",
                                 partial_result=compensated_sum(pieces) if pieces else None,
                                 evaluations=evaluations, details={"segment": segment})
        pieces.append(outcome.value)
        error += outcome.error
        evaluations += outcome.evaluations
        panels += outcome.panels
        contribution = float(np.max(np.abs(outcome.value)))
        if segment + 1 >= min_segments and contribution < abs_tol:
            error += contribution
            return QuadratureOutcome(compensated_sum(pieces), error, evaluations, panels)
        lo = hi
        width *= 2.0

    raise NumericalError(
        f"Radial integral still contributing after {max_segments} segments",
        partial_result=compensated_sum(pieces), evaluations=evaluations,
        details={"last_upper_limit": math.exp(lo)})
