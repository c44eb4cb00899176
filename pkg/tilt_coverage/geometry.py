"""
Radio-geometry primitives.

Vertical antenna gain, elevation angles, path loss, the nearest-BS distance
law and the effective-height mixture distribution. Every function is pure;
random draws take the generator as an argument. Scalars in give floats out,
arrays in give arrays out.
"""

import logging
from typing import Tuple, Union

import numpy as np

from .exceptions import DomainError
from .models import AntennaPattern, HeightModel, PathLossModel

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

# atom location comparisons
_ATOM_TOL = 1e-9


def _out(values: np.ndarray, like) -> ArrayLike:
    return float(values) if np.ndim(like) == 0 else values


def db_to_linear(value_db: ArrayLike) -> ArrayLike:
    return _out(np.power(10.0, np.asarray(value_db, dtype=float) / 10.0), value_db)


def linear_to_db(value: ArrayLike) -> ArrayLike:
    with np.errstate(divide="ignore"):
        return _out(10.0 * np.log10(np.asarray(value, dtype=float)), value)


def vertical_gain(pattern: AntennaPattern, theta_deg: ArrayLike) -> ArrayLike:
    """Linear vertical gain of the tilted pattern towards elevation theta_deg.

    The attenuation in dB is min(12 ((theta - tilt) / theta_3dB)^2, SLL), so the
    gain is 1 at boresight and never drops below the side-lobe floor. A
    disabled pattern is omni-directional in the vertical plane.
    """
    pattern.validate()
    theta = np.asarray(theta_deg, dtype=float)
    if not pattern.enabled:
        return _out(np.ones_like(theta), theta_deg)

    offset = (theta - pattern.tilt_deg) / pattern.theta3db_deg
    attenuation_db = np.minimum(12.0 * offset * offset, pattern.sll_el_db)
    return _out(np.power(10.0, -0.1 * attenuation_db), theta_deg)


def elevation_angle(h_eff: ArrayLike, r: ArrayLike) -> ArrayLike:
    """Elevation in degrees of a point h_eff below the BS at horizontal distance r.

    r = 0 maps to 90 degrees.
    """
    h = np.asarray(h_eff, dtype=float)
    dist = np.asarray(r, dtype=float)
    if np.any(dist < 0.0):
        raise DomainError("Horizontal distance cannot be negative", argument="r")
    if np.any(h < 0.0):
        raise DomainError("Effective height cannot be negative", argument="h_eff")

    with np.errstate(divide="ignore", invalid="ignore"):
        angle = np.degrees(np.arctan2(h, dist))
    angle = np.where(dist == 0.0, 90.0, angle)
    if np.ndim(h_eff) == 0 and np.ndim(r) == 0:
        return float(angle)
    return angle


def path_loss(model: PathLossModel, d: ArrayLike) -> ArrayLike:
    """Linear attenuation C * d^-v."""
    dist = np.asarray(d, dtype=float)
    if np.any(dist <= 0.0):
        raise DomainError("Path loss is undefined for non-positive distances", argument="d",
                          value=float(np.min(dist)))
    return _out(model.scale_c * np.power(dist, -model.exponent_v), d)


def height_normalization(model: HeightModel) -> float:
    """Constant Z dividing the linear density so that it integrates to one."""
    return model.normalization


def height_pdf(model: HeightModel, h: ArrayLike) -> Tuple[ArrayLike, ArrayLike]:
    """Split the effective-height law at h into (continuous density, atom weight)."""
    model.validate()
    heights = np.asarray(h, dtype=float)
    inside = (heights >= model.h_min) & (heights <= model.h_max)
    density = np.where(inside, model.a * (model.b * heights + model.c) / model.normalization, 0.0)
    density = np.maximum(density, 0.0)
    atom = np.where(np.abs(heights - model.h_atom) <= _ATOM_TOL, 1.0 - model.a, 0.0)
    return _out(density, h), _out(atom, h)


def height_cdf(model: HeightModel, h: ArrayLike) -> ArrayLike:
    """Distribution function of the mixture, atom included at h >= h_atom."""
    heights = np.asarray(h, dtype=float)
    clipped = np.clip(heights, model.h_min, model.h_max)
    linear_cdf = (0.5 * model.b * (clipped ** 2 - model.h_min ** 2)
                  + model.c * (clipped - model.h_min)) / model.normalization
    linear_cdf = np.clip(linear_cdf, 0.0, 1.0)
    atom = np.where(heights >= model.h_atom - _ATOM_TOL, 1.0 - model.a, 0.0)
    return _out(model.a * linear_cdf + atom, h)


def height_mean(model: HeightModel) -> float:
    """Mean effective height of the mixture."""
    z = model.normalization
    linear_mean = (model.b * (model.h_max ** 3 - model.h_min ** 3) / 3.0
                   + 0.5 * model.c * (model.h_max ** 2 - model.h_min ** 2)) / z
    return model.a * linear_mean + (1.0 - model.a) * model.h_atom


def _linear_inverse_cdf(model: HeightModel, u: np.ndarray) -> np.ndarray:
    # solve b/2 t^2 + rho0 t = u Z for t = h - h_min, in the cancellation-free form
    target = u * model.normalization
    rho0 = model.b * model.h_min + model.c
    disc = np.maximum(rho0 * rho0 + 2.0 * model.b * target, 0.0)
    denom = rho0 + np.sqrt(disc)
    with np.errstate(divide="ignore", invalid="ignore"):
        offset = np.where(denom > 0.0, 2.0 * target / denom, 0.0)
    return np.clip(model.h_min + offset, model.h_min, model.h_max)


def height_sample(model: HeightModel, rng: np.random.Generator, size=None) -> ArrayLike:
    """Draw effective heights: the atom with probability 1 - a, else the linear law by inverse CDF."""
    shape = () if size is None else size
    on_atom = rng.random(shape) >= model.a
    u = rng.random(shape)
    heights = np.where(on_atom, model.h_atom, _linear_inverse_cdf(model, u))
    return float(heights) if size is None else heights


def mean_cell_radius(lambda_bs: float) -> float:
    return float(np.sqrt(1.0 / (np.pi * lambda_bs)))


def nearest_bs_pdf(lambda_bs: float, x: ArrayLike) -> ArrayLike:
    """Density 2 pi lambda x exp(-pi lambda x^2) of the distance to the nearest BS."""
    if lambda_bs <= 0.0:
        raise DomainError("BS density must be positive", argument="lambda_bs", value=lambda_bs)
    dist = np.asarray(x, dtype=float)
    if np.any(dist < 0.0):
        raise DomainError("Distance cannot be negative", argument="x")
    return _out(2.0 * np.pi * lambda_bs * dist * np.exp(-np.pi * lambda_bs * dist * dist), x)


def nearest_bs_cdf(lambda_bs: float, x: ArrayLike) -> ArrayLike:
    dist = np.asarray(x, dtype=float)
    return _out(-np.expm1(-np.pi * lambda_bs * np.maximum(dist, 0.0) ** 2), x)


def nearest_bs_sample(lambda_bs: float, rng: np.random.Generator, size=None) -> ArrayLike:
    """Serving distance by inverse CDF: sqrt(-ln(U) / (pi lambda))."""
    u = rng.random(() if size is None else size)
    # 1 - U avoids log(0)
    draws = np.sqrt(-np.log1p(-u) / (np.pi * lambda_bs))
    return float(draws) if size is None else draws


def nearest_bs_quantile(lambda_bs: float, tail_mass: float) -> float:
    """Distance beyond which the nearest-BS law leaves exactly tail_mass."""
    return float(np.sqrt(-np.log(tail_mass) / (np.pi * lambda_bs)))
