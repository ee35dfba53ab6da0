"""Outdoor-to-indoor path loss models and link budget conversions.

Two loss models are implemented, selected by carrier band:

* low SHF (450 MHz - 6 GHz): free space + penetration that grows with
  the incident elevation angle as ``g2 + g3*(1 - cos(theta))**2`` plus a
  linear indoor term.
* high SHF (above 6 GHz): free space + a logistic penetration curve in
  the incident angle (degrees) plus a linear indoor term.

All losses are in dB, distances in meters, frequencies in GHz and the
incident angle ``theta`` in degrees measured from the horizontal
(``sin(theta) = |dz| / d_out``).  Every function here is a pure function
of its arguments and safe to call from multiple threads.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:  # only for annotations; no runtime dependency on scenario
    from .scenario import Building

__all__ = [
    "Band",
    "LowShfConstants",
    "HighShfConstants",
    "RadioParams",
    "LinkGeometry",
    "PathLossBreakdown",
    "LinkBudget",
    "GeometryError",
    "link_geometry",
    "path_loss",
    "path_loss_low_shf",
    "path_loss_high_shf",
    "penetration_loss_high_shf",
    "min_transmit_power_dbm",
    "required_power_watts",
    "rate_power_watts",
    "dbm_to_watts",
]

LN10 = math.log(10.0)


class GeometryError(ValueError):
    """Raised when a UAV/user configuration violates the link geometry."""


class Band(Enum):
    LOW_SHF = "low"
    HIGH_SHF = "high"


@dataclass(frozen=True)
class LowShfConstants:
    """Coefficients of the low-SHF outdoor-to-indoor model."""

    w: float = 20.0
    g1: float = 32.4
    g2: float = 14.0
    g3: float = 15.0
    g4: float = 0.5


@dataclass(frozen=True)
class HighShfConstants:
    """Coefficients of the high-SHF outdoor-to-indoor model."""

    alpha1: float = 31.4
    alpha2: float = 20.0
    alpha3: float = 21.5
    beta1: float = 6.8
    beta2: float = 21.8
    beta3: float = 0.453
    beta4: float = 19.7  # sigmoid midpoint, degrees
    gamma1: float = 0.49


@dataclass(frozen=True)
class RadioParams:
    """Carrier frequency, band selection and model constants.

    Frequencies outside the nominal range of the selected band are
    accepted with a warning; the caller may deliberately extrapolate.
    """

    frequency_ghz: float
    band: Band
    low_shf: LowShfConstants = field(default_factory=LowShfConstants)
    high_shf: HighShfConstants = field(default_factory=HighShfConstants)

    def __post_init__(self) -> None:
        if not self.frequency_ghz > 0:
            raise ValueError(f"carrier frequency must be positive, got {self.frequency_ghz}")
        if self.band is Band.LOW_SHF and not 0.45 <= self.frequency_ghz <= 6.0:
            warnings.warn(
                f"low-SHF model is specified for 0.45-6 GHz, got {self.frequency_ghz} GHz",
                stacklevel=2,
            )
        if self.band is Band.HIGH_SHF and self.frequency_ghz <= 6.0:
            warnings.warn(
                f"high-SHF model is specified above 6 GHz, got {self.frequency_ghz} GHz",
                stacklevel=2,
            )


@dataclass(frozen=True)
class LinkGeometry:
    """Geometry of one UAV-to-indoor-user link.

    d_out_m:   3D distance from the UAV to the user, meters.
    theta_deg: incident elevation angle, degrees in [0, 90].
    d_in_m:    perpendicular distance from the UAV-facing wall to the
               user, meters.
    """

    d_out_m: float
    theta_deg: float
    d_in_m: float

    def __post_init__(self) -> None:
        if not self.d_out_m > 0:
            raise GeometryError(f"d_out must be positive, got {self.d_out_m}")
        if self.d_in_m < 0:
            raise GeometryError(f"d_in must be non-negative, got {self.d_in_m}")
        if not 0.0 <= self.theta_deg <= 90.0:
            raise GeometryError(f"theta must lie in [0, 90] degrees, got {self.theta_deg}")


@dataclass(frozen=True)
class PathLossBreakdown:
    """Free-space, penetration and indoor loss components, in dB."""

    free_space_db: float
    penetration_db: float
    indoor_db: float

    @property
    def total_db(self) -> float:
        return self.free_space_db + self.penetration_db + self.indoor_db


@dataclass(frozen=True)
class LinkBudget:
    """Receiver-side quantities that turn a path loss into a power.

    noise_dbm:        noise power N, dBm.
    snr_threshold_db: SNR threshold gamma_th, dB.
    bandwidth_hz:     shared downlink bandwidth B.
    rate_bps:         per-user rate requirement v.
    user_count:       number of users M sharing the bandwidth.
    """

    noise_dbm: float
    snr_threshold_db: float = 0.0
    bandwidth_hz: float = 50e6
    rate_bps: float = 0.0
    user_count: int = 1

    def __post_init__(self) -> None:
        if not self.bandwidth_hz > 0:
            raise ValueError("bandwidth must be positive")
        if self.rate_bps < 0:
            raise ValueError("rate requirement must be non-negative")
        if self.user_count < 1:
            raise ValueError("user count must be at least 1")

    @property
    def rate_exponent(self) -> float:
        """Exponent v*M/B of the rate-to-power conversion."""
        return self.rate_bps * self.user_count / self.bandwidth_hz


def link_geometry(uav: tuple, user: tuple, building: "Building") -> LinkGeometry:
    """Compute the (d_out, theta, d_in) triple for a UAV-user link.

    The UAV must sit on or beyond the building wall at ``x = x_b``; the
    user must lie strictly inside the building prism.
    """
    ux, uy, uz = (float(v) for v in uav)
    px, py, pz = (float(v) for v in user)
    if not building.contains((px, py, pz)):
        raise GeometryError(f"user {user} lies outside the building prism")
    if ux < building.x_b:
        raise GeometryError(
            f"UAV x={ux} is behind the building wall x_b={building.x_b}"
        )
    d_out = math.dist((ux, uy, uz), (px, py, pz))
    if d_out == 0.0:
        raise GeometryError("UAV and user positions coincide")
    sin_theta = min(abs(uz - pz) / d_out, 1.0)
    theta = math.degrees(math.asin(sin_theta))
    return LinkGeometry(d_out_m=d_out, theta_deg=theta, d_in_m=building.x_b - px)


def low_shf_components(d_out, theta_deg, d_in, c: LowShfConstants, frequency_ghz: float):
    """Vectorized low-SHF loss components; accepts scalars or arrays."""
    d_out = np.asarray(d_out, dtype=float)
    theta = np.radians(np.asarray(theta_deg, dtype=float))
    free_space = c.w * np.log10(d_out) + c.w * math.log10(frequency_ghz) + c.g1
    penetration = c.g2 + c.g3 * (1.0 - np.cos(theta)) ** 2
    indoor = c.g4 * np.asarray(d_in, dtype=float)
    return free_space, penetration, indoor


def high_shf_components(d_out, theta_deg, d_in, c: HighShfConstants, frequency_ghz: float):
    """Vectorized high-SHF loss components; theta enters the sigmoid in degrees."""
    d_out = np.asarray(d_out, dtype=float)
    theta = np.asarray(theta_deg, dtype=float)
    free_space = c.alpha1 + c.alpha2 * np.log10(d_out) + c.alpha3 * math.log10(frequency_ghz)
    penetration = c.beta1 + (c.beta2 - c.beta1) / (1.0 + np.exp(-c.beta3 * (theta - c.beta4)))
    indoor = c.gamma1 * np.asarray(d_in, dtype=float)
    return free_space, penetration, indoor


def path_loss_low_shf(geom: LinkGeometry, params: RadioParams) -> PathLossBreakdown:
    """Low-SHF outdoor-to-indoor path loss for one link."""
    if params.band is not Band.LOW_SHF:
        raise ValueError(f"low-SHF model called with band {params.band}")
    lf, lb, li = low_shf_components(
        geom.d_out_m, geom.theta_deg, geom.d_in_m, params.low_shf, params.frequency_ghz
    )
    return PathLossBreakdown(float(lf), float(lb), float(li))


def path_loss_high_shf(geom: LinkGeometry, params: RadioParams) -> PathLossBreakdown:
    """High-SHF outdoor-to-indoor path loss for one link."""
    if params.band is not Band.HIGH_SHF:
        raise ValueError(f"high-SHF model called with band {params.band}")
    lf, lb, li = high_shf_components(
        geom.d_out_m, geom.theta_deg, geom.d_in_m, params.high_shf, params.frequency_ghz
    )
    return PathLossBreakdown(float(lf), float(lb), float(li))


def path_loss(geom: LinkGeometry, params: RadioParams) -> PathLossBreakdown:
    """Band-dispatching path loss."""
    if params.band is Band.LOW_SHF:
        return path_loss_low_shf(geom, params)
    return path_loss_high_shf(geom, params)


def penetration_loss_high_shf(theta_deg: float, constants: HighShfConstants = HighShfConstants()) -> float:
    """High-SHF building penetration loss at an incident angle, dB."""
    if not 0.0 <= theta_deg <= 90.0:
        raise ValueError(f"theta must lie in [0, 90] degrees, got {theta_deg}")
    c = constants
    return c.beta1 + (c.beta2 - c.beta1) / (1.0 + math.exp(-c.beta3 * (theta_deg - c.beta4)))


def min_transmit_power_dbm(loss_db: float, budget: LinkBudget) -> float:
    """Minimum transmit power (dBm) to reach the SNR threshold through a loss."""
    return budget.noise_dbm + budget.snr_threshold_db + loss_db


def dbm_to_watts(power_dbm: float) -> float:
    return 10.0 ** ((power_dbm - 30.0) / 10.0)


def rate_power_watts(loss_db: float, rate_exponent: float, noise_watts: float) -> float:
    """Power (W) to sustain a rate through a loss: ``(2**e - 1) * N * 10**(L/10)``.

    ``rate_exponent`` is v*M/B; ``noise_watts`` is the noise power in
    linear units.  Exponents beyond 1024 overflow a double and are
    rejected.
    """
    if rate_exponent > 1024.0:
        raise ValueError(f"rate exponent {rate_exponent} too large (overflow)")
    return (2.0 ** rate_exponent - 1.0) * noise_watts * 10.0 ** (loss_db / 10.0)


def required_power_watts(loss_db: float, budget: LinkBudget) -> float:
    """Transmit power (W) required to serve one user at the budget's rate."""
    return rate_power_watts(loss_db, budget.rate_exponent, dbm_to_watts(budget.noise_dbm))
