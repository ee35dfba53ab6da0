"""Single-UAV placement: worst-corner closed form, symmetric-roster
gradient descent and full-3D particle swarm search.

The closed-form gradients here are the exact partial derivatives of the
roster objective built from the loss models in :mod:`.propagation`; the
high-SHF forms therefore carry a degrees-per-radian factor on the
arcsine chain rule because the penetration sigmoid consumes degrees.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .optimize import (
    GdConfig,
    OptimizationTrace,
    PsoConfig,
    TernaryConfig,
    gradient_descent_1d,
    pso,
    ternary_search,
)
from .propagation import (
    Band,
    GeometryError,
    HighShfConstants,
    LinkBudget,
    LinkGeometry,
    LowShfConstants,
    RadioParams,
    high_shf_components,
    low_shf_components,
    min_transmit_power_dbm,
)
from .scenario import (
    Bounds3,
    Building,
    IndoorUser,
    UavPlacement,
    make_total_loss,
    positions_array,
)

__all__ = [
    "WorstCaseResult",
    "GradientVector",
    "SymmetryError",
    "worst_case_angle_low_shf",
    "worst_case_standoff",
    "worst_case_low_shf",
    "worst_case_power_curve",
    "worst_case_angle_high_shf",
    "corner_loss_db",
    "corner_loss_at_angle_db",
    "grad_total_low_shf",
    "grad_total_high_shf",
    "grad_total",
    "place_center_line",
    "place_symmetric",
    "place_pso",
    "validate_symmetric",
]

LN10 = math.log(10.0)
DEG_PER_RAD = 180.0 / math.pi

# Default horizontal search span beyond the building wall, meters.
DEFAULT_X_SPAN = 1000.0


class SymmetryError(ValueError):
    """Raised when a roster fails the mirror-closure check."""


@dataclass(frozen=True)
class WorstCaseResult:
    optimal_angle_deg: float
    standoff_m: float
    uav_position: tuple[float, float, float]
    min_transmit_power_dbm: float


@dataclass(frozen=True)
class GradientVector:
    d_dx: float
    d_dy: float
    d_dz: float

    def as_array(self) -> np.ndarray:
        return np.array([self.d_dx, self.d_dy, self.d_dz])


def _cubic(c: float, constants: LowShfConstants) -> float:
    g3, w = constants.g3, constants.w
    return 2 * g3 * c**3 - 2 * g3 * c**2 - (w / LN10 + 2 * g3) * c + 2 * g3


def worst_case_angle_low_shf(constants: LowShfConstants = LowShfConstants()) -> float:
    """Incident angle (degrees) minimizing the worst-corner loss, low SHF.

    Solves ``2 g3 c^3 - 2 g3 c^2 - (w/ln10 + 2 g3) c + 2 g3 = 0`` for
    ``c = cos(theta)`` in (0, 1) by bisection to 1e-10.
    """
    if not (constants.g3 > 0 and constants.w > 0):
        raise ValueError("cubic requires positive w and g3")
    lo, hi = 1e-12, 1.0 - 1e-12
    f_lo = _cubic(lo, constants)
    if f_lo * _cubic(hi, constants) > 0:
        raise ValueError("no cubic root in (0, 1) for these constants")
    while hi - lo > 1e-10:
        mid = 0.5 * (lo + hi)
        if f_lo * _cubic(mid, constants) <= 0:
            hi = mid
        else:
            lo = mid
            f_lo = _cubic(lo, constants)
    return math.degrees(math.acos(0.5 * (lo + hi)))


def worst_case_standoff(building: Building, angle_deg: float) -> float:
    """Horizontal wall distance realizing an incident angle at the worst corner.

    ``sqrt((0.5 z_b / tan(angle))^2 - (0.5 y_b)^2) - x_b``; raises when
    the building is too wide (or too short) for the angle.
    """
    reach = 0.5 * building.z_b / math.tan(math.radians(angle_deg))
    half_width = 0.5 * building.y_b
    if reach * reach <= half_width * half_width:
        raise GeometryError(
            f"angle {angle_deg} deg unreachable: half-height reach {reach:.3f} m "
            f"does not clear the half-width {half_width:.3f} m"
        )
    return math.sqrt(reach * reach - half_width * half_width) - building.x_b


def _corner_geometry(building: Building, x_uav: float) -> LinkGeometry:
    # Worst corner (0, 0, 0) seen from (x, y_b/2, z_b/2): maximal d_out,
    # theta and d_in by symmetry of the four far corners.
    dz = 0.5 * building.z_b
    d_out = math.sqrt(x_uav**2 + (0.5 * building.y_b) ** 2 + dz**2)
    theta = math.degrees(math.asin(min(dz / d_out, 1.0)))
    return LinkGeometry(d_out_m=d_out, theta_deg=theta, d_in_m=building.x_b)


def corner_loss_db(building: Building, params: RadioParams, x_uav: float) -> float:
    """Path loss to the worst corner from (x, 0.5 y_b, 0.5 z_b)."""
    geom = _corner_geometry(building, x_uav)
    if params.band is Band.LOW_SHF:
        comps = low_shf_components(
            geom.d_out_m, geom.theta_deg, geom.d_in_m, params.low_shf, params.frequency_ghz
        )
    else:
        comps = high_shf_components(
            geom.d_out_m, geom.theta_deg, geom.d_in_m, params.high_shf, params.frequency_ghz
        )
    return float(sum(comps))


def corner_loss_at_angle_db(building: Building, params: RadioParams, theta_deg: float) -> float:
    """Worst-corner loss parameterized by the incident angle.

    The altitude difference is pinned at 0.5 z_b, so ``d_out`` becomes
    ``0.5 z_b / sin(theta)`` and the indoor depth is the full wall
    distance x_b.
    """
    dz = 0.5 * building.z_b
    d_out = dz / math.sin(math.radians(theta_deg))
    if params.band is Band.LOW_SHF:
        comps = low_shf_components(d_out, theta_deg, building.x_b, params.low_shf, params.frequency_ghz)
    else:
        comps = high_shf_components(d_out, theta_deg, building.x_b, params.high_shf, params.frequency_ghz)
    return float(sum(comps))


def worst_case_low_shf(
    building: Building, params: RadioParams, budget: LinkBudget
) -> WorstCaseResult:
    """Closed-form worst-corner design: optimal angle, standoff and power."""
    angle = worst_case_angle_low_shf(params.low_shf)
    standoff = worst_case_standoff(building, angle)
    x_uav = building.x_b + standoff
    position = (x_uav, 0.5 * building.y_b, 0.5 * building.z_b)
    power = min_transmit_power_dbm(corner_loss_db(building, params, x_uav), budget)
    return WorstCaseResult(angle, standoff, position, power)


def worst_case_power_curve(
    building: Building,
    params: RadioParams,
    budget: LinkBudget,
    x_samples: Sequence[float],
) -> list[tuple[float, float]]:
    """Minimum transmit power (dBm) to cover the worst corner per UAV x."""
    curve = []
    for x in x_samples:
        if x < building.x_b:
            raise GeometryError(f"sample x={x} is behind the building wall x_b={building.x_b}")
        curve.append((float(x), min_transmit_power_dbm(corner_loss_db(building, params, float(x)), budget)))
    return curve


def worst_case_angle_high_shf(
    building: Building, params: RadioParams, cfg: TernaryConfig
) -> float:
    """Efficient incident angle for the high-SHF worst corner via ternary search.

    The caller chooses the search interval; the worst-corner loss is
    unimodal on intervals that stop before the free-space decrease
    toward grazing-vertical geometry takes over (up to roughly 45 deg).
    """
    if not (0.0 < cfg.lo and cfg.hi < 90.0):
        raise ValueError("search interval must lie strictly inside (0, 90) degrees")
    return ternary_search(lambda t: corner_loss_at_angle_db(building, params, t), cfg)


def _deltas(uav, positions: np.ndarray):
    ux, uy, uz = (float(v) for v in uav)
    dx = ux - positions[:, 0]
    dy = uy - positions[:, 1]
    dz = uz - positions[:, 2]
    d2 = dx * dx + dy * dy + dz * dz
    if np.any(d2 == 0.0):
        raise GeometryError("UAV coincides with a user position")
    r = np.sqrt(dx * dx + dy * dy)
    if np.any(r == 0.0):
        raise GeometryError("vertical link: zero horizontal distance makes the angle derivative singular")
    return dx, dy, dz, d2, np.sqrt(d2), r


def _grad_low(uav, positions: np.ndarray, c: LowShfConstants) -> GradientVector:
    dx, dy, dz, d2, d, r = _deltas(uav, positions)
    free = c.w / LN10 / d2
    pen = 2.0 * c.g3 * (1.0 - r / d) / (d2 * d)
    gx = float(np.sum(dx * (free - pen * dz * dz / r)))
    gy = float(np.sum(dy * (free - pen * dz * dz / r)))
    gz = float(np.sum(dz * (free + pen * r)))
    return GradientVector(gx, gy, gz)


def _grad_high(uav, positions: np.ndarray, c: HighShfConstants) -> GradientVector:
    dx, dy, dz, d2, d, r = _deltas(uav, positions)
    u = np.abs(dz) / d  # sin(theta); r > 0 guarantees |u| < 1
    theta = DEG_PER_RAD * np.arcsin(u)
    sig = 1.0 / (1.0 + np.exp(-c.beta3 * (theta - c.beta4)))
    bump = (c.beta2 - c.beta1) * c.beta3 * sig * (1.0 - sig) * DEG_PER_RAD
    free = c.alpha2 / LN10 / d2
    gx = float(np.sum(dx * (free - bump * np.abs(dz) / (r * d2))))
    gy = float(np.sum(dy * (free - bump * np.abs(dz) / (r * d2))))
    gz = float(np.sum(free * dz + bump * np.sign(dz) * r / d2))
    return GradientVector(gx, gy, gz)


def grad_total_low_shf(
    uav: Sequence[float],
    users: Sequence[IndoorUser],
    constants: LowShfConstants = LowShfConstants(),
) -> GradientVector:
    """Closed-form gradient of the low-SHF total loss w.r.t. the UAV position."""
    return _grad_low(uav, positions_array(users), constants)


def grad_total_high_shf(
    uav: Sequence[float],
    users: Sequence[IndoorUser],
    constants: HighShfConstants = HighShfConstants(),
) -> GradientVector:
    """Closed-form gradient of the high-SHF total loss w.r.t. the UAV position."""
    return _grad_high(uav, positions_array(users), constants)


def grad_total(uav: Sequence[float], users: Sequence[IndoorUser], params: RadioParams) -> GradientVector:
    if params.band is Band.LOW_SHF:
        return grad_total_low_shf(uav, users, params.low_shf)
    return grad_total_high_shf(uav, users, params.high_shf)


def _sorted_rows(points: np.ndarray) -> np.ndarray:
    order = np.lexsort((points[:, 2], points[:, 1], points[:, 0]))
    return points[order]


def validate_symmetric(users: Sequence[IndoorUser], building: Building, tol: float = 1e-6) -> None:
    """Check mirror closure across the two center planes of the building.

    Raises SymmetryError naming the first user whose mirror image is
    missing from the roster.
    """
    pts = positions_array(users)
    if len(pts) == 0:
        return
    for axis, extent in ((1, building.y_b), (2, building.z_b)):
        mirrored = pts.copy()
        mirrored[:, axis] = extent - mirrored[:, axis]
        if np.allclose(_sorted_rows(pts), _sorted_rows(mirrored), atol=tol, rtol=0.0):
            continue
        # slow path only to produce a useful diagnostic
        for user in users:
            target = np.array(user.position)
            target[axis] = extent - target[axis]
            if not np.any(np.linalg.norm(pts - target, axis=1) <= tol):
                plane = "y" if axis == 1 else "z"
                raise SymmetryError(
                    f"user {user.id} at {user.position} has no {plane}-mirror partner"
                )
        raise SymmetryError("roster is not mirror-symmetric")


def place_center_line(
    building: Building,
    users: Sequence[IndoorUser],
    params: RadioParams,
    gd_cfg: Optional[GdConfig] = None,
    x_max: Optional[float] = None,
) -> tuple[UavPlacement, OptimizationTrace]:
    """Descend x with y and z pinned to the building center planes.

    No symmetry requirement: this is the 1D search any roster can run
    on the center line; the x derivative is the band-appropriate
    analytic form, clamped to [x_b, x_max].
    """
    if gd_cfg is None:
        gd_cfg = GdConfig(initial_point=building.x_b + 1.0)
    y_c, z_c = 0.5 * building.y_b, 0.5 * building.z_b
    pos = positions_array(users)
    constants = params.low_shf if params.band is Band.LOW_SHF else params.high_shf
    grad_fn = _grad_low if params.band is Band.LOW_SHF else _grad_high
    objective = make_total_loss(users, params, building)

    def grad_x(x: float) -> float:
        return grad_fn((x, y_c, z_c), pos, constants).d_dx

    hi = building.x_b + DEFAULT_X_SPAN if x_max is None else x_max
    x_opt, trace = gradient_descent_1d(
        grad_x, gd_cfg, clamp=(building.x_b, hi),
        objective=lambda x: objective((x, y_c, z_c)),
    )
    position = (x_opt, y_c, z_c)
    return UavPlacement(position, objective(position)), trace


def place_symmetric(
    building: Building,
    users: Sequence[IndoorUser],
    params: RadioParams,
    gd_cfg: Optional[GdConfig] = None,
    x_max: Optional[float] = None,
) -> tuple[UavPlacement, OptimizationTrace]:
    """Place a single UAV for a mirror-symmetric roster.

    Validates mirror closure, then pins y and z to the building center
    planes (where the closed-form gradient vanishes for symmetric
    rosters) and descends the remaining x coordinate.
    """
    validate_symmetric(users, building)
    return place_center_line(building, users, params, gd_cfg, x_max)


def place_pso(
    building: Building,
    users: Sequence[IndoorUser],
    params: RadioParams,
    pso_cfg: Optional[PsoConfig] = None,
) -> tuple[UavPlacement, OptimizationTrace]:
    """Place a single UAV by particle swarm over the full 3D box.

    The x lower bound is lifted to the building wall so every candidate
    stays outside the prism.
    """
    if pso_cfg is None:
        pso_cfg = PsoConfig(bounds=_default_bounds(building))
    bounds = pso_cfg.bounds
    if bounds.x[0] < building.x_b:
        bounds = Bounds3((building.x_b, max(bounds.x[1], building.x_b)), bounds.y, bounds.z)
        pso_cfg = PsoConfig(
            bounds=bounds,
            seed=pso_cfg.seed,
            kappa=pso_cfg.kappa,
            phi1=pso_cfg.phi1,
            phi2=pso_cfg.phi2,
            population=pso_cfg.population,
            max_iterations=pso_cfg.max_iterations,
        )
    cost = make_total_loss(users, params, building)
    best, best_cost, trace = pso(cost, pso_cfg)
    return UavPlacement(best, best_cost), trace


def _default_bounds(building: Building) -> Bounds3:
    span = building.x_b + DEFAULT_X_SPAN
    return Bounds3((building.x_b, span), (0.0, DEFAULT_X_SPAN), (0.0, DEFAULT_X_SPAN))
