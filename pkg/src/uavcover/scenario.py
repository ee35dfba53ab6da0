"""Building geometry, indoor user rosters and the total-loss objective."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .propagation import (
    Band,
    GeometryError,
    LinkBudget,
    RadioParams,
    dbm_to_watts,
    high_shf_components,
    low_shf_components,
)

__all__ = [
    "Building",
    "IndoorUser",
    "Bounds3",
    "UavPlacement",
    "generate_symmetric_users",
    "generate_uniform_users",
    "generate_split_users",
    "load_users",
    "positions_array",
    "total_path_loss",
    "total_path_loss_linear",
    "make_total_loss",
    "make_linear_total_loss",
    "loss_budget_linear",
]


@dataclass(frozen=True)
class Building:
    """Rectangular-prism building occupying [0,x_b] x [0,y_b] x [0,z_b]."""

    x_b: float
    y_b: float
    z_b: float
    floor_height: float = 5.0

    def __post_init__(self) -> None:
        for name in ("x_b", "y_b", "z_b", "floor_height"):
            if not getattr(self, name) > 0:
                raise ValueError(f"building {name} must be positive, got {getattr(self, name)}")
        ratio = self.z_b / self.floor_height
        if abs(ratio - round(ratio)) > 1e-9:
            warnings.warn(
                f"building height {self.z_b} is not a whole number of "
                f"{self.floor_height} m floors",
                stacklevel=2,
            )

    @property
    def floor_count(self) -> int:
        return int(round(self.z_b / self.floor_height))

    def contains(self, point: Sequence[float]) -> bool:
        """True when the point lies strictly inside the prism."""
        x, y, z = point
        return 0.0 < x < self.x_b and 0.0 < y < self.y_b and 0.0 < z < self.z_b


@dataclass(frozen=True)
class IndoorUser:
    id: int
    position: tuple[float, float, float]


@dataclass(frozen=True)
class Bounds3:
    """Axis-aligned box constraint for a UAV position."""

    x: tuple[float, float]
    y: tuple[float, float]
    z: tuple[float, float]

    def __post_init__(self) -> None:
        for axis in (self.x, self.y, self.z):
            if axis[0] > axis[1]:
                raise ValueError(f"bounds minimum exceeds maximum: {axis}")

    def contains(self, point: Sequence[float], tol: float = 1e-9) -> bool:
        return all(
            lo - tol <= v <= hi + tol
            for v, (lo, hi) in zip(point, (self.x, self.y, self.z))
        )

    def as_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        lo = np.array([self.x[0], self.y[0], self.z[0]], dtype=float)
        hi = np.array([self.x[1], self.y[1], self.z[1]], dtype=float)
        return lo, hi


@dataclass
class UavPlacement:
    position: tuple[float, float, float]
    total_path_loss_db: float
    transmit_power_w: Optional[float] = None
    within_loss_budget: Optional[bool] = None


def _mid_floor_heights(building: Building, level_fraction: float = 0.5) -> np.ndarray:
    return (np.arange(building.floor_count) + level_fraction) * building.floor_height


def generate_symmetric_users(
    building: Building,
    users_per_floor: int,
    seed: int,
    level_fraction: float = 0.5,
) -> list[IndoorUser]:
    """Random roster mirrored across the building's two center planes.

    Users come in quadruples sharing one x draw: (x, yc-u, z), (x, yc+u, z)
    on a lower-half floor plus the same pair on the height-mirrored floor,
    so the roster is exactly closed under y -> y_b - y and z -> z_b - z.
    Positions are placed at ``level_fraction`` of each floor's height
    (mirrored floors at the complementary fraction).
    """
    if users_per_floor < 1 or users_per_floor % 4 != 0:
        raise ValueError(f"users_per_floor must be a positive multiple of 4, got {users_per_floor}")
    if building.floor_count % 2 != 0:
        raise ValueError(
            f"height mirroring needs an even floor count, got {building.floor_count}"
        )
    rng = np.random.default_rng(seed)
    yc = 0.5 * building.y_b
    users: list[IndoorUser] = []
    uid = 0
    for floor in range(building.floor_count // 2):
        z_lo = (floor + level_fraction) * building.floor_height
        z_hi = building.z_b - z_lo
        for _ in range(users_per_floor // 2):
            x = rng.uniform(0.0, building.x_b)
            u = rng.uniform(0.0, yc)
            for z in (z_lo, z_hi):
                for y in (yc - u, yc + u):
                    users.append(IndoorUser(uid, (x, y, z)))
                    uid += 1
    return users


def generate_uniform_users(
    building: Building,
    users_per_floor: int,
    seed: int,
    level_fraction: float = 0.5,
) -> list[IndoorUser]:
    """Roster with users drawn uniformly over each floor's rectangle."""
    if users_per_floor < 1:
        raise ValueError(f"users_per_floor must be positive, got {users_per_floor}")
    rng = np.random.default_rng(seed)
    users: list[IndoorUser] = []
    uid = 0
    for z in _mid_floor_heights(building, level_fraction):
        for _ in range(users_per_floor):
            x = rng.uniform(0.0, building.x_b)
            y = rng.uniform(0.0, building.y_b)
            users.append(IndoorUser(uid, (x, y, float(z))))
            uid += 1
    return users


def generate_split_users(
    building: Building,
    users_below: int,
    users_above: int,
    split_z: float,
    seed: int,
    level_fraction: float = 0.5,
) -> list[IndoorUser]:
    """Roster split by altitude: uniform over the floors below/above split_z."""
    rng = np.random.default_rng(seed)
    heights = _mid_floor_heights(building, level_fraction)
    below = heights[heights < split_z]
    above = heights[heights > split_z]
    if users_below > 0 and len(below) == 0:
        raise ValueError(f"no floors below z={split_z}")
    if users_above > 0 and len(above) == 0:
        raise ValueError(f"no floors above z={split_z}")
    users: list[IndoorUser] = []
    uid = 0
    for count, floors in ((users_below, below), (users_above, above)):
        for _ in range(count):
            z = float(floors[rng.integers(0, len(floors))])
            x = rng.uniform(0.0, building.x_b)
            y = rng.uniform(0.0, building.y_b)
            users.append(IndoorUser(uid, (x, y, z)))
            uid += 1
    return users


def load_users(path: str | Path, building: Building) -> list[IndoorUser]:
    """Read a roster file: one ``id, x, y, z`` line per user, '#' comments.

    Raises ValueError naming the offending line on parse errors and the
    offending user id when a position falls outside the building.
    """
    users: list[IndoorUser] = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 4:
            raise ValueError(f"{path}:{lineno}: expected 'id, x, y, z', got {raw!r}")
        try:
            uid = int(parts[0])
            x, y, z = (float(p) for p in parts[1:])
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: {exc}") from None
        if not building.contains((x, y, z)):
            raise ValueError(
                f"{path}:{lineno}: user {uid} at ({x}, {y}, {z}) lies outside the building"
            )
        users.append(IndoorUser(uid, (x, y, z)))
    return users


def positions_array(users: Sequence[IndoorUser]) -> np.ndarray:
    """Roster positions as an (M, 3) float array."""
    if len(users) == 0:
        return np.zeros((0, 3))
    return np.array([u.position for u in users], dtype=float)


def _check_uav(uav: Sequence[float], building: Building) -> tuple[float, float, float]:
    ux, uy, uz = (float(v) for v in uav)
    if ux < building.x_b:
        raise GeometryError(f"UAV x={ux} is behind the building wall x_b={building.x_b}")
    return ux, uy, uz


def _per_user_losses(uav, positions: np.ndarray, params: RadioParams, building: Building) -> np.ndarray:
    ux, uy, uz = uav
    dx = ux - positions[:, 0]
    dy = uy - positions[:, 1]
    dz = uz - positions[:, 2]
    d_out = np.sqrt(dx * dx + dy * dy + dz * dz)
    if np.any(d_out == 0.0):
        raise GeometryError("UAV coincides with a user position")
    theta = np.degrees(np.arcsin(np.clip(np.abs(dz) / d_out, 0.0, 1.0)))
    d_in = building.x_b - positions[:, 0]
    if params.band is Band.LOW_SHF:
        lf, lb, li = low_shf_components(d_out, theta, d_in, params.low_shf, params.frequency_ghz)
    else:
        lf, lb, li = high_shf_components(d_out, theta, d_in, params.high_shf, params.frequency_ghz)
    return lf + lb + li


def total_path_loss(
    uav: Sequence[float],
    users: Sequence[IndoorUser],
    params: RadioParams,
    building: Building,
) -> float:
    """Sum of per-user path losses (dB) from one UAV position."""
    if len(users) == 0:
        return 0.0
    pos = positions_array(users)
    return float(np.sum(_per_user_losses(_check_uav(uav, building), pos, params, building)))


def total_path_loss_linear(
    uav: Sequence[float],
    users: Sequence[IndoorUser],
    params: RadioParams,
    building: Building,
) -> float:
    """Sum of per-user linear losses ``10**(L_i/10)`` from one UAV position."""
    if len(users) == 0:
        return 0.0
    pos = positions_array(users)
    losses = _per_user_losses(_check_uav(uav, building), pos, params, building)
    return float(np.sum(10.0 ** (losses / 10.0)))


def make_total_loss(
    users: Sequence[IndoorUser],
    params: RadioParams,
    building: Building,
) -> Callable[[Sequence[float]], float]:
    """Bind a roster into a fast ``uav -> total loss (dB)`` evaluator."""
    pos = positions_array(users)
    if len(pos) == 0:
        return lambda uav: 0.0

    def evaluate(uav: Sequence[float]) -> float:
        return float(np.sum(_per_user_losses(_check_uav(uav, building), pos, params, building)))

    return evaluate


def make_linear_total_loss(
    users: Sequence[IndoorUser],
    params: RadioParams,
    building: Building,
) -> Callable[[Sequence[float]], float]:
    """Bind a roster into a ``uav -> sum of linear losses`` evaluator."""
    pos = positions_array(users)
    if len(pos) == 0:
        return lambda uav: 0.0

    def evaluate(uav: Sequence[float]) -> float:
        losses = _per_user_losses(_check_uav(uav, building), pos, params, building)
        return float(np.sum(10.0 ** (losses / 10.0)))

    return evaluate


def loss_budget_linear(budget: LinkBudget, max_power_w: float) -> float:
    """Maximum allowed sum of linear losses for a transmit-power cap.

    A total power ``(2**e - 1) * N * sum(10**(L_i/10)) <= P_max`` is
    equivalent to the linear-loss sum staying below this value.
    """
    prefactor = (2.0 ** budget.rate_exponent - 1.0) * dbm_to_watts(budget.noise_dbm)
    if prefactor == 0.0:
        return math.inf
    return max_power_w / prefactor
