"""Minimum-UAV coverage planning.

Clusters indoor users (Lloyd k-means), places one UAV per cluster with
PSO, and grows the cluster count until every UAV's transmit power fits
under the cap.  A uniform horizontal-slab split serves as the baseline.
Finding the true minimum number of UAVs is NP-complete (bin packing
reduces to it), hence the heuristic scan.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .optimize import PsoConfig, pso
from .propagation import Band, RadioParams, dbm_to_watts, rate_power_watts
from .scenario import (
    Bounds3,
    Building,
    IndoorUser,
    UavPlacement,
    make_linear_total_loss,
    make_total_loss,
    positions_array,
)

__all__ = [
    "MultiUavConfig",
    "ClusterPlan",
    "InfeasiblePlanError",
    "kmeans",
    "cluster_power",
    "plan_clustered",
    "plan_uniform_split",
    "audit_plan",
]


class InfeasiblePlanError(RuntimeError):
    """No feasible plan found up to the cluster-count cap."""

    def __init__(self, message: str, k: int, powers: list[float]):
        super().__init__(message)
        self.k = k
        self.powers = powers


@dataclass(frozen=True)
class MultiUavConfig:
    """Planning parameters; defaults follow the multi-UAV reference setup."""

    max_power_w: float = 5.0
    frequency_ghz: float = 2.0
    bandwidth_hz: float = 50e6
    rate_bps: float = 2.2e6
    noise_dbm: float = -150.0
    noise_watts: Optional[float] = None  # overrides the dBm conversion when set
    bounds: Bounds3 = field(
        default_factory=lambda: Bounds3((25.0, 1000.0), (0.0, 50.0), (0.0, 1000.0))
    )
    kmeans_seed: int = 0
    max_k: int = 50
    rate_exponent_per_cluster: bool = False
    pso_population: int = 50
    pso_iterations: int = 200

    def __post_init__(self) -> None:
        if not self.max_power_w > 0:
            raise ValueError("max power must be positive")
        if self.max_k < 2:
            raise ValueError("max_k must allow the initial two clusters")

    @property
    def noise_w(self) -> float:
        return self.noise_watts if self.noise_watts is not None else dbm_to_watts(self.noise_dbm)

    def radio_params(self) -> RadioParams:
        return RadioParams(frequency_ghz=self.frequency_ghz, band=Band.LOW_SHF)

    def rate_exponent(self, cluster_size: int, total_users: int) -> float:
        count = cluster_size if self.rate_exponent_per_cluster else total_users
        return self.rate_bps * count / self.bandwidth_hz


@dataclass
class ClusterPlan:
    """User partition plus one placement and power level per UAV.

    ``placements[j]`` is None for slots that cover no user (possible for
    slab splits and rosters smaller than the cluster count); their power
    is zero.
    """

    k: int
    assignment: dict[int, int]
    placements: list[Optional[UavPlacement]]
    powers: list[float]
    feasible: bool

    def member_counts(self) -> list[int]:
        counts = [0] * self.k
        for j in self.assignment.values():
            counts[j] += 1
        return counts

    def total_power_w(self) -> float:
        return float(sum(self.powers))


def kmeans(
    users: Sequence[IndoorUser] | np.ndarray,
    k: int,
    seed,
) -> tuple[np.ndarray, np.ndarray]:
    """Lloyd iterations on 3D positions; returns (centroids, labels).

    Starts from k distinct users chosen at random, alternates
    nearest-centroid assignment (ties to the lowest index) with mean
    updates, and stops when assignments no longer change.  An emptied
    cluster is re-seeded to the point farthest from its former centroid.
    """
    points = users if isinstance(users, np.ndarray) else positions_array(users)
    m = len(points)
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    if k > m:
        raise ValueError(f"k={k} exceeds the roster size {m}")
    rng = np.random.default_rng(seed)
    centroids = points[rng.choice(m, size=k, replace=False)].copy()
    labels = np.full(m, -1)
    for _ in range(1000):
        d2 = ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        new_labels = np.argmin(d2, axis=1)
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for j in range(k):
            members = points[labels == j]
            if len(members) > 0:
                centroids[j] = members.mean(axis=0)
            else:
                far = int(np.argmax(((points - centroids[j]) ** 2).sum(axis=1)))
                centroids[j] = points[far]
    return centroids, labels


def cluster_power(
    members: Sequence[IndoorUser],
    placement: Sequence[float],
    building: Building,
    config: MultiUavConfig,
    total_users: int,
) -> float:
    """Transmit power (W) one UAV needs for its cluster.

    Sums the per-user rate power over the members with the low-SHF loss
    at the configured frequency; the rate exponent uses the full roster
    size unless the per-cluster switch is set.
    """
    if len(members) == 0:
        return 0.0
    if not config.bounds.contains(placement):
        raise ValueError(f"placement {tuple(placement)} violates the bounds {config.bounds}")
    exponent = config.rate_exponent(len(members), total_users)
    linear_sum = make_linear_total_loss(members, config.radio_params(), building)(placement)
    return rate_power_watts(0.0, exponent, config.noise_w) * linear_sum


def _pso_seed(base: int, k: int, j: int) -> int:
    return int(np.random.SeedSequence([base, k, j]).generate_state(1)[0])


def _place_cluster(
    members: Sequence[IndoorUser],
    building: Building,
    config: MultiUavConfig,
    seed: int,
) -> UavPlacement:
    cost = make_total_loss(members, config.radio_params(), building)
    cfg = PsoConfig(
        bounds=config.bounds,
        seed=seed,
        population=config.pso_population,
        max_iterations=config.pso_iterations,
    )
    best, best_cost, _ = pso(cost, cfg)
    return UavPlacement(best, best_cost)


def _scan(users, building, config, assign_fn, label: str) -> ClusterPlan:
    if len(users) == 0:
        raise ValueError("roster is empty")
    total = len(users)
    powers: list[float] = []
    for k in range(2, config.max_k + 1):
        labels = assign_fn(k)
        placements: list[Optional[UavPlacement]] = [None] * k
        powers = [0.0] * k
        feasible = True
        for j in range(k):
            members = [u for u, lab in zip(users, labels) if lab == j]
            if not members:
                continue
            placement = _place_cluster(members, building, config, _pso_seed(config.kmeans_seed, k, j))
            power = cluster_power(members, placement.position, building, config, total)
            placement.transmit_power_w = power
            placement.within_loss_budget = power <= config.max_power_w
            placements[j] = placement
            powers[j] = power
            if power > config.max_power_w:
                feasible = False
        if feasible:
            assignment = {u.id: int(lab) for u, lab in zip(users, labels)}
            return ClusterPlan(k, assignment, placements, powers, True)
    raise InfeasiblePlanError(
        f"{label}: no feasible plan up to k={config.max_k}; "
        f"last per-UAV powers (W): {[round(p, 3) for p in powers]}",
        config.max_k,
        powers,
    )


def plan_clustered(
    users: Sequence[IndoorUser],
    building: Building,
    config: MultiUavConfig = MultiUavConfig(),
) -> ClusterPlan:
    """Grow k from 2, k-means clustering each time, until powers fit.

    Each restart re-seeds the centroids deterministically from
    (kmeans_seed, k).  The scan never tries a single UAV, so the
    returned k is at least 2 even for tiny rosters.
    """
    points = positions_array(users)

    def assign(k: int) -> np.ndarray:
        _, labels = kmeans(points, min(k, len(users)), seed=[config.kmeans_seed, k])
        return labels

    return _scan(users, building, config, assign, "clustered")


def plan_uniform_split(
    users: Sequence[IndoorUser],
    building: Building,
    config: MultiUavConfig = MultiUavConfig(),
) -> ClusterPlan:
    """Slab baseline: k equal-height slabs, users assigned by altitude.

    Empty slabs are skipped (no UAV, zero power); the same power test
    and k-increment loop applies.
    """
    points = positions_array(users)

    def assign(k: int) -> np.ndarray:
        slab = building.z_b / k
        return np.minimum((points[:, 2] / slab).astype(int), k - 1)

    return _scan(users, building, config, assign, "uniform split")


def audit_plan(
    plan: ClusterPlan,
    users: Sequence[IndoorUser],
    config: MultiUavConfig,
) -> list[str]:
    """Check exact cover, power caps and bounds; returns violations."""
    problems = []
    ids = [u.id for u in users]
    if sorted(plan.assignment.keys()) != sorted(ids):
        problems.append("assignment does not cover every user exactly once")
    for uid, j in plan.assignment.items():
        if not 0 <= j < plan.k:
            problems.append(f"user {uid} assigned to invalid UAV {j}")
        elif plan.placements[j] is None:
            problems.append(f"user {uid} assigned to empty slot {j}")
    for j, (placement, power) in enumerate(zip(plan.placements, plan.powers)):
        if placement is None:
            if power != 0.0:
                problems.append(f"empty slot {j} has nonzero power")
            continue
        if power > config.max_power_w:
            problems.append(f"UAV {j} power {power:.3f} W exceeds the cap")
        if not config.bounds.contains(placement.position):
            problems.append(f"UAV {j} at {placement.position} violates the bounds")
    return problems
