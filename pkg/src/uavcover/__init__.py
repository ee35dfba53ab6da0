"""Aerial base station placement for indoor coverage of high-rise buildings.

A library plus CLI that models outdoor-to-indoor path loss in two
carrier bands, places a single UAV by closed-form worst-corner design,
gradient descent or particle swarm search, and plans minimum-UAV
coverage by clustering users under a per-UAV power cap.
"""

__version__ = "0.1.0"

from .multiuav import (
    ClusterPlan,
    InfeasiblePlanError,
    MultiUavConfig,
    audit_plan,
    cluster_power,
    kmeans,
    plan_clustered,
    plan_uniform_split,
)
from .optimize import (
    GdConfig,
    OptimizationTrace,
    PsoConfig,
    TernaryConfig,
    finite_difference_gradient,
    gradient_descent_1d,
    pso,
    ternary_search,
)
from .placement import (
    GradientVector,
    SymmetryError,
    WorstCaseResult,
    grad_total,
    grad_total_high_shf,
    grad_total_low_shf,
    place_center_line,
    place_pso,
    place_symmetric,
    validate_symmetric,
    worst_case_angle_high_shf,
    worst_case_angle_low_shf,
    worst_case_low_shf,
    worst_case_power_curve,
    worst_case_standoff,
)
from .propagation import (
    Band,
    GeometryError,
    HighShfConstants,
    LinkBudget,
    LinkGeometry,
    LowShfConstants,
    PathLossBreakdown,
    RadioParams,
    link_geometry,
    min_transmit_power_dbm,
    path_loss,
    path_loss_high_shf,
    path_loss_low_shf,
    penetration_loss_high_shf,
    required_power_watts,
)
from .scenario import (
    Bounds3,
    Building,
    IndoorUser,
    UavPlacement,
    generate_split_users,
    generate_symmetric_users,
    generate_uniform_users,
    load_users,
    total_path_loss,
    total_path_loss_linear,
)

__all__ = [name for name in dir() if not name.startswith("_")]
