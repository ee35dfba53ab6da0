"""Experiment runner: scenario configs in, CSV curves and figures out.

Every experiment writes CSV files with a header row naming columns and
units; when figure rendering is enabled a PNG companion is written next
to each CSV.  Identical configs and seeds produce byte-identical CSVs:
all numeric formatting is fixed and every random draw is seeded.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from . import figures
from .config import ConfigError, ExperimentConfig, ScenarioConfig
from .multiuav import ClusterPlan, MultiUavConfig, plan_clustered, plan_uniform_split
from .optimize import GdConfig, PsoConfig, TernaryConfig
from .placement import (
    place_center_line,
    place_pso,
    place_symmetric,
    worst_case_angle_high_shf,
    worst_case_angle_low_shf,
    worst_case_power_curve,
)
from .propagation import (
    Band,
    LinkBudget,
    RadioParams,
    min_transmit_power_dbm,
    penetration_loss_high_shf,
)
from .scenario import (
    Bounds3,
    Building,
    IndoorUser,
    generate_split_users,
    generate_symmetric_users,
    generate_uniform_users,
    load_users,
)
from .placement import corner_loss_at_angle_db

__all__ = ["run_experiment"]


def _fmt(value) -> str:
    if isinstance(value, float):
        if math.isnan(value):
            raise ValueError("refusing to write NaN into a CSV")
        return format(value, ".12g")
    return str(value)


def _write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    with open(path, "w", newline="\n") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    return path


def _derived_seed(base: int, *tags: int) -> int:
    return int(np.random.SeedSequence([base, *tags]).generate_state(1)[0])


def _map(fn: Callable, items: Sequence, workers: int) -> list:
    """Run independent sweep points, in order, optionally across processes.

    Results are collected in input order, so parallel runs emit exactly
    the bytes a serial run would.  Workers must be module-level
    functions with picklable arguments.
    """
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))


def _build_roster(scenario: ScenarioConfig, building: Building, seed: int) -> list[IndoorUser]:
    if scenario.distribution == "symmetric":
        return generate_symmetric_users(
            building, scenario.users_per_floor, seed, scenario.level_fraction
        )
    if scenario.distribution == "uniform":
        return generate_uniform_users(
            building, scenario.users_per_floor, seed, scenario.level_fraction
        )
    return load_users(scenario.users_file, building)


def _budget(scenario: ScenarioConfig) -> LinkBudget:
    return LinkBudget(
        noise_dbm=scenario.noise_dbm, snr_threshold_db=scenario.snr_threshold_db
    )


def run_experiment(
    cfg: ExperimentConfig,
    output_dir: Optional[Path] = None,
    seed: Optional[int] = None,
    threads: int = 1,
    render_figures: Optional[bool] = None,
) -> list[Path]:
    """Dispatch one experiment; returns the paths of the files written."""
    out = Path(output_dir) if output_dir is not None else cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    if seed is not None:
        cfg = replace(cfg, seed=seed)
    render = cfg.render_figures if render_figures is None else render_figures
    runner = _RUNNERS.get(cfg.kind)
    if runner is None:
        raise ConfigError(f"unknown experiment kind {cfg.kind!r}")
    return runner(cfg, out, threads, render)


# ---------------------------------------------------------------------------
# individual experiments


def _run_penetration_curve(cfg, out: Path, threads: int, render: bool) -> list[Path]:
    p = cfg.params
    constants = cfg.scenario.high_constants if cfg.scenario else None
    thetas = np.arange(p["theta_start"], p["theta_stop"] + 1e-9, p["theta_step"])
    rows = [
        (float(t), penetration_loss_high_shf(float(t), constants) if constants
         else penetration_loss_high_shf(float(t)))
        for t in thetas
    ]
    files = [_write_csv(out / "penetration_curve.csv", ["theta_deg", "penetration_db"], rows)]
    if render:
        files.append(figures.penetration_curve(out / "penetration_curve.png", rows))
    return files


def _worst_case_point(args):
    scenario, x_stop, x_step, z_b = args
    building = replace(scenario.building, z_b=z_b)
    xs = np.arange(building.x_b, x_stop + 1e-9, x_step)
    curve = worst_case_power_curve(building, scenario.radio_params(), _budget(scenario), xs)
    return [(z_b, x, power) for x, power in curve]


def _run_worst_case_power_curve(cfg, out: Path, threads: int, render: bool) -> list[Path]:
    scenario = cfg.scenario
    p = cfg.params
    items = [(scenario, p["x_stop"], p["x_step"], z_b) for z_b in p["heights"]]
    blocks = _map(_worst_case_point, items, threads)
    rows = [row for block in blocks for row in block]
    files = [_write_csv(out / "worst_case_power_curve.csv", ["z_b_m", "x_m", "power_dbm"], rows)]
    if render:
        files.append(figures.worst_case_power_curve(out / "worst_case_power_curve.png", rows))
    return files


def _run_angle_power_curve(cfg, out: Path, threads: int, render: bool) -> list[Path]:
    scenario = cfg.scenario
    p = cfg.params
    budget = _budget(scenario)
    params = scenario.radio_params()
    building = scenario.building
    thetas = np.arange(p["theta_start"], p["theta_stop"] + 1e-9, p["theta_step"])
    rows = [
        (float(t), min_transmit_power_dbm(corner_loss_at_angle_db(building, params, float(t)), budget))
        for t in thetas
    ]
    if params.band is Band.LOW_SHF:
        best = worst_case_angle_low_shf(params.low_shf)
        method = "cubic_root"
    else:
        best = worst_case_angle_high_shf(
            building, params, TernaryConfig(p["theta_start"], min(p["theta_stop"], 45.0), 1e-6)
        )
        method = "ternary_search"
    best_power = min_transmit_power_dbm(corner_loss_at_angle_db(building, params, best), budget)
    files = [
        _write_csv(out / "angle_power_curve.csv", ["theta_deg", "power_dbm"], rows),
        _write_csv(
            out / "angle_power_optimum.csv",
            ["theta_deg", "power_dbm", "method"],
            [(best, best_power, method)],
        ),
    ]
    if render:
        files.append(figures.angle_power_curve(out / "angle_power_curve.png", rows, best, best_power))
    return files


def _sweep_axis(params: dict) -> tuple[str, list[float]]:
    if params.get("heights"):
        return "building_height", params["heights"]
    return "building_width", params["widths"]


def _sweep_building(base: Building, axis: str, value: float) -> Building:
    if axis == "building_height":
        return replace(base, z_b=value)
    return replace(base, x_b=value)


def _gd_point(args):
    scenario, axis, seed, value = args
    building = _sweep_building(scenario.building, axis, value)
    users = _build_roster(scenario, building, seed)
    params = scenario.radio_params()
    gd_cfg = GdConfig(initial_point=building.x_b + 1.0)
    if scenario.distribution == "symmetric":
        placement, trace = place_symmetric(building, users, params, gd_cfg)
    else:
        placement, trace = place_center_line(building, users, params, gd_cfg)
    return value, len(users), placement, trace


def _run_gd_sweep(cfg, out: Path, threads: int, render: bool) -> list[Path]:
    scenario = cfg.scenario
    axis, values = _sweep_axis(cfg.params)
    seed = cfg.roster_seed()
    results = _map(_gd_point, [(scenario, axis, seed, v) for v in values], threads)
    final_rows = []
    trace_rows = []
    for value, n_users, placement, trace in results:
        x, y, z = placement.position
        final_rows.append((axis, value, n_users, x, y, z, placement.total_path_loss_db, len(trace)))
        for step in trace.steps:
            trace_rows.append((value, step.iteration, float(step.candidate), step.value))
    files = [
        _write_csv(
            out / "gd_sweep_final.csv",
            ["sweep_axis", "sweep_value_m", "users", "x_m", "y_m", "z_m", "total_loss_db", "iterations"],
            final_rows,
        ),
        _write_csv(
            out / "gd_sweep_trace.csv",
            ["sweep_value_m", "iteration", "x_m", "total_loss_db"],
            trace_rows,
        ),
    ]
    if render:
        files.append(figures.descent_sweep(out / "gd_sweep.png", axis, final_rows, trace_rows, "x_m"))
    return files


def _pso_point(args):
    scenario, axis, seed, population, iterations, index, value = args
    building = _sweep_building(scenario.building, axis, value)
    users = _build_roster(scenario, building, seed)
    pso_cfg = PsoConfig(
        bounds=Bounds3((building.x_b, 1000.0), (0.0, 1000.0), (0.0, 1000.0)),
        seed=_derived_seed(seed, 2, index),
        population=population,
        max_iterations=iterations,
    )
    placement, trace = place_pso(building, users, scenario.radio_params(), pso_cfg)
    return value, len(users), placement, trace


def _run_pso_sweep(cfg, out: Path, threads: int, render: bool) -> list[Path]:
    scenario = cfg.scenario
    axis, values = _sweep_axis(cfg.params)
    seed = cfg.roster_seed()
    p = cfg.params
    items = [
        (scenario, axis, seed, p["population"], p["iterations"], index, value)
        for index, value in enumerate(values)
    ]
    results = _map(_pso_point, items, threads)
    final_rows = []
    trace_rows = []
    for value, n_users, placement, trace in results:
        x, y, z = placement.position
        final_rows.append((axis, value, n_users, x, y, z, placement.total_path_loss_db))
        for step in trace.steps:
            trace_rows.append((value, step.iteration, step.value))
    files = [
        _write_csv(
            out / "pso_sweep_final.csv",
            ["sweep_axis", "sweep_value_m", "users", "x_m", "y_m", "z_m", "total_loss_db"],
            final_rows,
        ),
        _write_csv(
            out / "pso_sweep_trace.csv",
            ["sweep_value_m", "iteration", "best_cost_db"],
            trace_rows,
        ),
    ]
    if render:
        files.append(figures.descent_sweep(out / "pso_sweep.png", axis, final_rows, trace_rows, "best_cost_db"))
    return files


def _table2_point(args):
    scenario, seed, population, iterations, index, dist, z_b = args
    params = scenario.radio_params()
    building = replace(scenario.building, z_b=z_b)
    if dist == "symmetric":
        users = generate_symmetric_users(
            building, scenario.users_per_floor, seed, scenario.level_fraction
        )
        gd_placement, _ = place_symmetric(building, users, params)
    else:
        users = generate_uniform_users(
            building, scenario.users_per_floor, seed, scenario.level_fraction
        )
        gd_placement, _ = place_center_line(building, users, params)
    pso_cfg = PsoConfig(
        bounds=Bounds3((building.x_b, 1000.0), (0.0, 1000.0), (0.0, 1000.0)),
        seed=_derived_seed(seed, 3, index),
        population=population,
        max_iterations=iterations,
    )
    pso_placement, _ = place_pso(building, users, params, pso_cfg)
    return building, dist, gd_placement, pso_placement


def _run_table2(cfg, out: Path, threads: int, render: bool) -> list[Path]:
    scenario = cfg.scenario
    p = cfg.params
    seed = cfg.roster_seed()
    combos = [(d, z) for d in p["distributions"] for z in p["heights"]]
    items = [
        (scenario, seed, p["population"], p["iterations"], index, dist, z_b)
        for index, (dist, z_b) in enumerate(combos)
    ]
    results = _map(_table2_point, items, threads)
    rows = []
    for building, dist, gd_placement, pso_placement in results:
        for name, placement in (("GD", gd_placement), ("PSO", pso_placement)):
            x, y, z = placement.position
            rows.append(
                (name, dist, building.z_b, building.x_b, building.y_b, x, y, z,
                 placement.total_path_loss_db)
            )
    files = [
        _write_csv(
            out / "table2.csv",
            ["algorithm", "distribution", "z_b_m", "x_b_m", "y_b_m", "x_m", "y_m", "z_m", "total_loss_db"],
            rows,
        )
    ]
    if render:
        files.append(figures.placement_table(out / "table2.png", rows))
    return files


def _plan_rows(plan: ClusterPlan):
    counts = plan.member_counts()
    rows = []
    for j, placement in enumerate(plan.placements):
        if placement is None:
            continue
        x, y, z = placement.position
        rows.append((j, x, y, z, plan.powers[j], counts[j]))
    return rows


def _run_multi_uav_compare(cfg, out: Path, threads: int, render: bool) -> list[Path]:
    scenario = cfg.scenario
    p = cfg.params
    building = scenario.building
    config = MultiUavConfig(
        max_power_w=p["max_power_w"],
        frequency_ghz=scenario.frequency_ghz,
        bandwidth_hz=p["bandwidth_hz"],
        rate_bps=p["rate_bps"],
        noise_dbm=p["noise_dbm"],
        noise_watts=p["noise_watts"],
        bounds=Bounds3((p["x_min"], p["x_max"]), (p["y_min"], p["y_max"]), (p["z_min"], p["z_max"])),
        kmeans_seed=p["kmeans_seed"],
        max_k=p["max_k"],
        pso_population=p["pso_population"],
        pso_iterations=p["pso_iterations"],
    )
    plan_header = ["uav_index", "x_m", "y_m", "z_m", "power_w", "member_count"]

    def one(roster_seed: int):
        users = generate_split_users(
            building, p["users_below"], p["users_above"], p["split_z"], roster_seed,
            scenario.level_fraction,
        )
        seeded = replace(config, kmeans_seed=_derived_seed(config.kmeans_seed, 5, roster_seed))
        return roster_seed, users, plan_clustered(users, building, seeded), \
            plan_uniform_split(users, building, seeded)

    results = _map(one, p["roster_seeds"], threads)
    files: list[Path] = []
    summary_rows = []
    first_plans = None
    for roster_seed, users, clustered, uniform in results:
        if first_plans is None:
            first_plans = (clustered, uniform)
        for method, plan in (("clustered", clustered), ("uniform_split", uniform)):
            tag = f"{method}_seed{roster_seed}"
            files.append(_write_csv(out / f"{tag}_plan.csv", plan_header, _plan_rows(plan)))
            files.append(
                _write_csv(
                    out / f"{tag}_assignment.csv",
                    ["user_id", "uav_index"],
                    sorted(plan.assignment.items()),
                )
            )
            summary_rows.append(
                (method, roster_seed, plan.k, plan.total_power_w(), int(plan.feasible))
            )
    files.insert(
        0,
        _write_csv(
            out / "multi_uav_summary.csv",
            ["method", "roster_seed", "k_uavs", "total_power_w", "feasible"],
            summary_rows,
        ),
    )
    if render:
        files.append(figures.multi_uav_compare(out / "multi_uav_compare.png", summary_rows, first_plans))
    return files


_RUNNERS = {
    "penetration_curve": _run_penetration_curve,
    "worst_case_power_curve": _run_worst_case_power_curve,
    "angle_power_curve": _run_angle_power_curve,
    "gd_sweep": _run_gd_sweep,
    "pso_sweep": _run_pso_sweep,
    "table2": _run_table2,
    "multi_uav_compare": _run_multi_uav_compare,
}
