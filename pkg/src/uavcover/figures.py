"""Matplotlib renderings written alongside each experiment's CSV output."""

from __future__ import annotations

from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

DPI = 150


def _new_axes(xlabel: str, ylabel: str, title: str, figsize=(6.4, 4.2)):
    fig, ax = plt.subplots(figsize=figsize)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.grid(color="gray", alpha=0.4, lw=0.5)
    return fig, ax


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)
    return path


def penetration_curve(path: Path, rows) -> Path:
    fig, ax = _new_axes("incident angle (degrees)", "penetration loss (dB)",
                        "Building penetration loss, high SHF")
    ax.plot([r[0] for r in rows], [r[1] for r in rows], lw=2)
    return _save(fig, path)


def worst_case_power_curve(path: Path, rows) -> Path:
    fig, ax = _new_axes("UAV horizontal position x (m)", "transmit power (dBm)",
                        "Power to cover the worst corner")
    by_height = defaultdict(list)
    for z_b, x, power in rows:
        by_height[z_b].append((x, power))
    for z_b, pts in sorted(by_height.items()):
        ax.plot([p[0] for p in pts], [p[1] for p in pts], lw=1.5, label=f"$z_b$ = {z_b:g} m")
    ax.legend()
    return _save(fig, path)


def angle_power_curve(path: Path, rows, best_theta: float, best_power: float) -> Path:
    fig, ax = _new_axes("incident angle (degrees)", "transmit power (dBm)",
                        "Power to cover the worst corner vs incident angle")
    ax.plot([r[0] for r in rows], [r[1] for r in rows], lw=2)
    ax.axvline(best_theta, color="tab:red", ls="--", lw=1)
    ax.plot([best_theta], [best_power], "o", color="tab:red",
            label=f"optimum {best_theta:.3f}\N{DEGREE SIGN}")
    ax.legend()
    return _save(fig, path)


def descent_sweep(path: Path, axis: str, final_rows, trace_rows, trace_ylabel: str) -> Path:
    fig, (top, bottom) = plt.subplots(2, 1, figsize=(6.4, 7.2))
    label = axis.replace("_", " ")
    top.set_xlabel(f"{label} (m)")
    top.set_ylabel("efficient x (m)")
    top.set_title("Placement and convergence per sweep value")
    top.grid(color="gray", alpha=0.4, lw=0.5)
    top.plot([r[1] for r in final_rows], [r[3] for r in final_rows], "o-", lw=1.5)

    bottom.set_xlabel("iteration")
    bottom.set_ylabel(trace_ylabel.replace("_", " "))
    bottom.grid(color="gray", alpha=0.4, lw=0.5)
    by_value = defaultdict(list)
    for row in trace_rows:
        by_value[row[0]].append((row[1], row[-1]))
    for value, pts in sorted(by_value.items()):
        bottom.plot([p[0] for p in pts], [p[1] for p in pts], lw=1.2,
                    label=f"{label} {value:g} m")
    bottom.legend(fontsize=8)
    return _save(fig, path)


def placement_table(path: Path, rows) -> Path:
    fig, ax = _new_axes("building height $z_b$ (m)", "total path loss (dB)",
                        "Efficient total loss per algorithm")
    series = defaultdict(list)
    for algo, dist, z_b, *_rest, loss in [(r[0], r[1], r[2], r[-1]) for r in rows]:
        series[(algo, dist)].append((z_b, loss))
    for (algo, dist), pts in sorted(series.items()):
        pts.sort()
        ax.plot([p[0] for p in pts], [p[1] for p in pts], "o-", lw=1.5,
                label=f"{algo}, {dist}")
    ax.legend(fontsize=8)
    return _save(fig, path)


def multi_uav_compare(path: Path, summary_rows, first_plans) -> Path:
    fig, (left, right) = plt.subplots(1, 2, figsize=(10.0, 4.2))
    seeds = sorted({r[1] for r in summary_rows})
    width = 0.4
    for offset, method, color in ((-width / 2, "clustered", "tab:blue"),
                                  (width / 2, "uniform_split", "tab:orange")):
        ks = {r[1]: r[2] for r in summary_rows if r[0] == method}
        left.bar([seeds.index(s) + offset for s in seeds], [ks.get(s, 0) for s in seeds],
                 width=width, color=color, label=method)
    left.set_xticks(range(len(seeds)), [str(s) for s in seeds])
    left.set_xlabel("roster seed")
    left.set_ylabel("UAVs required")
    left.set_title("Cluster count per method")
    left.legend(fontsize=8)
    left.grid(color="gray", alpha=0.4, lw=0.5, axis="y")

    right.set_xlabel("y (m)")
    right.set_ylabel("z (m)")
    right.set_title("UAV placements, first seed")
    right.grid(color="gray", alpha=0.4, lw=0.5)
    if first_plans is not None:
        for plan, marker, color, name in ((first_plans[0], "o", "tab:blue", "clustered"),
                                          (first_plans[1], "s", "tab:orange", "uniform_split")):
            ys = [p.position[1] for p in plan.placements if p is not None]
            zs = [p.position[2] for p in plan.placements if p is not None]
            right.scatter(ys, zs, marker=marker, color=color, label=f"{name} (k={plan.k})")
        right.legend(fontsize=8)
    return _save(fig, path)
