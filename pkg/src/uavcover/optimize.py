"""Numerical kernels: ternary search, 1D gradient descent and PSO.

All kernels are single-threaded and deterministic: identical seeds and
configurations produce bit-identical iterates and traces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from .scenario import Bounds3

__all__ = [
    "TernaryConfig",
    "GdConfig",
    "PsoConfig",
    "TraceStep",
    "OptimizationTrace",
    "ternary_search",
    "gradient_descent_1d",
    "pso",
    "finite_difference_gradient",
]


class TraceStep(NamedTuple):
    iteration: int
    candidate: object  # float for 1D searches, (x, y, z) tuple for PSO
    value: float


@dataclass
class OptimizationTrace:
    """Per-iteration record of an optimizer run."""

    steps: list[TraceStep] = field(default_factory=list)

    def append(self, iteration: int, candidate, value: float) -> None:
        self.steps.append(TraceStep(iteration, candidate, value))

    def values(self) -> list[float]:
        return [s.value for s in self.steps]

    def __len__(self) -> int:
        return len(self.steps)


@dataclass(frozen=True)
class TernaryConfig:
    lo: float
    hi: float
    precision: float = 1e-6

    def __post_init__(self) -> None:
        if not self.lo < self.hi:
            raise ValueError(f"interval [{self.lo}, {self.hi}] is empty")
        if not self.precision > 0:
            raise ValueError("precision must be positive")


@dataclass(frozen=True)
class GdConfig:
    initial_point: float
    step_size: float = 0.01
    tolerance: float = 1e-6
    max_iterations: int = 500

    def __post_init__(self) -> None:
        if not self.step_size > 0:
            raise ValueError("step size must be positive")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")


@dataclass(frozen=True)
class PsoConfig:
    bounds: Bounds3
    seed: int = 0
    kappa: float = 1.0
    phi1: float = 2.05
    phi2: float = 2.05
    population: int = 50
    max_iterations: int = 200

    def __post_init__(self) -> None:
        if self.phi1 + self.phi2 <= 4.0:
            raise ValueError("constriction requires phi1 + phi2 > 4")
        if self.population < 2:
            raise ValueError("population must be at least 2")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")

    @property
    def chi(self) -> float:
        """Constriction coefficient 2k / |2 - phi - sqrt(phi^2 - 4 phi)|."""
        phi = self.phi1 + self.phi2
        return 2.0 * self.kappa / abs(2.0 - phi - math.sqrt(phi * phi - 4.0 * phi))


def ternary_search(f: Callable[[float], float], cfg: TernaryConfig) -> float:
    """Minimize a unimodal function by ternary interval contraction.

    Keeps [l, b] when f(l) > f(r), else [a, r]; returns the midpoint of
    the final interval once it is shorter than the precision.
    """
    a, b = cfg.lo, cfg.hi
    while abs(b - a) >= cfg.precision:
        l = a + (b - a) / 3.0
        r = b - (b - a) / 3.0
        fl, fr = f(l), f(r)
        if not (math.isfinite(fl) and math.isfinite(fr)):
            raise ArithmeticError(
                f"objective returned a non-finite value: f({l})={fl}, f({r})={fr}"
            )
        if fl > fr:
            a = l
        else:
            b = r
    return 0.5 * (a + b)


def gradient_descent_1d(
    grad: Callable[[float], float],
    cfg: GdConfig,
    clamp: tuple[float, float],
    objective: Optional[Callable[[float], float]] = None,
) -> tuple[float, OptimizationTrace]:
    """Fixed-step descent ``x <- x - a * grad(x)`` clamped to an interval.

    Stops when successive iterates differ by less than the tolerance or
    the iteration cap is reached.  When an objective is supplied the
    trace records its value at each iterate, otherwise NaN.
    """
    lo, hi = clamp
    if lo > hi:
        raise ValueError(f"clamp interval [{lo}, {hi}] is empty")
    x = min(max(cfg.initial_point, lo), hi)
    trace = OptimizationTrace()
    for n in range(1, cfg.max_iterations + 1):
        g = grad(x)
        if math.isnan(g):
            raise ArithmeticError(f"gradient is NaN at x={x}")
        x_next = min(max(x - cfg.step_size * g, lo), hi)
        trace.append(n, x_next, objective(x_next) if objective else math.nan)
        if abs(x - x_next) < cfg.tolerance:
            return x_next, trace
        x = x_next
    return x, trace


def pso(
    cost: Callable[[Sequence[float]], float],
    cfg: PsoConfig,
) -> tuple[tuple[float, float, float], float, OptimizationTrace]:
    """Constriction-coefficient particle swarm over a 3D box.

    Particles start uniformly inside the bounds with zero velocity.
    Each update draws one fresh uniform vector per dimension for the
    personal and the global pull; positions leaving the box are clamped
    and the offending velocity component zeroed.  The global best is
    refreshed immediately after each particle moves, so later particles
    in the same iteration see it.  The trace records the global best
    cost per iteration.  Deterministic for a fixed seed.
    """
    rng = np.random.default_rng(cfg.seed)
    lo, hi = cfg.bounds.as_arrays()
    chi = cfg.chi
    w, c1, c2 = chi, chi * cfg.phi1, chi * cfg.phi2

    loc = rng.uniform(lo, hi, size=(cfg.population, 3))
    vel = np.zeros((cfg.population, 3))
    best_loc = loc.copy()
    best_cost = np.empty(cfg.population)
    for i in range(cfg.population):
        best_cost[i] = _finite_cost(cost, loc[i])
    g = int(np.argmin(best_cost))
    global_loc = best_loc[g].copy()
    global_cost = float(best_cost[g])

    trace = OptimizationTrace()
    trace.append(0, tuple(global_loc), global_cost)
    for t in range(1, cfg.max_iterations + 1):
        for i in range(cfg.population):
            vel[i] = (
                w * vel[i]
                + c1 * rng.random(3) * (best_loc[i] - loc[i])
                + c2 * rng.random(3) * (global_loc - loc[i])
            )
            loc[i] = loc[i] + vel[i]
            out = (loc[i] < lo) | (loc[i] > hi)
            if out.any():
                loc[i] = np.minimum(np.maximum(loc[i], lo), hi)
                vel[i][out] = 0.0
            c = _finite_cost(cost, loc[i])
            if c < best_cost[i]:
                best_cost[i] = c
                best_loc[i] = loc[i].copy()
                if c < global_cost:
                    global_cost = c
                    global_loc = loc[i].copy()
        trace.append(t, tuple(global_loc), global_cost)
    return tuple(float(v) for v in global_loc), global_cost, trace


def _finite_cost(cost, point) -> float:
    value = float(cost(point))
    if not math.isfinite(value):
        raise ArithmeticError(f"cost returned a non-finite value at {tuple(point)}")
    return value


def finite_difference_gradient(
    f: Callable[[np.ndarray], float],
    x: Sequence[float],
    h: float = 1e-6,
) -> np.ndarray:
    """Central-difference gradient estimate, one axis at a time."""
    x = np.asarray(x, dtype=float)
    grad = np.zeros_like(x)
    for axis in range(x.size):
        step = np.zeros_like(x)
        step[axis] = h
        grad[axis] = (f(x + step) - f(x - step)) / (2.0 * h)
    return grad
