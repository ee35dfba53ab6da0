"""Numerical kernels: ternary search, gradient descent, PSO, FD oracle."""

import math

import numpy as np
import pytest

from uavcover import (
    Bounds3,
    GdConfig,
    PsoConfig,
    TernaryConfig,
    finite_difference_gradient,
    gradient_descent_1d,
    pso,
    ternary_search,
)


class TestTernarySearch:
    def test_symmetric_parabola(self):
        x = ternary_search(lambda x: (x - 5) ** 2, TernaryConfig(0, 10, 1e-6))
        assert x == pytest.approx(5.0, abs=1e-6)

    def test_monotone_degenerate(self):
        x = ternary_search(lambda x: x, TernaryConfig(0, 1, 1e-3))
        assert x == pytest.approx(0.0, abs=1e-3)

    def test_non_finite_aborts(self):
        with pytest.raises(ArithmeticError):
            ternary_search(lambda x: math.inf, TernaryConfig(0, 1, 1e-3))

    def test_contraction_step_count(self):
        # interval shrinks by 2/3 each step: ceil(log1.5(span/precision)) steps,
        # two evaluations per step
        calls = 0

        def f(x):
            nonlocal calls
            calls += 1
            return (x - 2) ** 2

        span, precision = 9.0, 1e-4
        ternary_search(f, TernaryConfig(-1, 8, precision))
        steps = math.ceil(math.log(span / precision) / math.log(1.5))
        assert calls == 2 * steps

    def test_invalid_config(self):
        with pytest.raises(ValueError):
            TernaryConfig(1, 1, 1e-6)
        with pytest.raises(ValueError):
            TernaryConfig(0, 1, 0)


class TestGradientDescent:
    def test_quadratic_converges(self):
        x, trace = gradient_descent_1d(
            lambda x: 2 * (x - 3), GdConfig(initial_point=0.0, step_size=0.01), clamp=(-10, 10)
        )
        assert x == pytest.approx(3.0, abs=1e-3)
        assert len(trace) > 0

    def test_zero_gradient_returns_start(self):
        x, trace = gradient_descent_1d(lambda x: 0.0, GdConfig(initial_point=4.2), clamp=(0, 10))
        assert x == 4.2
        assert len(trace) == 1

    def test_nan_gradient_aborts(self):
        with pytest.raises(ArithmeticError):
            gradient_descent_1d(lambda x: math.nan, GdConfig(initial_point=0.0), clamp=(0, 1))

    def test_clamps_to_interval(self):
        x, _ = gradient_descent_1d(
            lambda x: 1.0, GdConfig(initial_point=0.5, step_size=1.0), clamp=(0.0, 1.0)
        )
        assert x == 0.0

    def test_objective_recorded_in_trace(self):
        _, trace = gradient_descent_1d(
            lambda x: 2 * (x - 3),
            GdConfig(initial_point=0.0),
            clamp=(-10, 10),
            objective=lambda x: (x - 3) ** 2,
        )
        assert all(math.isfinite(step.value) for step in trace.steps)
        assert trace.steps[-1].value < trace.steps[0].value


class TestPso:
    BOUNDS = Bounds3((0, 10), (0, 10), (0, 10))

    @staticmethod
    def bowl(p):
        return (p[0] - 1) ** 2 + (p[1] - 2) ** 2 + (p[2] - 3) ** 2

    def test_convex_bowl(self):
        best, cost, _ = pso(self.bowl, PsoConfig(bounds=self.BOUNDS, seed=0))
        assert np.allclose(best, (1, 2, 3), atol=1e-2)
        assert cost < 1e-3

    def test_global_best_non_increasing(self):
        _, _, trace = pso(self.bowl, PsoConfig(bounds=self.BOUNDS, seed=1))
        values = trace.values()
        assert all(b <= a for a, b in zip(values, values[1:]))

    def test_deterministic_traces(self):
        cfg = PsoConfig(bounds=self.BOUNDS, seed=123)
        a = pso(self.bowl, cfg)
        b = pso(self.bowl, cfg)
        assert a[0] == b[0]
        assert a[1] == b[1]
        assert a[2].steps == b[2].steps

    def test_particles_respect_bounds(self):
        seen = []

        def tracking(p):
            seen.append(tuple(p))
            return self.bowl(p)

        pso(tracking, PsoConfig(bounds=self.BOUNDS, seed=5, max_iterations=30))
        lo, hi = self.BOUNDS.as_arrays()
        points = np.array(seen)
        assert np.all(points >= lo - 1e-12) and np.all(points <= hi + 1e-12)

    def test_degenerate_point_bounds(self):
        point = Bounds3((2, 2), (3, 3), (4, 4))
        best, cost, _ = pso(self.bowl, PsoConfig(bounds=point, seed=0, max_iterations=5))
        assert best == (2.0, 3.0, 4.0)
        assert cost == self.bowl((2, 3, 4))

    def test_constriction_validity_enforced(self):
        with pytest.raises(ValueError):
            PsoConfig(bounds=self.BOUNDS, phi1=1.0, phi2=1.0)

    def test_constriction_coefficient_value(self):
        cfg = PsoConfig(bounds=self.BOUNDS)
        assert cfg.chi == pytest.approx(0.7298437881283576, rel=1e-12)

    def test_non_finite_cost_aborts(self):
        with pytest.raises(ArithmeticError):
            pso(lambda p: math.inf, PsoConfig(bounds=self.BOUNDS, seed=0, max_iterations=2))


class TestFiniteDifference:
    def test_square(self):
        grad = finite_difference_gradient(lambda x: float(x[0] ** 2), [3.0], h=1e-5)
        assert grad[0] == pytest.approx(6.0, abs=1e-8)

    def test_constant(self):
        grad = finite_difference_gradient(lambda x: 7.0, [1.0, 2.0, 3.0])
        assert np.all(grad == 0.0)

    def test_multivariate(self):
        f = lambda p: float(p[0] ** 2 + 3 * p[1] + math.sin(p[2]))
        grad = finite_difference_gradient(f, [1.0, -2.0, 0.5], h=1e-6)
        assert np.allclose(grad, [2.0, 3.0, math.cos(0.5)], atol=1e-8)
