"""Tests for the Runge-Kutta integrators."""

import math

import numpy as np
import pytest

from eulerlab.models import five_mode_rhs_array, invariants_array
from eulerlab.ode import IntegrationError, integrate


def five_mode(t, y):
    return five_mode_rhs_array(y)


class TestArguments:
    def test_exactly_one_control(self):
        with pytest.raises(ValueError, match="exactly one"):
            integrate(lambda t, y: -y, [1.0], 0.0, 1.0)
        with pytest.raises(ValueError, match="exactly one"):
            integrate(lambda t, y: -y, [1.0], 0.0, 1.0, dt=0.1, tol=1e-8)

    def test_degenerate_span(self):
        with pytest.raises(ValueError, match="differ"):
            integrate(lambda t, y: -y, [1.0], 1.0, 1.0, dt=0.1)

    def test_positive_controls(self):
        with pytest.raises(ValueError):
            integrate(lambda t, y: -y, [1.0], 0.0, 1.0, dt=-0.1)
        with pytest.raises(ValueError):
            integrate(lambda t, y: -y, [1.0], 0.0, 1.0, tol=0.0)


class TestRK4:
    def test_exponential_decay(self):
        traj = integrate(lambda t, y: -y, [1.0], 0.0, 1.0, dt=1e-3)
        assert abs(traj.y[-1, 0] - math.exp(-1.0)) < 1e-11
        assert traj.t[0] == 0.0 and traj.t[-1] == 1.0

    def test_step_count(self):
        traj = integrate(lambda t, y: -y, [1.0], 0.0, 1.0, dt=0.3)
        assert len(traj) == 5  # ceil(1/0.3) = 4 steps plus the initial point


class TestRK45:
    def test_oscillator_accuracy(self):
        def rhs(t, y):
            return np.array([y[1], -y[0]])

        traj = integrate(rhs, [1.0, 0.0], 0.0, 2 * math.pi, tol=1e-12)
        assert abs(traj.y[-1, 0] - 1.0) < 1e-9
        assert abs(traj.y[-1, 1]) < 1e-9

    def test_five_mode_invariant_drift(self):
        rng = np.random.default_rng(21)
        for _ in range(3):
            y0 = 0.5 * rng.standard_normal(7)
            traj = integrate(five_mode, y0, 0.0, 50.0, tol=1e-10)
            q = invariants_array(traj.y.T)
            drift = np.max(np.abs(q - q[:, :1]))
            assert drift / max(q[2, 0], 1e-30) < 1e-8

    def test_forward_backward_reversibility(self):
        rng = np.random.default_rng(22)
        y0 = 0.5 * rng.standard_normal(7)
        fwd = integrate(five_mode, y0, 0.0, 10.0, tol=1e-10)
        back = integrate(five_mode, fwd.y[-1], 10.0, 0.0, tol=1e-10)
        assert np.max(np.abs(back.y[-1] - y0)) < 1e-7

    def test_monotone_times(self):
        rng = np.random.default_rng(23)
        traj = integrate(five_mode, 0.5 * rng.standard_normal(7), 0.0, 5.0, tol=1e-8)
        assert np.all(np.diff(traj.t) > 0)

    def test_deterministic(self):
        y0 = np.array([0.1, -0.2, 0.3, 0.0, 1.0, 0.0, 0.0])
        a = integrate(five_mode, y0, 0.0, 7.0, tol=1e-9)
        b = integrate(five_mode, y0, 0.0, 7.0, tol=1e-9)
        assert np.array_equal(a.t, b.t)
        assert np.array_equal(a.y, b.y)

    def test_underflow_reports_partial_trajectory(self):
        # solution of y' = y^2, y(0) = 1 blows up at t = 1
        with pytest.raises(IntegrationError) as info:
            integrate(lambda t, y: y * y, [1.0], 0.0, 2.0, tol=1e-10)
        partial = info.value.trajectory
        assert len(partial) > 1
        assert partial.t[-1] < 1.0
