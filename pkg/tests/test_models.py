"""Tests for the four/five-mode truncations and closed-form orbits."""

import io
import math
from fractions import Fraction

import numpy as np
import pytest

from eulerlab.lattice import interaction_coefficient_exact
from eulerlab.models import (
    CONSTANTS,
    Branch,
    FiveModeState,
    HomoclinicParams,
    STATE_COLUMNS,
    five_mode_rhs,
    five_mode_rhs_array,
    fixed_point,
    four_mode_matrix,
    homoclinic_derivative,
    homoclinic_state,
    invariants,
    invariants_array,
    orbit_residual,
    write_trajectory_csv,
)
from eulerlab.ode import Trajectory, integrate

KHAT = (-3, -2)
P = (1, 1)


def member(n):
    return (KHAT[0] + n * P[0], KHAT[1] + n * P[1])


def quadruple(gamma):
    """Closed-form eigenvalues of the four-mode linearization."""
    out = []
    for s1 in (1.0, -1.0):
        for s2 in (1.0, -1.0):
            out.append(s1 * gamma / (2 * math.sqrt(10)) * np.sqrt(complex(1.0, s2 * math.sqrt(35))))
    return out


def sorted_c(values):
    return sorted(values, key=lambda z: (round(z.real, 10), round(z.imag, 10)))


class TestConstants:
    def test_table_identities(self):
        assert CONSTANTS.a12 == CONSTANTS.a1 - CONSTANTS.a2
        assert CONSTANTS.a23 == 0
        assert CONSTANTS.a34 == -CONSTANTS.a12
        assert CONSTANTS.a3 == CONSTANTS.a2 and CONSTANTS.a4 == CONSTANTS.a1

    def test_doubled_interaction_coefficients(self):
        # each constant is exactly twice the triad coefficient at its arguments
        assert CONSTANTS.a1 == 2 * interaction_coefficient_exact(P, member(1))
        assert CONSTANTS.a2 == 2 * interaction_coefficient_exact(P, member(2))
        assert CONSTANTS.a3 == 2 * interaction_coefficient_exact(P, member(3))
        assert CONSTANTS.a4 == 2 * interaction_coefficient_exact(P, member(4))
        assert CONSTANTS.a12 == 2 * interaction_coefficient_exact(member(1), member(2))
        assert CONSTANTS.a23 == 2 * interaction_coefficient_exact(member(2), member(3))
        assert CONSTANTS.a34 == 2 * interaction_coefficient_exact(member(3), member(4))
        assert CONSTANTS.a1 == Fraction(-3, 10)
        assert CONSTANTS.a2 == Fraction(1, 2)
        assert CONSTANTS.a12 == Fraction(-4, 5)


class TestFourModeMatrix:
    def test_characteristic_polynomial(self):
        for gamma in (1.0, 1.3):
            coeffs = np.poly(four_mode_matrix(gamma))
            expect = [1.0, 0.0, -(gamma**2) / 20.0, 0.0, 9.0 * gamma**4 / 400.0]
            assert np.allclose(coeffs, expect, atol=1e-12)

    def test_eigenvalues_match_closed_form(self):
        for gamma in (1.0, 0.4):
            ev = sorted_c(np.linalg.eigvals(four_mode_matrix(gamma)))
            ref = sorted_c(quadruple(gamma))
            assert max(abs(a - b) for a, b in zip(ev, ref)) < 1e-12

    def test_printed_modulus_and_angle(self):
        ev = np.linalg.eigvals(four_mode_matrix(1.0))
        lam = max(ev, key=lambda z: (z.real, z.imag))
        assert abs(abs(lam) / 0.5 - 0.7746) < 5e-5
        assert abs(np.angle(lam) - math.atan(0.845)) < 1e-3


class TestFiveModeRhs:
    def test_fixed_point(self):
        rhs = five_mode_rhs(fixed_point(1.7))
        assert rhs.as_array().tolist() == [0.0] * 7

    def test_jacobian_matches_four_mode_matrix(self):
        gamma = 0.9
        base = fixed_point(gamma).as_array()
        h = 1e-6
        jac = np.zeros((4, 4))
        for j in range(4):
            plus = base.copy()
            minus = base.copy()
            plus[j] += h
            minus[j] -= h
            diff = (five_mode_rhs_array(plus) - five_mode_rhs_array(minus)) / (2 * h)
            jac[:, j] = diff[:4]
        assert np.max(np.abs(jac - four_mode_matrix(gamma))) < 1e-6

    def test_invariant_gradients_orthogonal(self):
        a1, a2, a12 = float(CONSTANTS.a1), float(CONSTANTS.a2), float(CONSTANTS.a12)
        rng = np.random.default_rng(31)
        for _ in range(1000):
            y = rng.standard_normal(7)
            w1, w2, w3, w4, wp = y[:5]
            rhs = five_mode_rhs_array(y)[:5]
            grads = {
                "I": np.array([2 * a12 * w3, 2 * a12 * w4, 2 * a12 * w1, 2 * a12 * w2, 2 * a2 * wp]),
                "U": np.array([2 * a1 * w1, 2 * a2 * w2, 2 * a2 * w3, 2 * a1 * w4, 0.0]),
                "J": np.array([2 * w1, 2 * w2, 2 * w3, 2 * w4, 2 * wp]),
            }
            for grad in grads.values():
                scale = np.linalg.norm(grad) * np.linalg.norm(rhs)
                assert abs(grad @ rhs) < 1e-13 * max(scale, 1e-30)


class TestInvariants:
    def test_fixed_point_values(self):
        gamma = 1.4
        a2 = float(CONSTANTS.a2)
        for sign in (1.0, -1.0):
            vals = invariants(fixed_point(sign * gamma))
            assert vals[0] == pytest.approx(a2 * gamma**2, rel=1e-15)
            assert vals[1] == 0.0
            assert vals[2] == pytest.approx(gamma**2, rel=1e-15)

    def test_decoupled_pair_excluded(self):
        with_passengers = FiveModeState(0.1, 0.2, 0.3, 0.4, 0.5, w0=9.0, w5=-9.0)
        without = FiveModeState(0.1, 0.2, 0.3, 0.4, 0.5)
        assert invariants(with_passengers) == invariants(without)


class TestHomoclinicParams:
    def test_kappa_value(self):
        plus = HomoclinicParams(gamma=1.0)
        minus = HomoclinicParams(gamma=1.0, branch=Branch.KAPPA_NEGATIVE)
        assert plus.kappa == pytest.approx(math.sqrt(7.0 / 80.0), rel=1e-15)
        assert minus.kappa == -plus.kappa

    def test_beta_and_alpha(self):
        params = HomoclinicParams(gamma=1.0)
        assert params.beta == pytest.approx(-0.5 / (2 * math.sqrt(7.0 / 80.0)), rel=1e-15)
        assert params.beta == pytest.approx(-0.8451542547285166, rel=1e-12)
        expect_alpha = 0.3 / params.kappa * math.sqrt(0.5 / 0.8)
        assert params.alpha == pytest.approx(expect_alpha, rel=1e-14)

    def test_phase_sum_branches(self):
        arcsin_term = math.asin(0.5 * math.sqrt(0.5 / 0.3))
        assert HomoclinicParams(gamma=1.0).phase_sum == pytest.approx(-arcsin_term, rel=1e-15)
        minus = HomoclinicParams(gamma=1.0, branch=Branch.KAPPA_NEGATIVE)
        assert minus.phase_sum == pytest.approx(math.pi + arcsin_term, rel=1e-15)


class TestHomoclinicState:
    def test_turning_point(self):
        gamma = 1.0
        state = homoclinic_state(0.0, HomoclinicParams(gamma=gamma, tau0=0.0))
        assert state.wp == 0.0
        r = math.hypot(state.w1, state.w4)
        rho = math.hypot(state.w2, state.w3)
        assert r == pytest.approx(math.sqrt(5.0 / 8.0) * gamma, rel=1e-14)
        assert rho == pytest.approx(math.sqrt(3.0 / 5.0) * r, rel=1e-14)

    def test_limits_reach_fixed_point_pair(self):
        params = HomoclinicParams(gamma=1.5, theta0=0.3)
        kg = params.kappa * params.gamma
        for sign in (1.0, -1.0):
            t = (sign * 20.0 - params.tau0) / kg
            s = homoclinic_state(t, params).as_array()
            target = fixed_point(sign * params.gamma).as_array()
            assert np.max(np.abs(s - target)) < 1e-6

    def test_gamma_zero_rejected(self):
        with pytest.raises(ValueError, match="gamma"):
            homoclinic_state(0.0, HomoclinicParams(gamma=0.0))

    def test_invariants_along_orbit(self):
        a2 = float(CONSTANTS.a2)
        for branch in Branch:
            params = HomoclinicParams(gamma=1.2, tau0=0.4, theta0=2.5, branch=branch)
            kg = params.kappa * params.gamma
            t = (np.linspace(-10, 10, 501) - params.tau0) / kg
            states = np.stack([homoclinic_state(ti, params).as_array() for ti in t])
            inv = invariants_array(states.T)
            g2 = params.gamma**2
            assert np.max(np.abs(inv[0] - a2 * g2)) < 1e-12
            assert np.max(np.abs(inv[1])) < 1e-12
            assert np.max(np.abs(inv[2] - g2)) < 1e-12
            # the five coupled coordinates stay on the sphere of radius gamma
            sphere = np.sum(states[:, :5] ** 2, axis=1)
            assert np.max(np.abs(sphere - g2)) < 1e-12


class TestOrbitResidual:
    def test_residual_small_across_parameters(self):
        tau = np.linspace(-10.0, 10.0, 2001)
        for branch in Branch:
            for gamma in (0.5, 1.0, 2.0):
                for theta0 in (0.0, 1.0, 2.5):
                    params = HomoclinicParams(gamma=gamma, theta0=theta0, branch=branch)
                    report = orbit_residual(params, tau)
                    assert report.max_residual < 1e-9
                    assert report.fd_max_residual < 1e-5
                    assert max(report.invariant_deviation) < 1e-12
                    assert report.orbit_type == "heteroclinic-pair"

    def test_analytic_derivative_matches_rhs_pointwise(self):
        params = HomoclinicParams(gamma=1.0, tau0=-1.0, theta0=0.5)
        d = homoclinic_derivative(2.0, params).as_array()
        s = homoclinic_state(2.0, params).as_array()
        assert np.max(np.abs(d - five_mode_rhs_array(s))) < 1e-14

    def test_gamma_zero_degenerate(self):
        report = orbit_residual(HomoclinicParams(gamma=0.0), np.linspace(-5, 5, 11))
        assert report.degenerate
        assert report.max_residual == 0.0

    def test_shadowing_by_integration(self):
        params = HomoclinicParams(gamma=1.0)
        kg = params.kappa * params.gamma
        t0 = -8.0 / kg
        t1 = 8.0 / kg
        y0 = homoclinic_state(t0, params).as_array()
        traj = integrate(lambda t, y: five_mode_rhs_array(y), y0, t0, t1, tol=1e-12)
        worst = 0.0
        for t, y in zip(traj.t, traj.y):
            ref = homoclinic_state(t, params).as_array()
            worst = max(worst, float(np.max(np.abs(y - ref))))
        assert worst < 1e-4


class TestTrajectoryCsv:
    def test_header_and_round_trip(self):
        t = np.array([0.0, 0.5])
        y = np.array([[0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7],
                      [1.0, -1.0, 0.25, 1e-17, 3.0, 0.0, -2.5]])
        buf = io.StringIO()
        write_trajectory_csv(Trajectory(t, y), buf)
        lines = buf.getvalue().strip().split("\n")
        assert lines[0] == "t," + ",".join(STATE_COLUMNS) + ",I,U,J"
        parsed = [float(v) for v in lines[2].split(",")]
        assert parsed[0] == 0.5
        assert parsed[1:8] == y[1].tolist()
        expect = invariants(FiveModeState.from_array(y[1]))
        assert parsed[8:] == list(expect)
