"""Four- and five-mode truncations of the triad system and their orbits.

The truncation keeps the modes khat + n*p, n = 1..4, of the lattice line
through khat = (-3, -2) with step p = (1, 1), together with the pumping
mode at p.  In the cosine setting the couplings reduce to two rationals

    A1 = -3/10,   A2 = 1/2,   A12 = A1 - A2 = -4/5,

each exactly twice the triad coefficient A(., .) at the matching
arguments (a tested identity).  The five-mode system

    w1' = -A2 wp w2            w2' = A1 wp w1 - A2 wp w3
    w3' =  A2 wp w2 - A1 wp w4 w4' =  A2 wp w3
    wp' =  A12 (w3 w4 - w1 w2)

carries three conserved quantities

    I = 2 A12 (w1 w3 + w2 w4) + A2 wp^2
    U = A1 (w1^2 + w4^2) + A2 (w2^2 + w3^2)
    J = wp^2 + w1^2 + w2^2 + w3^2 + w4^2   (the enstrophy),

and two decoupled passengers w0' = -A1 wp w1, w5' = A1 wp w4.  The level
set I = A2 G^2, U = 0, J = G^2 through the fixed-point pair wp = +-G
carries closed-form orbits, spirals on the sphere J = G^2 connecting the
two fixed points; reports label them heteroclinic-pair orbits, though
with respect to the whole line of fixed points they are traditionally
called homoclinic.  In polar coordinates w1 = r cos(theta),
w4 = r sin(theta), w2 = rho cos(vartheta), w3 = rho sin(vartheta):

    tau   = kappa G t + tau0,          wp    = G tanh(tau),
    r     = sqrt(A2/(A2-A1)) G sech(tau),    rho = sqrt(-A1/A2) r,
    theta = -(A2/(2 kappa)) log cosh(tau) + theta0,
    theta + vartheta = const per branch,  kappa = +-sqrt(-A1 A2) sqrt(1 + A2/(4 A1)).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import IO, Iterable

import numpy as np

from .ode import Trajectory

__all__ = [
    "ModelConstants",
    "CONSTANTS",
    "FiveModeState",
    "STATE_COLUMNS",
    "Branch",
    "HomoclinicParams",
    "four_mode_matrix",
    "five_mode_rhs",
    "five_mode_rhs_array",
    "invariants",
    "invariants_array",
    "fixed_point",
    "homoclinic_state",
    "homoclinic_derivative",
    "orbit_residual",
    "OrbitResidualReport",
    "write_trajectory_csv",
]


@dataclass(frozen=True)
class ModelConstants:
    """Coupling constants of the truncation, as exact rationals."""

    a1: Fraction = Fraction(-3, 10)
    a2: Fraction = Fraction(1, 2)
    a3: Fraction = Fraction(1, 2)
    a4: Fraction = Fraction(-3, 10)
    a12: Fraction = Fraction(-4, 5)
    a23: Fraction = Fraction(0)
    a34: Fraction = Fraction(4, 5)

    def __post_init__(self):
        assert self.a3 == self.a2 and self.a4 == self.a1
        assert self.a12 == self.a1 - self.a2
        assert self.a23 == 0 and self.a34 == -self.a12


CONSTANTS = ModelConstants()

_A1 = float(CONSTANTS.a1)
_A2 = float(CONSTANTS.a2)
_A12 = float(CONSTANTS.a12)

#: Column order used by state arrays and trajectory files.
STATE_COLUMNS = ("w1", "w2", "w3", "w4", "wp", "w0", "w5")


@dataclass(frozen=True)
class FiveModeState:
    """Amplitudes of the truncation; w0 and w5 are the decoupled pair."""

    w1: float
    w2: float
    w3: float
    w4: float
    wp: float
    w0: float = 0.0
    w5: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.w1, self.w2, self.w3, self.w4, self.wp, self.w0, self.w5])

    @classmethod
    def from_array(cls, y) -> "FiveModeState":
        return cls(*(float(v) for v in np.asarray(y)))


def fixed_point(gamma: float) -> FiveModeState:
    """The steady state with all class amplitudes zero and wp = gamma."""
    return FiveModeState(0.0, 0.0, 0.0, 0.0, float(gamma))


def four_mode_matrix(gamma: float) -> np.ndarray:
    """Linearization at the fixed point, restricted to (w1, w2, w3, w4)."""
    g = float(gamma)
    return g * np.array(
        [
            [0.0, -_A2, 0.0, 0.0],
            [_A1, 0.0, -_A2, 0.0],
            [0.0, _A2, 0.0, -_A1],
            [0.0, 0.0, _A2, 0.0],
        ]
    )


def five_mode_rhs_array(y: np.ndarray) -> np.ndarray:
    """Vector field in the STATE_COLUMNS order; accepts shape (7,) or (7, m)."""
    y = np.asarray(y, dtype=np.float64)
    w1, w2, w3, w4, wp, _, _ = y
    return np.stack(
        [
            -_A2 * wp * w2,
            _A1 * wp * w1 - _A2 * wp * w3,
            _A2 * wp * w2 - _A1 * wp * w4,
            _A2 * wp * w3,
            _A12 * (w3 * w4 - w1 * w2),
            -_A1 * wp * w1,
            _A1 * wp * w4,
        ]
    )


def five_mode_rhs(state: FiveModeState) -> FiveModeState:
    """Time derivative of a five-mode state (decoupled pair included)."""
    return FiveModeState.from_array(five_mode_rhs_array(state.as_array()))


def invariants_array(y: np.ndarray) -> np.ndarray:
    """(I, U, J) for a state array of shape (7,) or (7, m)."""
    y = np.asarray(y, dtype=np.float64)
    w1, w2, w3, w4, wp = y[0], y[1], y[2], y[3], y[4]
    inv_i = 2.0 * _A12 * (w1 * w3 + w2 * w4) + _A2 * wp * wp
    inv_u = _A1 * (w1 * w1 + w4 * w4) + _A2 * (w2 * w2 + w3 * w3)
    inv_j = wp * wp + w1 * w1 + w2 * w2 + w3 * w3 + w4 * w4
    return np.stack([inv_i, inv_u, inv_j])


def invariants(state: FiveModeState) -> tuple[float, float, float]:
    """Conserved quantities (I, U, J); w0 and w5 do not enter."""
    vals = invariants_array(state.as_array())
    return float(vals[0]), float(vals[1]), float(vals[2])


class Branch(Enum):
    """Sign branch of the orbit's angular speed kappa."""

    KAPPA_POSITIVE = "plus"
    KAPPA_NEGATIVE = "minus"


def _log_cosh(tau: np.ndarray) -> np.ndarray:
    a = np.abs(tau)
    return a + np.log1p(np.exp(-2.0 * a)) - math.log(2.0)


def _sech(tau: np.ndarray) -> np.ndarray:
    e = np.exp(-np.abs(tau))
    return 2.0 * e / (1.0 + e * e)


@dataclass(frozen=True)
class HomoclinicParams:
    """Parameters of a closed-form orbit: amplitude, phases, and branch.

    ``tau0`` and ``theta0`` parametrize the two-dimensional invariant
    manifold; the branch selects the sign of kappa.  The closed-form
    state requires gamma != 0 (the time scale is kappa * gamma).
    """

    gamma: float
    tau0: float = 0.0
    theta0: float = 0.0
    branch: Branch = Branch.KAPPA_POSITIVE

    @property
    def kappa(self) -> float:
        mag = math.sqrt(float(-CONSTANTS.a1 * CONSTANTS.a2 * (1 + CONSTANTS.a2 / (4 * CONSTANTS.a1))))
        return mag if self.branch is Branch.KAPPA_POSITIVE else -mag

    @property
    def beta(self) -> float:
        return -_A2 / (2.0 * self.kappa)

    @property
    def alpha(self) -> float:
        return -_A1 * self.gamma / self.kappa * math.sqrt(_A2 / (_A2 - _A1))

    @property
    def phase_sum(self) -> float:
        """The constant theta + vartheta of the branch."""
        s = math.asin(0.5 * math.sqrt(_A2 / (-_A1)))
        return -s if self.branch is Branch.KAPPA_POSITIVE else math.pi + s

    def tau(self, t):
        return self.kappa * self.gamma * np.asarray(t, dtype=np.float64) + self.tau0


def _orbit_arrays(tau: np.ndarray, params: HomoclinicParams) -> np.ndarray:
    """Closed-form state on a tau grid, rows in STATE_COLUMNS order."""
    g = params.gamma
    beta = params.beta
    sech = _sech(tau)
    wp = g * np.tanh(tau)
    r = math.sqrt(_A2 / (_A2 - _A1)) * g * sech
    rho = math.sqrt(-_A1 / _A2) * r
    theta = beta * _log_cosh(tau) + params.theta0
    vartheta = params.phase_sum - theta
    w1 = r * np.cos(theta)
    w4 = r * np.sin(theta)
    w2 = rho * np.cos(vartheta)
    w3 = rho * np.sin(vartheta)
    c = params.alpha * beta / (1.0 + beta * beta)
    w0 = c * sech * (np.sin(theta) - np.cos(theta) / beta)
    w5 = c * sech * (np.cos(theta) + np.sin(theta) / beta)
    return np.stack([w1, w2, w3, w4, wp, w0, w5])


def _orbit_derivative_arrays(tau: np.ndarray, params: HomoclinicParams) -> np.ndarray:
    """Exact time derivative of the closed-form state on a tau grid."""
    g = params.gamma
    kg = params.kappa * g
    beta = params.beta
    sech = _sech(tau)
    tanh = np.tanh(tau)
    w1, w2, w3, w4, _, _, _ = _orbit_arrays(tau, params)
    theta = beta * _log_cosh(tau) + params.theta0
    dwp = kg * g * sech * sech
    dw1 = kg * tanh * (-w1 - beta * w4)
    dw4 = kg * tanh * (-w4 + beta * w1)
    dw2 = kg * tanh * (-w2 + beta * w3)
    dw3 = kg * tanh * (-w3 - beta * w2)
    dw0 = kg * params.alpha * sech * tanh * np.cos(theta)
    dw5 = -kg * params.alpha * sech * tanh * np.sin(theta)
    return np.stack([dw1, dw2, dw3, dw4, dwp, dw0, dw5])


def homoclinic_state(t: float, params: HomoclinicParams) -> FiveModeState:
    """Closed-form orbit state at time t.

    As tau -> +-infinity the state approaches the fixed-point pair
    (wp -> +-gamma, everything else -> 0).  Raises ValueError when
    gamma == 0, where tau degenerates.
    """
    if params.gamma == 0.0:
        raise ValueError("closed-form orbit requires gamma != 0")
    return FiveModeState.from_array(_orbit_arrays(params.tau(t), params))


def homoclinic_derivative(t: float, params: HomoclinicParams) -> FiveModeState:
    """Exact time derivative of :func:`homoclinic_state` at time t."""
    if params.gamma == 0.0:
        raise ValueError("closed-form orbit requires gamma != 0")
    return FiveModeState.from_array(_orbit_derivative_arrays(params.tau(t), params))


@dataclass(frozen=True)
class OrbitResidualReport:
    """How well the closed-form orbit solves the five-mode system."""

    component_residuals: dict
    fd_max_residual: float
    invariant_deviation: tuple[float, float, float]
    degenerate: bool
    orbit_type: str = "heteroclinic-pair"

    @property
    def max_residual(self) -> float:
        return max(self.component_residuals.values()) if self.component_residuals else 0.0

    def as_dict(self) -> dict:
        return {
            "orbit_type": self.orbit_type,
            "max_residual": self.max_residual,
            "component_residuals": dict(self.component_residuals),
            "fd_max_residual": self.fd_max_residual,
            "invariant_deviation": list(self.invariant_deviation),
            "degenerate": self.degenerate,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True)


def orbit_residual(
    params: HomoclinicParams, tau_grid: Iterable[float], *, fd_step: float = 1e-6
) -> OrbitResidualReport:
    """Compare the orbit's exact time derivative with the vector field.

    At every grid point the analytic derivative of the closed form
    (tanh/sech/log-cosh differentiation, decoupled pair included) is
    checked against :func:`five_mode_rhs_array`; the report carries the
    max abs residual per component, a central finite-difference backstop
    (step ``fd_step``), and the deviation of (I, U, J) from the level
    (A2 gamma^2, 0, gamma^2).  gamma == 0 collapses the orbit to the
    fixed line and reports zero residuals.
    """
    tau = np.asarray(list(tau_grid), dtype=np.float64)
    names = STATE_COLUMNS
    if params.gamma == 0.0:
        return OrbitResidualReport(
            {name: 0.0 for name in names}, 0.0, (0.0, 0.0, 0.0), degenerate=True
        )
    states = _orbit_arrays(tau, params)
    analytic = _orbit_derivative_arrays(tau, params)
    rhs = five_mode_rhs_array(states)
    resid = np.abs(analytic - rhs)
    component = {name: float(np.max(resid[i])) for i, name in enumerate(names)}

    kg = params.kappa * params.gamma
    fd = (_orbit_arrays(tau + kg * fd_step, params) - _orbit_arrays(tau - kg * fd_step, params)) / (
        2.0 * fd_step
    )
    fd_max = float(np.max(np.abs(fd - rhs)))

    g2 = params.gamma * params.gamma
    inv = invariants_array(states)
    deviation = (
        float(np.max(np.abs(inv[0] - _A2 * g2))),
        float(np.max(np.abs(inv[1]))),
        float(np.max(np.abs(inv[2] - g2))),
    )
    return OrbitResidualReport(component, fd_max, deviation, degenerate=False)


def write_trajectory_csv(trajectory: Trajectory, target: IO[str] | str) -> None:
    """Write one row per accepted step: t, state columns, and I, U, J.

    Numbers carry 17 significant digits so the file round-trips doubles.
    """
    own = isinstance(target, str)
    handle = open(target, "w", newline="") if own else target
    try:
        handle.write("t," + ",".join(STATE_COLUMNS) + ",I,U,J\n")
        inv = invariants_array(trajectory.y.T)
        for i, t in enumerate(trajectory.t):
            row = [t, *trajectory.y[i], *inv[:, i]]
            handle.write(",".join(f"{v:.17g}" for v in row) + "\n")
    finally:
        if own:
            handle.close()
