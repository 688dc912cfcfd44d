"""Explicit Runge-Kutta integration.

Two controls: a fixed step size runs the classical fourth-order scheme,
and a tolerance runs the Dormand-Prince 5(4) embedded pair, accepting a
step when the max-norm difference between the fifth- and fourth-order
solutions is at most the tolerance and propagating the fifth-order one.
Output is deterministic for identical inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = ["Trajectory", "IntegrationError", "integrate"]

# Dormand-Prince 5(4) tableau.
_DP_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_B4 = np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)

_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0
_SAFETY = 0.9


@dataclass(frozen=True)
class Trajectory:
    """Sampled solution: times (m,) and states (m, dim), one row per step."""

    t: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.float64)
        t.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "y", y)

    def __len__(self) -> int:
        return self.t.shape[0]


class IntegrationError(RuntimeError):
    """Adaptive stepping failed; ``trajectory`` holds the partial result."""

    def __init__(self, message: str, trajectory: Trajectory):
        super().__init__(message)
        self.trajectory = trajectory


def integrate(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    y0,
    t0: float,
    t1: float,
    *,
    dt: float | None = None,
    tol: float | None = None,
    max_steps: int = 1_000_000,
) -> Trajectory:
    """Integrate dy/dt = rhs(t, y) from t0 to t1 (either direction).

    Exactly one control must be given: ``dt`` (fixed-step RK4) or ``tol``
    (adaptive Dormand-Prince 5(4), per-step max-norm error at most tol).
    The trajectory records every accepted step including both endpoints.

    Raises :class:`IntegrationError` with the partial trajectory attached
    if the adaptive step size underflows or ``max_steps`` is exceeded.
    """
    if t0 == t1:
        raise ValueError("t0 and t1 must differ")
    if (dt is None) == (tol is None):
        raise ValueError("specify exactly one of dt (RK4) or tol (RK45)")
    y = np.asarray(y0, dtype=np.float64).copy()
    if dt is not None:
        if dt <= 0:
            raise ValueError("dt must be positive")
        return _rk4(rhs, y, float(t0), float(t1), float(dt))
    if tol <= 0:
        raise ValueError("tol must be positive")
    return _rk45(rhs, y, float(t0), float(t1), float(tol), max_steps)


def _rk4(rhs, y, t0, t1, dt) -> Trajectory:
    span = t1 - t0
    steps = max(1, math.ceil(abs(span) / dt))
    h = span / steps
    ts = [t0]
    ys = [y.copy()]
    t = t0
    for i in range(steps):
        k1 = np.asarray(rhs(t, y))
        k2 = np.asarray(rhs(t + 0.5 * h, y + 0.5 * h * k1))
        k3 = np.asarray(rhs(t + 0.5 * h, y + 0.5 * h * k2))
        k4 = np.asarray(rhs(t + h, y + h * k3))
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t = t0 + (i + 1) * h
        ts.append(t)
        ys.append(y.copy())
    return Trajectory(np.array(ts), np.array(ys))


def _rk45(rhs, y, t0, t1, tol, max_steps) -> Trajectory:
    direction = 1.0 if t1 > t0 else -1.0
    span = abs(t1 - t0)
    h = direction * span / 100.0
    t = t0
    ts = [t0]
    ys = [y.copy()]
    steps = 0
    k = [None] * 7
    while (t1 - t) * direction > 0:
        if abs(h) > abs(t1 - t):
            h = t1 - t
        if abs(h) < 1e-14 * max(1.0, abs(t)):
            raise IntegrationError(
                f"step size underflow at t = {t}",
                Trajectory(np.array(ts), np.array(ys)),
            )
        k[0] = np.asarray(rhs(t, y))
        for i in range(1, 7):
            yi = y + h * sum(a * k[j] for j, a in enumerate(_DP_A[i]))
            k[i] = np.asarray(rhs(t + _DP_C[i] * h, yi))
        stages = np.stack(k)
        y5 = y + h * (_DP_B5 @ stages)
        err = float(np.max(np.abs(h * ((_DP_B5 - _DP_B4) @ stages))))
        if err <= tol:
            t = t + h
            y = y5
            ts.append(t)
            ys.append(y.copy())
        steps += 1
        if steps > max_steps:
            raise IntegrationError(
                f"exceeded {max_steps} steps",
                Trajectory(np.array(ts), np.array(ys)),
            )
        factor = _MAX_FACTOR if err == 0.0 else _SAFETY * (tol / err) ** 0.2
        h *= min(_MAX_FACTOR, max(_MIN_FACTOR, factor))
    return Trajectory(np.array(ts), np.array(ys))
