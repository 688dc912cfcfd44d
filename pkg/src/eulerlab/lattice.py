"""Wave-vector lattice form of 2D incompressible Euler flow.

On the 2*pi-periodic torus with zero-mean velocity, the vorticity is a
Fourier sum over the integer lattice (Z^2 minus the origin) and the
advection equation turns into the quadratic interaction system

    d/dt omega_k = sum over ordered pairs p + q = k of A(p, q) omega_p omega_q,

with the triad coefficient

    A(p, q) = (1/|q|^2 - 1/|p|^2) * (p1*q2 - p2*q1) / 2.

A is symmetric (both factors flip sign under a swap), so the ordered-pair
sum equals twice the sum over unordered triads.  A vanishes whenever the
legs are parallel or have equal length, which is what makes single-mode
states exact steady flows.

States come in two bases.  Exponential states store a complex amplitude
for every member of a finite symmetric mode set and satisfy the reality
condition omega_{-k} = conj(omega_k).  Cosine states store one real
amplitude per canonical half-lattice representative; their dynamics are
evaluated by conjugation with the basis change omega^exp_{+-k} =
omega^cos_k / 2, so there is a single implementation of the triad sum.

Coefficients are computed in exact rational arithmetic and rounded once,
so identities between small-denominator values hold exactly in tests.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from types import MappingProxyType
from typing import Mapping

__all__ = [
    "WaveVector",
    "Basis",
    "ModeState",
    "canonical_rep",
    "cross",
    "norm_sq",
    "interaction_coefficient",
    "interaction_coefficient_exact",
    "euler_rhs",
    "cosine_rhs",
    "to_exponential",
    "to_cosine",
    "quadratic_functionals",
]

WaveVector = tuple[int, int]

#: Relative tolerance for the reality condition of exponential states.
REALITY_TOL = 1e-12


class Basis(Enum):
    """Amplitude basis of a :class:`ModeState`."""

    EXPONENTIAL = "exp"
    COSINE = "cos"


def _check_wavevector(k) -> WaveVector:
    k = (int(k[0]), int(k[1]))
    if k == (0, 0):
        raise ValueError("wave vector (0, 0) is not on the lattice")
    return k


def norm_sq(k: WaveVector) -> int:
    """Squared Euclidean length k1^2 + k2^2."""
    return k[0] * k[0] + k[1] * k[1]


def cross(p: WaveVector, q: WaveVector) -> int:
    """Planar cross product p1*q2 - p2*q1."""
    return p[0] * q[1] - p[1] * q[0]


def canonical_rep(k: WaveVector) -> WaveVector:
    """Representative of the pair {k, -k}: k1 > 0, or k1 == 0 and k2 > 0."""
    if k[0] > 0 or (k[0] == 0 and k[1] > 0):
        return k
    return (-k[0], -k[1])


@lru_cache(maxsize=None)
def interaction_coefficient_exact(p: WaveVector, q: WaveVector) -> Fraction:
    """Triad coefficient A(p, q) as an exact rational.

    A(p, q) = (1/|q|^2 - 1/|p|^2) * (p1*q2 - p2*q1) / 2, symmetric in its
    arguments.  Raises ValueError if either argument is the zero vector.
    """
    p = _check_wavevector(p)
    q = _check_wavevector(q)
    factor = Fraction(1, norm_sq(q)) - Fraction(1, norm_sq(p))
    return Fraction(cross(p, q), 2) * factor


def interaction_coefficient(p, q) -> float:
    """A(p, q) in double precision (exact rational, rounded once)."""
    return float(interaction_coefficient_exact(tuple(p), tuple(q)))


@dataclass(frozen=True)
class ModeState:
    """Finite vorticity state: a map from wave vectors to amplitudes.

    Build states through :meth:`exponential` or :meth:`cosine`; those
    constructors validate the basis invariants (zero mode absent,
    symmetric support and reality for exponential states, canonical
    half-lattice keys with real values for cosine states).  Instances
    are immutable.
    """

    basis: Basis
    amplitudes: Mapping[WaveVector, complex]

    def __post_init__(self):
        object.__setattr__(self, "amplitudes", MappingProxyType(dict(self.amplitudes)))

    @classmethod
    def exponential(cls, amplitudes: Mapping) -> "ModeState":
        """Exponential-basis state; validates symmetry and reality."""
        amps = {_check_wavevector(k): complex(w) for k, w in amplitudes.items()}
        for k, w in amps.items():
            mk = (-k[0], -k[1])
            if mk not in amps:
                raise ValueError(f"mode set is not symmetric: {k} stored but {mk} missing")
            scale = max(abs(w), 1.0)
            if abs(amps[mk] - w.conjugate()) > REALITY_TOL * scale:
                raise ValueError(f"reality condition violated at {k}")
        return cls(Basis.EXPONENTIAL, amps)

    @classmethod
    def cosine(cls, amplitudes: Mapping) -> "ModeState":
        """Cosine-basis state keyed by canonical half-lattice representatives."""
        amps = {}
        for k, w in amplitudes.items():
            k = _check_wavevector(k)
            if k != canonical_rep(k):
                raise ValueError(f"{k} is not a canonical half-lattice representative")
            w = complex(w)
            if w.imag != 0.0:
                raise ValueError(f"cosine amplitude at {k} must be real")
            amps[k] = w.real
        return cls(Basis.COSINE, amps)

    @property
    def mode_set(self) -> frozenset[WaveVector]:
        return frozenset(self.amplitudes)

    def amplitude(self, k) -> complex:
        """Stored amplitude at k, or 0 for modes outside the support."""
        return complex(self.amplitudes.get((int(k[0]), int(k[1])), 0.0))

    def to_json(self) -> str:
        """Serialize to the {"basis": ..., "modes": [...]} wire format."""
        modes = []
        for k in sorted(self.amplitudes):
            w = complex(self.amplitudes[k])
            entry: dict = {"k": [k[0], k[1]], "re": w.real}
            if self.basis is Basis.EXPONENTIAL:
                entry["im"] = w.imag
            modes.append(entry)
        return json.dumps({"basis": self.basis.value, "modes": modes}, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ModeState":
        doc = json.loads(text)
        basis = Basis(doc["basis"])
        if basis is Basis.EXPONENTIAL:
            amps = {tuple(m["k"]): complex(m["re"], m.get("im", 0.0)) for m in doc["modes"]}
            return cls.exponential(amps)
        return cls.cosine({tuple(m["k"]): m["re"] for m in doc["modes"]})


def to_exponential(state: ModeState) -> ModeState:
    """Basis change cosine -> exponential (omega_{+-k} = c_k / 2)."""
    if state.basis is Basis.EXPONENTIAL:
        return state
    amps: dict[WaveVector, complex] = {}
    for k, c in state.amplitudes.items():
        amps[k] = complex(c / 2.0)
        amps[(-k[0], -k[1])] = complex(c / 2.0)
    return ModeState(Basis.EXPONENTIAL, amps)


def to_cosine(state: ModeState) -> ModeState:
    """Basis change exponential -> cosine; requires real amplitudes."""
    if state.basis is Basis.COSINE:
        return state
    amps: dict[WaveVector, float] = {}
    for k in state.amplitudes:
        rep = canonical_rep(k)
        if rep in amps:
            continue
        c = 2.0 * complex(state.amplitudes[rep])
        if abs(c.imag) > REALITY_TOL * max(abs(c), 1.0):
            raise ValueError(f"amplitude at {rep} is not real; state has no cosine form")
        amps[rep] = c.real
    return ModeState(Basis.COSINE, amps)


@lru_cache(maxsize=128)
def _triad_table(mode_set: frozenset) -> tuple:
    """Ordered pairs (p, q, p + q, A(p, q)) staying inside the mode set."""
    modes = sorted(mode_set)
    inset = set(modes)
    table = []
    for p in modes:
        for q in modes:
            k = (p[0] + q[0], p[1] + q[1])
            if k == (0, 0) or k not in inset:
                continue
            a = float(interaction_coefficient_exact(p, q))
            if a != 0.0:
                table.append((p, q, k, a))
    return tuple(table)


def euler_rhs(state: ModeState) -> ModeState:
    """Triad interaction sum on the state's mode set.

    For each k in the mode set returns

        d/dt omega_k = sum_{p + q = k} A(p, q) omega_p omega_q

    over ordered pairs (p, q) drawn from the mode set; triads leaving the
    set are discarded (Galerkin truncation).  Reality of the input is
    preserved.  Requires an exponential-basis state on a symmetric set.
    """
    if state.basis is not Basis.EXPONENTIAL:
        raise ValueError("euler_rhs requires an exponential-basis state")
    amps = state.amplitudes
    if any((-k[0], -k[1]) not in amps for k in amps):
        raise ValueError("mode set must be symmetric under negation")
    out = {k: 0j for k in amps}
    for p, q, k, a in _triad_table(state.mode_set):
        out[k] += a * amps[p] * amps[q]
    return ModeState(Basis.EXPONENTIAL, out)


def cosine_rhs(state: ModeState) -> ModeState:
    """Triad dynamics in the cosine basis.

    Implemented by conjugation: map to exponential amplitudes, apply
    :func:`euler_rhs`, map back.  Cosine states have real exponential
    amplitudes, so the result is exactly real again.
    """
    if state.basis is not Basis.COSINE:
        raise ValueError("cosine_rhs requires a cosine-basis state")
    return to_cosine(euler_rhs(to_exponential(state)))


def quadratic_functionals(state: ModeState) -> tuple[float, float]:
    """(energy, enstrophy) of a state.

    Energy is sum |k|^-2 |omega_k|^2 and enstrophy sum |omega_k|^2 over
    the stored exponential modes; cosine states are summed over their
    exponential image.
    """
    exp_state = to_exponential(state)
    energy = 0.0
    enstrophy = 0.0
    for k, w in exp_state.amplitudes.items():
        m = abs(w) ** 2
        enstrophy += m
        energy += m / norm_sq(k)
    return energy, enstrophy
