"""Class decomposition of the linearized triad system and its spectra.

Linearized at the steady state carried by a single mode pair +-p, the
triad system decouples along lattice lines ("classes"): for a
representative khat, the modes khat + n*p form a chain in which x_n is
driven only by its neighbours,

    dx_n/dt = alpha_n x_{n-1} + beta_n x_{n+1},
    alpha_n = c * Gamma * A(p, khat + (n-1) p),
    beta_n  = c * conj(Gamma) * A(-p, khat + (n+1) p),

with A the triad coefficient and c a convention factor: ``formula`` uses
the coefficients literally (c = 1) while ``paper-table`` doubles them
(c = 2), matching the tabulated four-mode constants.  Spectra scale
linearly between the two conventions.

Each chain's essential spectrum is the imaginary segment i*[-2|b|, 2|b|]
with b = -|Gamma| (p1 khat2 - p2 khat1) / (2 |p|^2), scaled by c.  Point
spectrum can exist only when the class meets the closed disk |k| <= |p|,
and is symmetric about both axes, so eigenvalues come as real pairs,
imaginary pairs, quadruples, or zero.

Two independent routes compute the point spectrum: dense eigenvalues of
symmetric finite sections (LAPACK, via numpy), and zeros of a continued
fraction built from the decaying-ratio recurrences

    R_{n-1} = alpha_n / (lambda - beta_n R_n)   (downward from above),
    L_{n+1} = beta_n  / (lambda - alpha_n L_n)  (upward from below),

matched at a junction j through F(lambda) = lambda - alpha_j L_j -
beta_j R_j; square-summable eigenvectors exist exactly at F = 0.  The
two routes must agree, and tests enforce that.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .lattice import (
    WaveVector,
    _check_wavevector,
    cross,
    interaction_coefficient_exact,
    norm_sq,
)

__all__ = [
    "Convention",
    "ClassChain",
    "SpectrumReport",
    "CFEvaluationError",
    "class_members",
    "disk_intersection",
    "band_halfwidth",
    "band_distance",
    "chain_matrix",
    "truncated_eigenvalues",
    "cf_characteristic",
    "point_spectrum",
]

#: Eigenvalues closer to zero than this classify as "zero".
ZERO_TOL = 1e-10

#: Dimension cap for dense finite-section eigensolves.
DEFAULT_SIZE_CAP = 500


class Convention(Enum):
    """Coefficient normalization of a chain."""

    FORMULA = "formula"
    PAPER_TABLE = "paper-table"


class CFEvaluationError(ArithmeticError):
    """A continued-fraction denominator vanished; perturb lambda and retry."""


def _negate(k: WaveVector) -> WaveVector:
    return (-k[0], -k[1])


@dataclass(frozen=True)
class ClassChain:
    """One invariant chain: representative khat, step p, amplitude Gamma.

    ``sub_coefficient`` and ``super_coefficient`` give the couplings
    alpha_n and beta_n of the chain equation; both are zero when the
    neighbour or the row index falls on the excluded lattice origin
    (possible only for khat parallel to p, where every coefficient
    vanishes anyway because the cross product does).
    """

    khat: WaveVector
    p: WaveVector
    gamma: complex = 1.0
    convention: Convention = Convention.FORMULA

    def __post_init__(self):
        object.__setattr__(self, "khat", _check_wavevector(self.khat))
        object.__setattr__(self, "p", _check_wavevector(self.p))
        object.__setattr__(self, "gamma", complex(self.gamma))

    @property
    def scale(self) -> float:
        return 2.0 if self.convention is Convention.PAPER_TABLE else 1.0

    @property
    def parallel(self) -> bool:
        return cross(self.p, self.khat) == 0

    @property
    def excluded_index(self) -> int | None:
        """The integer n with khat + n*p = 0, if one exists."""
        p1, p2 = self.p
        k1, k2 = self.khat
        if p1 != 0:
            if k1 % p1:
                return None
            n = -k1 // p1
        else:
            if k1 != 0 or k2 % p2:
                return None
            n = -k2 // p2
        return n if (k1 + n * p1, k2 + n * p2) == (0, 0) else None

    def member(self, n: int) -> WaveVector | None:
        """khat + n*p, or None when that lands on the origin."""
        k = (self.khat[0] + n * self.p[0], self.khat[1] + n * self.p[1])
        return None if k == (0, 0) else k

    def sub_coefficient(self, n: int) -> complex:
        """alpha_n, the coupling of x_n to x_{n-1}."""
        if self.member(n) is None or self.member(n - 1) is None:
            return 0j
        a = float(interaction_coefficient_exact(self.p, self.member(n - 1)))
        return self.scale * self.gamma * a

    def super_coefficient(self, n: int) -> complex:
        """beta_n, the coupling of x_n to x_{n+1}."""
        if self.member(n) is None or self.member(n + 1) is None:
            return 0j
        a = float(interaction_coefficient_exact(_negate(self.p), self.member(n + 1)))
        return self.scale * self.gamma.conjugate() * a


def class_members(khat, p, n_min: int, n_max: int) -> list[WaveVector]:
    """Lattice-line members khat + n*p for n in [n_min, n_max].

    Indices whose member would be the origin are skipped (possible only
    for khat parallel to p).
    """
    khat = _check_wavevector(khat)
    p = _check_wavevector(p)
    if n_min > n_max:
        raise ValueError("n_min must not exceed n_max")
    out = []
    for n in range(n_min, n_max + 1):
        k = (khat[0] + n * p[0], khat[1] + n * p[1])
        if k != (0, 0):
            out.append(k)
    return out


def disk_intersection(khat, p) -> list[WaveVector]:
    """Members of the class with |k| <= |p|, ordered along the line.

    |khat + n*p|^2 grows quadratically in n, so the intersection is the
    integer slice of an interval.
    """
    khat = _check_wavevector(khat)
    p = _check_wavevector(p)
    a = norm_sq(p)
    b = 2 * (khat[0] * p[0] + khat[1] * p[1])
    c = norm_sq(khat) - norm_sq(p)
    disc = b * b - 4 * a * c
    if disc < 0:
        return []
    half = np.sqrt(float(disc)) / (2.0 * a)
    center = -b / (2.0 * a)
    lo = int(np.floor(center - half)) - 1
    hi = int(np.ceil(center + half)) + 1
    out = []
    for n in range(lo, hi + 1):
        k = (khat[0] + n * p[0], khat[1] + n * p[1])
        if k != (0, 0) and norm_sq(k) <= norm_sq(p):
            out.append(k)
    return out


def _signed_b(chain: ClassChain) -> float:
    """The band parameter b with its sign, in the chain's convention."""
    det = chain.p[0] * chain.khat[1] - chain.p[1] * chain.khat[0]
    return -0.5 * abs(chain.gamma) / norm_sq(chain.p) * det * chain.scale


def band_halfwidth(chain: ClassChain) -> float:
    """Half-width 2|b| of the essential spectrum segment i*[-2|b|, 2|b|]."""
    return 2.0 * abs(_signed_b(chain))


def band_distance(lam: complex, halfwidth: float) -> float:
    """Distance from lam to the segment i*[-halfwidth, halfwidth]."""
    x, y = lam.real, lam.imag
    if abs(y) <= halfwidth:
        return abs(x)
    return float(np.hypot(x, abs(y) - halfwidth))


def chain_matrix(chain: ClassChain, n_min: int, n_max: int) -> np.ndarray:
    """Finite section of the chain over the index window [n_min, n_max].

    Rows and columns are omitted for an excluded index.  Real dtype when
    Gamma is real, complex otherwise.
    """
    idx = [n for n in range(n_min, n_max + 1) if chain.member(n) is not None]
    dtype = np.float64 if chain.gamma.imag == 0.0 else np.complex128
    m = np.zeros((len(idx), len(idx)), dtype=dtype)
    pos = {n: i for i, n in enumerate(idx)}
    for n in idx:
        if n - 1 in pos:
            a = chain.sub_coefficient(n)
            m[pos[n], pos[n - 1]] = a.real if dtype is np.float64 else a
        if n + 1 in pos:
            b = chain.super_coefficient(n)
            m[pos[n], pos[n + 1]] = b.real if dtype is np.float64 else b
    return m


@dataclass(frozen=True)
class SpectrumReport:
    """Computed spectrum of one chain.

    ``eigenvalues``, ``classifications`` and ``residuals`` run in
    parallel; ``unresolved`` holds seeds the root finder could not
    polish below tolerance (reported, never silently dropped).
    """

    band_halfwidth: float
    eigenvalues: tuple[complex, ...]
    classifications: tuple[str, ...]
    residuals: tuple[float, ...]
    method: str
    convention: Convention
    unresolved: tuple[complex, ...] = field(default=())

    def as_dict(self) -> dict:
        return {
            "band": self.band_halfwidth,
            "method": self.method,
            "convention": self.convention.value,
            "eigenvalues": [
                {"re": ev.real, "im": ev.imag, "class": cls, "residual": res}
                for ev, cls, res in zip(self.eigenvalues, self.classifications, self.residuals)
            ],
            "unresolved": [{"re": z.real, "im": z.imag} for z in self.unresolved],
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True)


def _classify(lam: complex) -> str:
    if abs(lam) < ZERO_TOL:
        return "zero"
    if abs(lam.imag) < ZERO_TOL:
        return "real-pair"
    if abs(lam.real) < ZERO_TOL:
        return "imaginary-pair"
    return "quadruple"


def _sorted_report_order(values):
    return sorted(range(len(values)), key=lambda i: (values[i].real, values[i].imag))


def truncated_eigenvalues(
    chain: ClassChain, N: int, *, size_cap: int = DEFAULT_SIZE_CAP
) -> SpectrumReport:
    """Dense eigenvalues of the symmetric finite section over [-N, N].

    The independent oracle for the continued-fraction route.  Residuals
    are the defect norms ||M v - lambda v|| / ||v|| of the computed
    pairs.  Raises ValueError for N < 1 or N beyond ``size_cap``.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    if N > size_cap:
        raise ValueError(f"truncation half-width {N} exceeds the size cap {size_cap}")
    m = chain_matrix(chain, -N, N)
    values, vectors = np.linalg.eig(m)
    defect = m @ vectors - vectors * values
    residuals = np.linalg.norm(defect, axis=0) / np.linalg.norm(vectors, axis=0)
    order = _sorted_report_order([complex(v) for v in values])
    evs = tuple(complex(values[i]) for i in order)
    return SpectrumReport(
        band_halfwidth=band_halfwidth(chain),
        eigenvalues=evs,
        classifications=tuple(_classify(v) for v in evs),
        residuals=tuple(float(residuals[i]) for i in order),
        method=f"truncation-{N}",
        convention=chain.convention,
    )


def cf_characteristic(
    chain: ClassChain, lam: complex, depth: int = 400, junction: int = 0
) -> complex:
    """Continued-fraction characteristic function F(lambda) of the chain.

    Backward recurrences with decaying boundary data approximate the
    ratios of a square-summable eigenvector from both ends; F is the
    matching defect of the chain equation at the junction index, so
    F(lambda) = 0 exactly at point-spectrum eigenvalues.  Convergence in
    ``depth`` is geometric off the essential-spectrum segment.

    Raises :class:`CFEvaluationError` when a denominator falls below
    1e-300 in modulus (callers perturb lambda and retry).
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    if chain.member(junction) is None:
        raise ValueError("junction index is excluded from the chain")
    lam = complex(lam)
    j = junction
    r = 0j
    for n in range(j + depth, j, -1):
        den = lam - chain.super_coefficient(n) * r
        if abs(den) < 1e-300:
            raise CFEvaluationError(f"vanishing denominator at index {n}")
        r = chain.sub_coefficient(n) / den
    left = 0j
    for n in range(j - depth, j):
        den = lam - chain.sub_coefficient(n) * left
        if abs(den) < 1e-300:
            raise CFEvaluationError(f"vanishing denominator at index {n}")
        left = chain.super_coefficient(n) / den
    return lam - chain.sub_coefficient(j) * left - chain.super_coefficient(j) * r


def _muller(f, z0: complex, *, tol: float, max_iterations: int):
    """Muller iteration for a complex root near z0.

    Returns (best z, |f(best z)|); the caller decides whether the
    residual is acceptable.  Falls back to coordinate secant sweeps when
    the quadratic model degenerates.
    """

    def evaluate(z: complex) -> complex:
        for _ in range(4):
            try:
                return f(z)
            except CFEvaluationError:
                z = z * (1.0 + 1e-9) + 1e-12j
        raise CFEvaluationError("persistent denominator underflow")

    spread = 1e-6 * max(abs(z0), 1e-3)
    zs = [z0 + spread, z0 - spread, z0]
    try:
        fs = [evaluate(z) for z in zs]
    except CFEvaluationError:
        return z0, float("inf")
    best = min(zip(zs, fs), key=lambda zf: abs(zf[1]))
    for _ in range(max_iterations):
        z2, z1, z0_ = zs
        f2, f1, f0 = fs
        if abs(f0) < tol:
            return z0_, abs(f0)
        try:
            q = (z0_ - z1) / (z1 - z2)
            a = q * f0 - q * (1 + q) * f1 + q * q * f2
            b = (2 * q + 1) * f0 - (1 + q) ** 2 * f1 + q * q * f2
            c = (1 + q) * f0
            disc = np.sqrt(complex(b * b - 4 * a * c))
            den = b + disc if abs(b + disc) >= abs(b - disc) else b - disc
            if den == 0:
                break
            z_new = z0_ - (z0_ - z1) * (2 * c / den)
            f_new = evaluate(z_new)
        except (ZeroDivisionError, CFEvaluationError, FloatingPointError):
            break
        if not (np.isfinite(z_new.real) and np.isfinite(z_new.imag)):
            break
        zs = [z1, z0_, z_new]
        fs = [f1, f0, f_new]
        if abs(f_new) < abs(best[1]):
            best = (z_new, f_new)
    if abs(best[1]) < tol:
        return best[0], abs(best[1])
    return _coordinate_secant(evaluate, best[0], tol=tol, sweeps=max(4, max_iterations // 10))


def _coordinate_secant(evaluate, z0: complex, *, tol: float, sweeps: int):
    """Alternating secant updates along the real and imaginary axes."""
    z = z0
    try:
        fz = evaluate(z)
    except CFEvaluationError:
        return z0, float("inf")
    step = 1e-7 * max(abs(z), 1e-3)
    for _ in range(sweeps):
        for axis in (1.0, 1j):
            if abs(fz) < tol:
                return z, abs(fz)
            try:
                z_probe = z + axis * step
                f_probe = evaluate(z_probe)
                dfd = (f_probe - fz) / step
                if dfd == 0:
                    continue
                correction = fz / dfd
                shift = correction.real if axis == 1.0 else correction.imag * 1j
                z_new = z - shift
                f_new = evaluate(z_new)
            except (ZeroDivisionError, CFEvaluationError):
                continue
            if abs(f_new) < abs(fz):
                z, fz = z_new, f_new
    return z, abs(fz)


def point_spectrum(
    chain: ClassChain,
    tol: float = 1e-12,
    *,
    depth: int = 400,
    junction: int = 0,
    seed_truncation: int = 50,
    max_iterations: int = 200,
    band_margin: float = 1e-3,
    dedup_tol: float = 1e-8,
) -> SpectrumReport:
    """Point spectrum of a chain by continued-fraction root finding.

    Seeds come from the finite-section eigenvalues at half-width
    ``seed_truncation``, filtered to those further than ``band_margin``
    from the essential-spectrum segment; each seed is polished with
    Muller's method on :func:`cf_characteristic` until |F| < tol.  The
    found roots are deduplicated, completed into orbits under
    lambda -> -lambda and lambda -> conj(lambda) (each completion is
    polished independently), and classified.  Seeds or completions that
    fail to converge are listed in ``unresolved``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    halfwidth = band_halfwidth(chain)
    if chain.parallel:
        return SpectrumReport(
            band_halfwidth=halfwidth,
            eigenvalues=(),
            classifications=(),
            residuals=(),
            method="cf",
            convention=chain.convention,
        )

    def f(z: complex) -> complex:
        return cf_characteristic(chain, z, depth, junction)

    seed_report = truncated_eigenvalues(chain, seed_truncation)
    seeds: list[complex] = []
    for ev in seed_report.eigenvalues:
        if band_distance(ev, halfwidth) <= band_margin:
            continue
        if all(abs(ev - s) > dedup_tol for s in seeds):
            seeds.append(ev)

    roots: list[complex] = []
    unresolved: list[complex] = []
    for seed in seeds:
        z, fz = _muller(f, seed, tol=tol, max_iterations=max_iterations)
        if not fz < tol:
            unresolved.append(seed)
            continue
        if band_distance(z, halfwidth) <= band_margin:
            continue
        if all(abs(z - r) > dedup_tol for r in roots):
            roots.append(z)

    for root in list(roots):
        for candidate in (-root, root.conjugate(), -root.conjugate()):
            if any(abs(candidate - r) <= dedup_tol for r in roots):
                continue
            z, fz = _muller(f, candidate, tol=tol, max_iterations=max_iterations)
            if fz < tol and abs(z - candidate) < 1e-6:
                roots.append(z)
            else:
                unresolved.append(candidate)

    order = _sorted_report_order(roots)
    evs = tuple(roots[i] for i in order)
    residuals = tuple(abs(f(ev)) for ev in evs)
    return SpectrumReport(
        band_halfwidth=halfwidth,
        eigenvalues=evs,
        classifications=tuple(_classify(ev) for ev in evs),
        residuals=residuals,
        method="cf",
        convention=chain.convention,
        unresolved=tuple(unresolved),
    )
