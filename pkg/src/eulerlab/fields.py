"""Pseudospectral fields on the 2*pi-periodic square torus.

Fields are sampled on a uniform n-by-n grid (n a power of two, at least
16) and differentiated through the FFT.  Products are formed pointwise
on the grid, so callers keep inputs band-limited: |k1|, |k2| <= n/3 for
quadratic expressions and n/6 where triple products appear.  Under those
limits the retained band of every result is alias-free and the residual
checks below operate at rounding level.

Building blocks: the advection bracket {f, g} = f_x g_y - f_y g_x, the
Laplacian with its zero-mean inverse, and the stream-function velocity
map u = -psi_y, v = psi_x.  On top of them sit verification routines for
the Lax pair carried by a steady vorticity field ({Omega, .} paired with
the advection generator {Psi, .}) and for the Darboux gauge transform
p -> (p_x - (log f)_x p) / Omega_x with potential shift (Omega, Psi) ->
(Omega + Lap F, Psi + F).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from pathlib import Path
from typing import Callable, Mapping

import numpy as np

__all__ = [
    "GridField",
    "band_limit",
    "bracket",
    "derivative_x",
    "derivative_y",
    "laplacian",
    "invert_laplacian",
    "velocity",
    "jacobi_residual",
    "lax_residuals",
    "LaxReport",
    "darboux_transform",
    "DarbouxReport",
    "save_field",
    "load_field",
]


@lru_cache(maxsize=16)
def _wavegrids(n: int) -> tuple[np.ndarray, np.ndarray]:
    k = np.fft.fftfreq(n, d=1.0 / n)
    kx, ky = np.meshgrid(k, k, indexing="ij")
    kx.setflags(write=False)
    ky.setflags(write=False)
    return kx, ky


@lru_cache(maxsize=32)
def _band_mask(n: int, kmax: int) -> np.ndarray:
    kx, ky = _wavegrids(n)
    mask = (np.abs(kx) <= kmax) & (np.abs(ky) <= kmax)
    mask.setflags(write=False)
    return mask


@dataclass(frozen=True)
class GridField:
    """Samples of a 2*pi-periodic field at the nodes (2*pi*j/n, 2*pi*l/n).

    Values are float64 or complex128 and frozen after construction; the
    discrete Fourier transform is cached on first use.  Index order is
    values[ix, iy] with x along axis 0.
    """

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError(f"expected a square 2D array, got shape {v.shape}")
        n = v.shape[0]
        if n < 16 or n & (n - 1):
            raise ValueError(f"grid size must be a power of two >= 16, got {n}")
        dtype = np.complex128 if np.iscomplexobj(v) else np.float64
        v = v.astype(dtype, copy=True)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.values)

    @cached_property
    def spectrum(self) -> np.ndarray:
        s = np.fft.fft2(self.values)
        s.setflags(write=False)
        return s

    @property
    def mean(self) -> complex:
        m = self.values.mean()
        return float(m) if self.is_real else complex(m)

    def max_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def l2_norm(self) -> float:
        """Root mean square over the grid."""
        return float(np.sqrt(np.mean(np.abs(self.values) ** 2)))

    @classmethod
    def zeros(cls, n: int, real: bool = True) -> "GridField":
        return cls(np.zeros((n, n), dtype=np.float64 if real else np.complex128))

    @classmethod
    def from_function(cls, n: int, fn: Callable) -> "GridField":
        x = 2.0 * np.pi * np.arange(n) / n
        X, Y = np.meshgrid(x, x, indexing="ij")
        return cls(fn(X, Y))

    @classmethod
    def from_modes(cls, n: int, modes: Mapping, real: bool | None = None) -> "GridField":
        """Field sum_k c_k exp(i k . X) from a finite coefficient map.

        With ``real=None`` the result is cast real exactly when the map
        is conjugate-symmetric (c_{-k} = conj(c_k)).
        """
        spec = np.zeros((n, n), dtype=np.complex128)
        symmetric = True
        for k, c in modes.items():
            k1, k2 = int(k[0]), int(k[1])
            if max(abs(k1), abs(k2)) > n // 2 - 1:
                raise ValueError(f"mode {k} does not fit on an n={n} grid")
            spec[k1 % n, k2 % n] += complex(c)
            mk = modes.get((-k1, -k2))
            if mk is None or abs(complex(mk) - complex(c).conjugate()) > 1e-14 * max(1.0, abs(c)):
                symmetric = False
        vals = np.fft.ifft2(spec) * n * n
        if real is None:
            real = symmetric
        return cls(vals.real if real else vals)

    def __add__(self, other: "GridField") -> "GridField":
        return GridField(self.values + other.values)

    def __sub__(self, other: "GridField") -> "GridField":
        return GridField(self.values - other.values)

    def __mul__(self, scalar) -> "GridField":
        return GridField(self.values * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> "GridField":
        return GridField(-self.values)


def _inverse(spec: np.ndarray, real: bool) -> np.ndarray:
    v = np.fft.ifft2(spec)
    return v.real if real else v


def derivative_x(f: GridField) -> GridField:
    kx, _ = _wavegrids(f.n)
    return GridField(_inverse(1j * kx * f.spectrum, f.is_real))


def derivative_y(f: GridField) -> GridField:
    _, ky = _wavegrids(f.n)
    return GridField(_inverse(1j * ky * f.spectrum, f.is_real))


def band_limit(f: GridField, kmax: int) -> GridField:
    """Zero every coefficient with |k1| > kmax or |k2| > kmax."""
    return GridField(_inverse(f.spectrum * _band_mask(f.n, kmax), f.is_real))


def _gradient_arrays(f: GridField) -> tuple[np.ndarray, np.ndarray]:
    kx, ky = _wavegrids(f.n)
    spec = f.spectrum
    gx = _inverse(1j * kx * spec, f.is_real)
    gy = _inverse(1j * ky * spec, f.is_real)
    return gx, gy


def bracket(f: GridField, g: GridField) -> GridField:
    """Advection bracket {f, g} = f_x g_y - f_y g_x.

    Derivatives are spectral, the product pointwise, and the output is
    truncated to the n/3 band; with band-limited inputs (|k| <= n/3 per
    axis) the retained coefficients are alias-free.
    """
    if f.n != g.n:
        raise ValueError(f"grid sizes differ: {f.n} vs {g.n}")
    fx, fy = _gradient_arrays(f)
    gx, gy = _gradient_arrays(g)
    prod = fx * gy - fy * gx
    spec = np.fft.fft2(prod) * _band_mask(f.n, f.n // 3)
    return GridField(_inverse(spec, f.is_real and g.is_real))


def laplacian(f: GridField) -> GridField:
    kx, ky = _wavegrids(f.n)
    return GridField(_inverse(-(kx * kx + ky * ky) * f.spectrum, f.is_real))


def invert_laplacian(f: GridField) -> GridField:
    """Zero-mean solution of Lap(psi) = f; requires a zero-mean input."""
    n = f.n
    if abs(f.mean) > 1e-12 * max(1.0, f.max_norm()):
        raise ValueError("invert_laplacian requires a zero-mean field")
    kx, ky = _wavegrids(n)
    ksq = kx * kx + ky * ky
    mult = np.zeros_like(ksq)
    np.divide(-1.0, ksq, out=mult, where=ksq > 0)
    return GridField(_inverse(mult * f.spectrum, f.is_real))


def velocity(psi: GridField) -> tuple[GridField, GridField]:
    """Velocity components (u, v) = (-psi_y, psi_x) of a stream function."""
    return -derivative_y(psi), derivative_x(psi)


def jacobi_residual(f: GridField, g: GridField, h: GridField) -> float:
    """Max-norm of {f,{g,h}} + {g,{h,f}} + {h,{f,g}}.

    Zero analytically; with inputs band-limited to n/6 the computed value
    sits at rounding level, so it doubles as an aliasing check.
    """
    total = (
        bracket(f, bracket(g, h)).values
        + bracket(g, bracket(h, f)).values
        + bracket(h, bracket(f, g)).values
    )
    return float(np.max(np.abs(total)))


@dataclass(frozen=True)
class LaxReport:
    """Eigen-defect history of a candidate pair (lambda, phi)."""

    lam: complex
    times: tuple[float, ...]
    defects: tuple[float, ...]

    @property
    def initial_defect(self) -> float:
        return self.defects[0]

    @property
    def max_defect(self) -> float:
        return max(self.defects)

    def as_dict(self) -> dict:
        return {
            "lambda": {"re": self.lam.real, "im": self.lam.imag},
            "times": list(self.times),
            "defects": list(self.defects),
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True)


def _rk4_advect(values: np.ndarray, psi: GridField, t_span: float, dt: float) -> np.ndarray:
    """Advance d/dt phi = -{psi, phi} with classical RK4 steps."""
    steps = max(1, math.ceil(abs(t_span) / dt))
    h = t_span / steps

    def rhs(v):
        return -bracket(psi, GridField(v)).values

    v = values
    for _ in range(steps):
        k1 = rhs(v)
        k2 = rhs(v + 0.5 * h * k1)
        k3 = rhs(v + 0.5 * h * k2)
        k4 = rhs(v + h * k3)
        v = v + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return v


def lax_residuals(
    omega: GridField,
    phi: GridField,
    lam: complex,
    t1: float,
    *,
    dt: float = 0.01,
    samples: int = 11,
    steady_tol: float = 1e-10,
) -> LaxReport:
    """Evolve phi by d/dt phi = -{Psi, phi} and track the eigen-defect.

    The defect is m(t) = ||{Omega, phi} - lambda*phi|| / ||phi|| in the
    RMS norm.  For steady Omega the operators {Omega, .} and {Psi, .}
    commute, so m is a constant of the exact flow; growth signals either
    a wrong candidate or resolution loss.  With lambda = 0 this reports
    ||{Omega, phi}|| / ||phi|| for kernel candidates.

    Raises ValueError if omega is not steady ({Psi, Omega} above
    ``steady_tol`` in max-norm).
    """
    psi = invert_laplacian(omega)
    if bracket(psi, omega).max_norm() > steady_tol:
        raise ValueError("omega is not a steady flow to the required tolerance")
    lam = complex(lam)

    def defect(values: np.ndarray) -> float:
        fld = GridField(values)
        g = bracket(omega, fld).values - lam * values
        denom = np.sqrt(np.mean(np.abs(values) ** 2))
        return float(np.sqrt(np.mean(np.abs(g) ** 2)) / denom)

    times = np.linspace(0.0, float(t1), int(samples))
    v = phi.values.astype(np.complex128)
    defects = [defect(v)]
    for t_prev, t_next in zip(times[:-1], times[1:]):
        v = _rk4_advect(v, psi, float(t_next - t_prev), dt)
        defects.append(defect(v))
    return LaxReport(lam, tuple(float(t) for t in times), tuple(defects))


@dataclass(frozen=True)
class DarbouxReport:
    """Masked residuals of a gauge-transform verification."""

    residuals: Mapping[str, float]
    input_residuals: Mapping[str, float]
    mask_fraction: float
    degenerate: bool
    unreliable: bool

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values())

    def as_dict(self) -> dict:
        return {
            "residuals": dict(self.residuals),
            "input_residuals": dict(self.input_residuals),
            "mask_fraction": self.mask_fraction,
            "degenerate": self.degenerate,
            "unreliable": self.unreliable,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True)


def _coupled_advect(fields: tuple[np.ndarray, ...], h: float) -> tuple[np.ndarray, ...]:
    """One RK4 step of the coupled system: omega by self-advection, the
    remaining fields advected passively by the instantaneous flow."""

    def rhs(state):
        om = GridField(state[0])
        psi = invert_laplacian(om)
        return tuple(-bracket(psi, GridField(v)).values for v in state)

    k1 = rhs(fields)
    k2 = rhs(tuple(v + 0.5 * h * k for v, k in zip(fields, k1)))
    k3 = rhs(tuple(v + 0.5 * h * k for v, k in zip(fields, k2)))
    k4 = rhs(tuple(v + h * k for v, k in zip(fields, k3)))
    return tuple(
        v + (h / 6.0) * (a + 2.0 * b + 2.0 * c + d)
        for v, a, b, c, d in zip(fields, k1, k2, k3, k4)
    )


def _gauge_arrays(f: GridField, p: GridField, omega: GridField, mask_rel: float):
    """Transformed function W/D = (f p_x - f_x p) / (f Omega_x) with its
    derivatives, evaluated pointwise away from the zero sets of f and
    Omega_x."""
    omega_x = derivative_x(omega)
    fx, _ = _gradient_arrays(f)
    px, _ = _gradient_arrays(p)
    mask = (np.abs(omega_x.values) > mask_rel * omega_x.max_norm()) & (
        np.abs(f.values) > mask_rel * f.max_norm()
    )
    W = GridField(f.values * px - fx * p.values)
    D = GridField(f.values * omega_x.values)
    Wx, Wy = _gradient_arrays(W)
    Dx, Dy = _gradient_arrays(D)
    with np.errstate(divide="ignore", invalid="ignore"):
        pt = np.where(mask, W.values / D.values, 0.0)
        dsq = D.values * D.values
        pt_x = np.where(mask, (Wx * D.values - W.values * Dx) / dsq, 0.0)
        pt_y = np.where(mask, (Wy * D.values - W.values * Dy) / dsq, 0.0)
    return mask, pt, pt_x, pt_y


def darboux_transform(
    f: GridField,
    p: GridField,
    omega: GridField,
    stream_shift: GridField,
    *,
    precond_tol: float = 1e-10,
    mask_rel: float = 1e-6,
    unsteady_dt: float = 1e-4,
) -> DarbouxReport:
    """Verify the gauge transform built from a kernel element f.

    Computes p~ = (p_x - (log f)_x p) / Omega_x on the nodes where both
    |Omega_x| and |f| exceed ``mask_rel`` times their max-norms, shifts
    the potentials to Omega~ = Omega + Lap(F), Psi~ = Psi + F, and
    reports masked max-norms of

    - ``vorticity_constraint``: {Omega, Lap F},
    - ``stream_constraint``:    {Omega + Lap F, F},
    - ``gauge_kernel``:         {Omega~, p~},
    - ``gauge_evolution``:      d/dt p~ + {Psi~, p~}.

    Derivatives of p~ are taken through the quotient rule on the smooth
    numerator/denominator fields, so nothing singular is transformed.
    The time derivative is zero in closed form when omega, f and p are
    all steady; otherwise it is approximated by central differencing of
    two evolved snapshots (step ``unsteady_dt``).

    Raises ValueError unless f lies in the kernel of {Omega, .} to
    ``precond_tol``.  A report with ``unreliable=True`` means the mask
    rejected more than half of the grid.
    """
    n = omega.n
    for other in (f, p, stream_shift):
        if other.n != n:
            raise ValueError("all fields must share one grid")
    psi = invert_laplacian(omega)

    d1_f = bracket(omega, f).max_norm()
    if d1_f > precond_tol * max(1.0, f.max_norm()):
        raise ValueError("f is not a kernel element of {Omega, .} to tolerance")
    input_residuals = {
        "kernel_f": d1_f,
        "kernel_p": bracket(omega, p).max_norm(),
        "steady_omega": bracket(psi, omega).max_norm(),
        "steady_f": bracket(psi, f).max_norm(),
        "steady_p": bracket(psi, p).max_norm(),
    }
    steady = all(
        input_residuals[key] <= precond_tol * 10.0
        for key in ("steady_omega", "steady_f", "steady_p")
    )

    mask, pt, pt_x, pt_y = _gauge_arrays(f, p, omega, mask_rel)
    mask_fraction = 1.0 - float(mask.mean())
    unreliable = mask_fraction > 0.5

    lap_shift = laplacian(stream_shift)
    omega_t = omega + lap_shift
    psi_t = psi + stream_shift
    otx, oty = _gradient_arrays(omega_t)
    ptx_s, pty_s = _gradient_arrays(psi_t)

    def masked_max(arr: np.ndarray) -> float:
        if not mask.any():
            return 0.0
        return float(np.max(np.abs(arr[mask])))

    if steady:
        dpt = np.zeros_like(pt)
    else:
        start = (omega.values.astype(np.complex128), f.values.astype(np.complex128),
                 p.values.astype(np.complex128))
        plus = _coupled_advect(start, unsteady_dt)
        minus = _coupled_advect(start, -unsteady_dt)
        _, pt_plus, _, _ = _gauge_arrays(GridField(plus[1]), GridField(plus[2]),
                                         GridField(plus[0]), mask_rel)
        _, pt_minus, _, _ = _gauge_arrays(GridField(minus[1]), GridField(minus[2]),
                                          GridField(minus[0]), mask_rel)
        dpt = (pt_plus - pt_minus) / (2.0 * unsteady_dt)

    residuals = {
        "vorticity_constraint": masked_max(bracket(omega, lap_shift).values),
        "stream_constraint": masked_max(bracket(omega_t, stream_shift).values),
        "gauge_kernel": masked_max(otx * pt_y - oty * pt_x),
        "gauge_evolution": masked_max(dpt + ptx_s * pt_y - pty_s * pt_x),
    }
    degenerate = masked_max(pt) < 1e-12 * max(1.0, p.max_norm())
    return DarbouxReport(residuals, input_residuals, mask_fraction, degenerate, unreliable)


def save_field(field: GridField, path) -> None:
    """Write samples plus a JSON sidecar describing them.

    ``.csv`` paths store text (real fields only, 17 significant digits);
    any other suffix stores flat binary in C order (float64, or
    complex128 for complex fields).  The sidecar at ``path + ".json"``
    records {"n", "kind", "zero_mean"}.
    """
    path = Path(path)
    kind = "real" if field.is_real else "complex"
    if path.suffix == ".csv":
        if not field.is_real:
            raise ValueError("CSV field files hold real fields only")
        np.savetxt(path, field.values, fmt="%.17g", delimiter=",")
    else:
        field.values.tofile(path)
    zero_mean = abs(field.mean) <= 1e-12 * max(1.0, field.max_norm())
    sidecar = {"n": field.n, "kind": kind, "zero_mean": bool(zero_mean)}
    Path(str(path) + ".json").write_text(json.dumps(sidecar, sort_keys=True))


def load_field(path) -> GridField:
    """Read a field written by :func:`save_field`."""
    path = Path(path)
    sidecar = json.loads(Path(str(path) + ".json").read_text())
    n = int(sidecar["n"])
    if path.suffix == ".csv":
        values = np.loadtxt(path, delimiter=",").reshape(n, n)
    else:
        dtype = np.float64 if sidecar["kind"] == "real" else np.complex128
        values = np.fromfile(path, dtype=dtype).reshape(n, n)
    return GridField(values)
