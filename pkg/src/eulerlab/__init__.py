"""Numerical laboratory for the spectral and finite-mode structure of
2D incompressible Euler flow on the periodic torus.

Subpackages by concern:

- :mod:`eulerlab.lattice`: wave-vector arithmetic, the triad interaction
  coefficient, and the quadratic mode dynamics in exponential and cosine
  bases.
- :mod:`eulerlab.spectra`: class-decomposed linearized chains, the
  essential-spectrum band, and point spectra by continued fractions with
  a finite-section oracle.
- :mod:`eulerlab.models`: the four/five-mode truncations, their three
  invariants, and closed-form orbits between the fixed-point pair.
- :mod:`eulerlab.fields`: pseudospectral torus fields, advection
  brackets, Lax-pair defects, and Darboux gauge-transform verification.
- :mod:`eulerlab.ode`: fixed-step RK4 and adaptive Dormand-Prince 5(4).
- :mod:`eulerlab.cli`: the ``euler-lab`` command-line interface.
"""

from .lattice import (
    Basis,
    ModeState,
    cosine_rhs,
    euler_rhs,
    interaction_coefficient,
    interaction_coefficient_exact,
    quadratic_functionals,
    to_cosine,
    to_exponential,
)
from .spectra import (
    ClassChain,
    Convention,
    SpectrumReport,
    band_halfwidth,
    cf_characteristic,
    class_members,
    disk_intersection,
    point_spectrum,
    truncated_eigenvalues,
)
from .models import (
    Branch,
    CONSTANTS,
    FiveModeState,
    HomoclinicParams,
    five_mode_rhs,
    four_mode_matrix,
    homoclinic_state,
    invariants,
    orbit_residual,
)
from .fields import (
    GridField,
    bracket,
    darboux_transform,
    invert_laplacian,
    jacobi_residual,
    laplacian,
    lax_residuals,
    velocity,
)
from .ode import IntegrationError, Trajectory, integrate

__version__ = "0.1.0"

__all__ = [
    "Basis",
    "ModeState",
    "cosine_rhs",
    "euler_rhs",
    "interaction_coefficient",
    "interaction_coefficient_exact",
    "quadratic_functionals",
    "to_cosine",
    "to_exponential",
    "ClassChain",
    "Convention",
    "SpectrumReport",
    "band_halfwidth",
    "cf_characteristic",
    "class_members",
    "disk_intersection",
    "point_spectrum",
    "truncated_eigenvalues",
    "Branch",
    "CONSTANTS",
    "FiveModeState",
    "HomoclinicParams",
    "five_mode_rhs",
    "four_mode_matrix",
    "homoclinic_state",
    "invariants",
    "orbit_residual",
    "GridField",
    "bracket",
    "darboux_transform",
    "invert_laplacian",
    "jacobi_residual",
    "laplacian",
    "lax_residuals",
    "velocity",
    "IntegrationError",
    "Trajectory",
    "integrate",
    "__version__",
]
