"""Reduced energies of bubble configurations for a slightly subcritical problem with an inverse-square potential on the unit ball.

The package evaluates the finite-dimensional functions whose critical points
locate concentrating solutions: closed-form bubble integrals, Green-function
combinations on the ball, critical scales and their Hessians, and a
quadrature check of the full energy against its expansion.
"""

import os as _os

__version__ = "0.1.0"

# Cap BLAS/OpenMP pools before numpy loads; a no-op if numpy is already imported.
_threads = _os.environ.get("BUBBLE_REDUCE_THREADS", "")
if _threads.isdigit() and int(_threads) > 0:
    for _name in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ.setdefault(_name, _threads)

from .critical import ConvergenceError, classify_hessian, find_roots, jacobi_eigenvalues, newton_nd  # noqa: E402
from .energy import (  # noqa: E402
    BubbleAtom,
    Configuration,
    FitModel,
    NonReducibleError,
    coefficient_extraction,
    energy_functional,
)
from .geometry import BallDomain, gamma_tau, phi_point, placement  # noqa: E402
from .integrals import ExpansionConstants, expansion_constants, instanton_integrals, tower_h1, tower_h2  # noqa: E402
from .profiles import hardy_params, instanton_constant, sobolev_constants  # noqa: E402
from .quadrature import QuadratureError, QuadratureSpec, tanh_sinh  # noqa: E402
from .reduced import (  # noqa: E402
    SignPattern,
    ReducedPoint,
    WindowError,
    psi_multipoint,
    stationarity_newton,
    axis_bubble_profile,
    polygon_profile,
    alternating_square_profile,
    tower_critical,
)

__all__ = [
    "BallDomain",
    "BubbleAtom",
    "Configuration",
    "ConvergenceError",
    "ExpansionConstants",
    "FitModel",
    "NonReducibleError",
    "QuadratureError",
    "QuadratureSpec",
    "ReducedPoint",
    "SignPattern",
    "WindowError",
    "classify_hessian",
    "coefficient_extraction",
    "energy_functional",
    "expansion_constants",
    "find_roots",
    "gamma_tau",
    "hardy_params",
    "instanton_constant",
    "instanton_integrals",
    "jacobi_eigenvalues",
    "newton_nd",
    "phi_point",
    "placement",
    "psi_multipoint",
    "sobolev_constants",
    "stationarity_newton",
    "tanh_sinh",
    "axis_bubble_profile",
    "polygon_profile",
    "alternating_square_profile",
    "tower_critical",
    "tower_h1",
    "tower_h2",
]
