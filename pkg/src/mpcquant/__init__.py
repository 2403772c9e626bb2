"""Quantized energy levels from holonomy of reduced prequantization connections.

An energy ``E`` of a Hamiltonian ``H`` on ``R^{2n}`` is quantized when the
holonomy around every closed loop of the reduced flow on ``H = E`` is trivial,
in metaplectic-c mode (half-form corrected) or Kostant-Souriau mode.
"""

__version__ = "0.1.0"

from .hamiltonian_dynamics import (
    ClosedOrbit,
    HamiltonianSystem,
    NonClosing,
    action_integral,
    detect_closed_orbit,
    integrate_monodromy,
)
from .kernels import BACKEND
from .mpc_group import MpcParameters, mp_lift_loop, winding_number
from .polynomial import Polynomial
from .reduction_holonomy import (
    Mode,
    PrequantizationModel,
    Tolerances,
    energy_scan,
    evaluate_orbit,
    full_vs_reduced_monodromy,
    holonomy,
    invariance_check,
    is_quantized,
)
from .symplectic_core import CoisotropicConvention, ModelSpace, adapted_frame, chi, nu

__all__ = [
    "__version__",
    "BACKEND",
    "ClosedOrbit",
    "CoisotropicConvention",
    "HamiltonianSystem",
    "ModelSpace",
    "Mode",
    "MpcParameters",
    "NonClosing",
    "Polynomial",
    "PrequantizationModel",
    "Tolerances",
    "action_integral",
    "adapted_frame",
    "chi",
    "detect_closed_orbit",
    "energy_scan",
    "evaluate_orbit",
    "full_vs_reduced_monodromy",
    "holonomy",
    "integrate_monodromy",
    "invariance_check",
    "is_quantized",
    "mp_lift_loop",
    "nu",
    "winding_number",
]
