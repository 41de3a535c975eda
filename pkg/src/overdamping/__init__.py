"""Overdamping at weak coupling in Redfield dynamics.

Submodules: ``bath`` (Ullersma bath), ``damped_spin`` (Bloch equations and the
spin-boson model), ``spin_gorm`` (spin in a random-matrix environment),
``diffusion_loop`` (dephasing ring), ``qbm`` (quantum Brownian motion),
``numerics`` (shared kernels) and ``cli``.
"""
__version__ = "0.1.0"

from .errors import (  # noqa: E402
    BranchAbsent,
    DegenerateBathError,
    DivergentIntegralError,
    DomainError,
    EigenError,
    EmptyShellError,
    HighTemperatureWarning,
    NumericalError,
    OverdampingError,
    QuadratureError,
    RecurrenceError,
    UnitError,
)
from .config import TOL  # noqa: E402

__all__ = [
    "__version__",
    "TOL",
    "OverdampingError",
    "DomainError",
    "UnitError",
    "BranchAbsent",
    "EmptyShellError",
    "RecurrenceError",
    "NumericalError",
    "QuadratureError",
    "DivergentIntegralError",
    "EigenError",
    "DegenerateBathError",
    "HighTemperatureWarning",
]
