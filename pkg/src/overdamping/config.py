"""Numerical tolerances shared by every module.

All defaults live here so tests and acceptance checks pin the same numbers.
"""
from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    quad_rel: float = 1e-8          # adaptive quadrature, relative
    quad_abs_floor: float = 1e-300
    pv_rel: float = 1e-10           # principal-value integrals
    coth_cutoff: float = 30.0       # |x| beyond which coth(x) -> sgn(x)
    critical_band: float = 1e-9     # |Omega^2| / max(omega0^2, Gamma^2) below which regime is critical
    eig_residual: float = 1e-10     # ||Hv - lv|| / ||H||
    cubic_residual: float = 1e-12
    characteristic_residual: float = 1e-10
    general_eig_max: int = 144      # dense non-symmetric eigensolver size cap
    full_generator_max_sites: int = 12
    high_t_warn: float = 0.1        # beta*hbar*omega0 above which high-T formulas warn


TOL = Tolerances()
