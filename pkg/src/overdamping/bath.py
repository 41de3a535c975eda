"""Harmonic-oscillator environments with Ullersma (Drude) spectral strength.

Conventions: ``alpha(t) = <B(t) B> = C(t) + i D(t)`` and
``alpha~(w) = (1/2pi) int dt e^{iwt} alpha(t)``. With these, a positive
frequency argument of ``alpha~`` describes emission into the bath, so at zero
temperature ``alpha~(w < 0) = 0``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .config import TOL
from .errors import DivergentIntegralError, DomainError, UnitError
from .numerics import fourier_integral

__all__ = [
    "KappaUnit",
    "BathSpec",
    "ThermalState",
    "CorrelatorValue",
    "spectral_gamma",
    "spectral_j",
    "coth",
    "thermal_energy",
    "correlator",
    "correlator_high_t",
    "correlator_ft",
    "correlator_ft_zero",
    "correlator_ft_high_t",
]


class KappaUnit(enum.Enum):
    ACTION = "action"        # spin-boson: Gamma = 2 kappa / (beta hbar^2) is a rate
    FREQUENCY = "frequency"  # quantum Brownian motion


@dataclass(frozen=True)
class BathSpec:
    kappa: float
    alpha: float
    hbar: float = 1.0
    unit: KappaUnit = KappaUnit.ACTION

    def __post_init__(self):
        if not isinstance(self.unit, KappaUnit):
            try:
                object.__setattr__(self, "unit", KappaUnit(self.unit))
            except ValueError:
                raise UnitError(f"unknown kappa unit {self.unit!r}") from None
        if not self.kappa >= 0:
            raise DomainError(f"kappa must be >= 0, got {self.kappa}")
        if not self.alpha > 0:
            raise DomainError(f"alpha must be > 0, got {self.alpha}")
        if not self.hbar > 0:
            raise DomainError(f"hbar must be > 0, got {self.hbar}")

    def require_unit(self, unit: KappaUnit) -> None:
        if self.unit is not unit:
            raise UnitError(f"kappa carries {self.unit.value} units; this model needs {unit.value}")


@dataclass(frozen=True)
class ThermalState:
    beta: float  # math.inf means zero temperature

    def __post_init__(self):
        if not self.beta > 0:
            raise DomainError(f"beta must be > 0 (or inf), got {self.beta}")

    @property
    def zero_temperature(self) -> bool:
        return math.isinf(self.beta)


@dataclass(frozen=True)
class CorrelatorValue:
    c: float
    d: float

    @property
    def value(self) -> complex:
        return complex(self.c, self.d)


def spectral_gamma(spec: BathSpec, omega):
    """Ullersma spectral strength ``(2/pi) kappa alpha^2 w^2 / (alpha^2 + w^2)``."""
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0):
        raise DomainError("spectral_gamma is defined for omega >= 0")
    a2 = spec.alpha ** 2
    out = (2.0 / math.pi) * spec.kappa * a2 * w * w / (a2 + w * w)
    return out if out.ndim else float(out)


def spectral_j(spec: BathSpec, omega):
    """``J(w) = gamma(w) / (2w)`` for ``w > 0``; behaves as ``kappa w / pi`` near zero."""
    w = np.asarray(omega, dtype=float)
    if np.any(w <= 0):
        raise DomainError("spectral_j is defined for omega > 0 only")
    a2 = spec.alpha ** 2
    out = spec.kappa * a2 * w / (math.pi * (a2 + w * w))
    return out if out.ndim else float(out)


def coth(x):
    """Hyperbolic cotangent with ``|x| > 30`` clamped to ``sgn(x)``."""
    x = np.asarray(x, dtype=float)
    big = np.abs(x) > TOL.coth_cutoff
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(big, np.sign(x), 1.0 / np.tanh(np.where(big, 1.0, x)))
    return out if out.ndim else float(out)


def _coth_plus_one(x):
    # coth(x/2) + 1 = 2 / (1 - e^{-x}); no clamp, so detailed balance keeps full
    # relative accuracy at large |x| (the value underflows to 0 only near x = -709)
    x = np.asarray(x, dtype=float)
    with np.errstate(over="ignore"):
        out = -2.0 / np.expm1(-x)
    return out


def thermal_energy(temp: ThermalState, omega, hbar: float = 1.0):
    """``E_beta(w) = (hbar w / 2) coth(beta hbar w / 2)``; equals ``1/beta`` at ``w = 0``."""
    w = np.asarray(omega, dtype=float)
    if temp.zero_temperature:
        out = 0.5 * hbar * np.abs(w)
    else:
        x = 0.5 * temp.beta * hbar * w
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(w == 0, 1.0 / temp.beta,
                           0.5 * hbar * w * coth(np.where(w == 0, 1.0, x)))
    return out if out.ndim else float(out)


def correlator_ft(spec: BathSpec, temp: ThermalState, omega):
    """Bath spectral density ``alpha~(w) = gamma(|w|) hbar (coth(beta hbar w/2) + 1) / (4w)``.

    Nonnegative for every real ``w != 0``; satisfies detailed balance
    ``alpha~(-w) = e^{-beta hbar w} alpha~(w)``. Use :func:`correlator_ft_zero`
    for ``w = 0``.
    """
    w = np.asarray(omega, dtype=float)
    if np.any(w == 0):
        raise DomainError("correlator_ft is 0/0 at omega = 0; use correlator_ft_zero")
    g = spectral_gamma(spec, np.abs(w))
    if temp.zero_temperature:
        factor = np.where(w > 0, 2.0, 0.0)
    else:
        factor = _coth_plus_one(temp.beta * spec.hbar * w)
    out = np.asarray(g * spec.hbar * factor / (4.0 * w))
    return out if out.ndim else float(out)


def correlator_ft_zero(spec: BathSpec, temp: ThermalState) -> float:
    """``lim_{w->0} alpha~(w) = kappa / (pi beta)``."""
    if temp.zero_temperature:
        return 0.0
    return spec.kappa / (math.pi * temp.beta)


def correlator_ft_high_t(spec: BathSpec, temp: ThermalState, omega):
    """Fourier transform of the high-temperature correlator.

    The symmetric part comes from ``C(t) = (kappa alpha / beta) e^{-alpha|t|}``,
    the antisymmetric part from the exact, temperature-independent ``D(t)``.
    This is the spectral density behind the closed-form high-temperature rates.
    """
    if temp.zero_temperature:
        raise DomainError("the high-temperature correlator needs finite beta")
    w = np.asarray(omega, dtype=float)
    a, k = spec.alpha, spec.kappa
    sym = k * a * a / (math.pi * temp.beta * (a * a + w * w))
    anti = k * a * a * spec.hbar * w / (2.0 * math.pi * (a * a + w * w))
    out = sym + anti
    return out if out.ndim else float(out)


def correlator_high_t(spec: BathSpec, temp: ThermalState, t: float) -> CorrelatorValue:
    """Closed-form correlator valid for ``beta hbar alpha << 1``."""
    if temp.zero_temperature:
        raise DomainError("the high-temperature correlator needs finite beta")
    e = math.exp(-spec.alpha * abs(t))
    c = spec.kappa * spec.alpha / temp.beta * e
    d = -0.5 * spec.hbar * spec.kappa * spec.alpha ** 2 * e * np.sign(t)
    return CorrelatorValue(float(c), float(d))


def _zero_point_kernel(x: float) -> float:
    """``int_0^inf w cos(w x) / (1 + w^2) dw`` for ``x > 0``."""
    if x > 200.0:
        # asymptotic series of -(e^{-x} Ei(x) - e^{x} E1(x)) / 2
        inv2 = 1.0 / (x * x)
        return -inv2 * (1.0 + inv2 * (6.0 + inv2 * (120.0 + inv2 * (5040.0 + inv2 * 362880.0))))
    return -0.5 * (math.exp(-x) * special.expi(x) - math.exp(x) * special.exp1(x))


def correlator(spec: BathSpec, temp: ThermalState, t: float, abs_tol: float | None = None
               ) -> CorrelatorValue:
    """Equilibrium correlator of an oscillator bath by frequency quadrature.

    ``C(t) = int_0^inf dw (gamma hbar / 2w) coth(beta hbar w / 2) cos(wt)`` is
    split into the thermal excess (``coth - 1``, exponentially convergent,
    integrated numerically) and the zero-point part, whose Drude integral has an
    exponential-integral closed form. The zero-point part diverges
    logarithmically at ``t = 0``, so ``C(0)`` raises. ``D(t)`` is integrated
    with a Fourier-weighted rule after the slowly decaying ``1/w`` part of its
    integrand has been taken out analytically.
    """
    k, a, hb = spec.kappa, spec.alpha, spec.hbar
    if k == 0:
        return CorrelatorValue(0.0, 0.0)
    if t == 0.0:
        raise DivergentIntegralError(
            "C(0) diverges logarithmically: the zero-point part of a Drude bath "
            "has gamma(w)/w ~ 1/w at large w")
    tt = abs(t)
    scale = k * a * (hb * a + (0.0 if temp.zero_temperature else 1.0 / temp.beta))
    tol = abs_tol if abs_tol is not None else 1e-11 * scale

    def half_gamma_over_w(w):
        return hb * k * a * a * w / (math.pi * (a * a + w * w))

    c = (hb * k * a * a / math.pi) * _zero_point_kernel(a * tt)
    if not temp.zero_temperature:
        bh = temp.beta * hb

        def thermal(w):
            # (gamma hbar / 2w) (coth(bh w/2) - 1) = gamma hbar / (w (e^{bh w} - 1))
            if w == 0.0:
                return 2.0 * k / (math.pi * temp.beta)
            if bh * w > 700.0:
                return 0.0
            return 2.0 * half_gamma_over_w(w) / math.expm1(bh * w)

        c += fourier_integral(thermal, tt, "cos", abs_tol=tol,
                             split=40.0 * max(a, 1.0 / bh)).value
    # w/(a^2+w^2) = 1/w - a^2/(w(a^2+w^2)); the 1/w piece integrates to pi/2
    # exactly, leaving a remainder that decays as w^-3 even for tiny t
    def remainder(w):
        return a * a / (a * a + w * w) if w == 0.0 else a * a / (w * (a * a + w * w))

    rem = fourier_integral(remainder, tt, "sin", abs_tol=tol / (hb * k * a * a), split=40.0 * a).value
    d = -(hb * k * a * a / math.pi) * (0.5 * math.pi - rem)
    if t < 0:
        d = -d
    return CorrelatorValue(float(c), float(d))
