"""Two-level system under Redfield relaxation, and its spin-boson specialization.

Bloch equations (Markovian)::

    z' = 2 Gamma (z_inf - z)
    x' = -omega0 y
    y' = ((Omega^2 + Gamma^2) / omega0) x - 2 Gamma y

The x-y block has characteristic polynomial ``s^2 + 2 Gamma s + Omega^2 + Gamma^2``,
so its rates are ``-Gamma +- sqrt(-Omega^2)``. Overdamping means ``Omega^2 < 0``.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy import optimize

from .bath import BathSpec, CorrelatorValue, KappaUnit, ThermalState
from .config import TOL
from .errors import (BranchAbsent, DegenerateBathError, DomainError,
                     HighTemperatureWarning)
from .numerics import adaptive_quadrature, pv_integral

__all__ = [
    "SpinModel",
    "BlochVector",
    "Trajectory",
    "MarkovRates",
    "ModeSet",
    "Regime",
    "TimeDependentRates",
    "markov_rates",
    "shifted_frequency_squared",
    "rates_time_dependent",
    "evolve",
    "modes",
    "mode_superposition",
    "classify",
    "spin_boson_highT",
    "spin_boson_limit_rates",
    "spin_boson_kappa_c",
    "highT_modes",
    "deep_overdamped_rate",
    "critical_coupling",
]


@dataclass(frozen=True)
class SpinModel:
    omega0: float
    hbar: float = 1.0

    def __post_init__(self):
        if not self.omega0 > 0:
            raise DomainError(f"omega0 must be > 0, got {self.omega0}")
        if not self.hbar > 0:
            raise DomainError(f"hbar must be > 0, got {self.hbar}")


@dataclass(frozen=True)
class BlochVector:
    x: float
    y: float
    z: float

    @classmethod
    def from_angles(cls, theta: float, phi: float = 0.0) -> "BlochVector":
        """Pure state ``cos(theta/2)|up> + e^{i phi} sin(theta/2)|down>``."""
        s = math.sin(theta)
        return cls(s * math.cos(phi), s * math.sin(phi), math.cos(theta))

    @property
    def norm(self) -> float:
        return math.sqrt(self.x ** 2 + self.y ** 2 + self.z ** 2)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])


@dataclass(frozen=True)
class Trajectory:
    """Bloch components on a time grid. Indexing yields :class:`BlochVector`."""

    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray

    def __len__(self) -> int:
        return len(self.t)

    def __getitem__(self, i) -> BlochVector:
        return BlochVector(float(self.x[i]), float(self.y[i]), float(self.z[i]))

    def norms(self) -> np.ndarray:
        return np.sqrt(self.x ** 2 + self.y ** 2 + self.z ** 2)

    def component(self, name: str) -> np.ndarray:
        return {"x": self.x, "y": self.y, "z": self.z}[name]


class Regime(enum.Enum):
    NORMAL = "normal"
    CRITICAL = "critical"
    OVERDAMPED = "overdamped"


@dataclass(frozen=True)
class MarkovRates:
    """Markovian rate triple. ``z_inf`` is None when it is indeterminate (Gamma = 0)."""

    gamma: float
    omega2: float
    z_inf: float | None
    omega0: float

    def __post_init__(self):
        if self.gamma < 0:
            raise DomainError(f"gamma must be >= 0, got {self.gamma}")
        if self.z_inf is not None and abs(self.z_inf) > 1 + 1e-12:
            raise DomainError(f"|z_inf| must be <= 1, got {self.z_inf}")

    @property
    def shifted_w2(self) -> float:
        """``Omega^2 + Gamma^2``."""
        return self.omega2 + self.gamma ** 2

    @property
    def gamma_z_inf(self) -> float | None:
        return None if self.z_inf is None else self.gamma * self.z_inf


@dataclass(frozen=True)
class ModeSet:
    s1: complex
    s2: complex
    s3: complex
    s4: complex

    def as_array(self) -> np.ndarray:
        return np.array([self.s1, self.s2, self.s3, self.s4], dtype=complex)


class TimeDependentRates(NamedTuple):
    gamma: float
    omega2: float
    gamma_z_inf: float


# ---------------------------------------------------------------------------
# Rates


def shifted_frequency_squared(spin: SpinModel, bath_ft: Callable[[float], float],
                              points: Sequence[float] = (), rel_tol: float = TOL.pv_rel) -> float:
    """``Omega^2 + Gamma^2 = w0^2 + (4 w0^2 / hbar^2) PV int alpha~(w) / (w0^2 - w^2) dw``.

    The integral is folded onto ``w > 0`` so the only pole is at ``omega0``;
    the antisymmetric part of ``alpha~`` drops out exactly. ``points`` marks
    features of ``alpha~`` (cutoffs, band edges). ``bath_ft`` is never called
    at ``w = 0``.
    """
    w0, hb = spin.omega0, spin.hbar
    scale = abs(bath_ft(w0)) + abs(bath_ft(-w0)) + abs(bath_ft(0.5 * w0))

    def integrand(w):
        return (bath_ft(w) + bath_ft(-w)) / (w0 * w0 - w * w)

    pv = pv_integral(integrand, [w0], 0.0, math.inf, rel_tol=rel_tol,
                     abs_tol=1e-14 * scale / w0, points=[p for p in points if p > 0])
    return w0 * w0 + 4.0 * w0 * w0 / hb ** 2 * pv


def markov_rates(spin: SpinModel, bath_ft: Callable[[float], float],
                 points: Sequence[float] = (), rel_tol: float = TOL.pv_rel) -> MarkovRates:
    """Markovian rates from the bath spectral density ``bath_ft(w) = alpha~(w)``.

    See :func:`shifted_frequency_squared` for the principal-value part.
    """
    w0, hb = spin.omega0, spin.hbar
    fp, fm = float(bath_ft(w0)), float(bath_ft(-w0))
    total = fp + fm
    if not total > 0:
        raise DegenerateBathError(
            f"alpha~(w0) + alpha~(-w0) = {total}: no spectral weight at the Bohr frequency")
    gamma = math.pi / hb ** 2 * total
    z_inf = (fm - fp) / total
    w2 = shifted_frequency_squared(spin, bath_ft, points, rel_tol)
    return MarkovRates(gamma, w2 - gamma * gamma, z_inf, w0)


def rates_time_dependent(spin: SpinModel, correlator: Callable[[float], CorrelatorValue],
                         t: float, rel_tol: float = TOL.quad_rel) -> TimeDependentRates:
    """Finite-horizon rates ``Gamma(t)``, ``Omega(t)^2`` and ``Gamma z_inf (t)``.

    ``correlator`` is never evaluated at ``tau = 0`` (Gauss-Kronrod nodes are
    interior), so a logarithmically singular ``C`` is acceptable.
    """
    if t < 0:
        raise DomainError(f"t must be >= 0, got {t}")
    w0, hb = spin.omega0, spin.hbar
    if t == 0:
        return TimeDependentRates(0.0, w0 * w0, 0.0)
    cache: dict[float, CorrelatorValue] = {}

    def corr(tau):
        if tau not in cache:
            cache[tau] = correlator(tau)
        return cache[tau]

    def q(fn):
        return adaptive_quadrature(fn, 0.0, t, rel_tol=rel_tol, abs_tol=1e-300).value

    gamma = 2.0 / hb ** 2 * q(lambda s: math.cos(w0 * s) * corr(s).c)
    shift = 4.0 * w0 / hb ** 2 * q(lambda s: math.sin(w0 * s) * corr(s).c)
    gz = 2.0 / hb ** 2 * q(lambda s: math.sin(w0 * s) * corr(s).d)
    return TimeDependentRates(gamma, w0 * w0 + shift - gamma * gamma, gz)


# ---------------------------------------------------------------------------
# Dynamics


def _damped_cos_sinc(gamma: float, omega2: float, t: np.ndarray):
    """``e^{-G t} cos(W t)`` and ``e^{-G t} sin(W t)/W`` with ``W = sqrt(omega2)``.

    Real for either sign of ``omega2``; continuous through ``omega2 = 0``.
    """
    u = omega2 * t * t
    ec = np.empty_like(t)
    es = np.empty_like(t)
    small = np.abs(u) < 1e-6
    decay = np.exp(-gamma * t)
    # Taylor in u = omega2 t^2, truncation below 1e-18
    us = u[small]
    ec[small] = decay[small] * (1 - us / 2 + us * us / 24)
    es[small] = decay[small] * t[small] * (1 - us / 6 + us * us / 120)
    big = ~small
    tb = t[big]
    if omega2 > 0:
        om = math.sqrt(omega2)
        ec[big] = decay[big] * np.cos(om * tb)
        es[big] = decay[big] * np.sin(om * tb) / om
    elif omega2 < 0:
        k = math.sqrt(-omega2)
        # combine exponents before exponentiating so nothing overflows
        grow = np.exp((k - gamma) * tb)
        fall = np.exp(-(k + gamma) * tb)
        ec[big] = 0.5 * (grow + fall)
        es[big] = 0.5 * (grow - fall) / k
    return ec, es


def evolve(rates: MarkovRates, spin: SpinModel, b0: BlochVector, times) -> Trajectory:
    """Closed-form Markovian trajectory from ``b0`` on the time grid ``times``."""
    t = np.asarray(times, dtype=float)
    if t.ndim != 1:
        raise DomainError("times must be a 1-d grid")
    if t.size and (t[0] < 0 or np.any(np.diff(t) < 0)):
        raise DomainError("times must be nonnegative and ascending")
    g, w0 = rates.gamma, spin.omega0
    ec, es = _damped_cos_sinc(g, rates.omega2, t)
    x0, y0, z0 = b0.x, b0.y, b0.z
    x = x0 * ec + (x0 * g - y0 * w0) * es
    y = y0 * ec + (x0 * rates.shifted_w2 / w0 - y0 * g) * es
    if rates.z_inf is None:
        z = np.full_like(t, z0)
    else:
        z = rates.z_inf + (z0 - rates.z_inf) * np.exp(-2.0 * g * t)
    return Trajectory(t, x, y, z)


def modes(rates: MarkovRates) -> ModeSet:
    g, o2 = rates.gamma, rates.omega2
    if o2 > 0:
        om = math.sqrt(o2)
        s3, s4 = complex(-g, om), complex(-g, -om)
    else:
        k = math.sqrt(-o2)
        s3, s4 = complex(-g + k, 0.0), complex(-g - k, 0.0)
    return ModeSet(0j, complex(-2.0 * g, 0.0), s3, s4)


def mode_superposition(rates: MarkovRates, spin: SpinModel, b0: BlochVector, times) -> Trajectory:
    """Trajectory rebuilt as a sum of the four modes ``e^{s t}``.

    Independent of :func:`evolve`: mode amplitudes are fixed by the initial
    values and initial slopes. Needs ``s3 != s4`` (not at critical damping).
    """
    t = np.asarray(times, dtype=float)
    m = modes(rates)
    if m.s3 == m.s4:
        raise DomainError("critical damping: s3 = s4, modes are not a basis")
    w0 = spin.omega0
    d = m.s3 - m.s4

    def pair(v0, slope):
        a3 = (slope - m.s4 * v0) / d
        a4 = v0 - a3
        return (a3 * np.exp(m.s3 * t) + a4 * np.exp(m.s4 * t)).real

    x = pair(b0.x, -w0 * b0.y)
    y = pair(b0.y, rates.shifted_w2 / w0 * b0.x - 2.0 * rates.gamma * b0.y)
    if rates.z_inf is None:
        z = np.full_like(t, b0.z)
    else:
        z = (rates.z_inf * np.exp(m.s1 * t) + (b0.z - rates.z_inf) * np.exp(m.s2 * t)).real
    return Trajectory(t, x, y, z)


def classify(rates: MarkovRates, tol: float = TOL.critical_band) -> Regime:
    if not tol > 0:
        raise DomainError("tol must be > 0")
    band = tol * max(rates.omega0 ** 2, rates.gamma ** 2)
    if rates.omega2 > band:
        return Regime.NORMAL
    if rates.omega2 < -band:
        return Regime.OVERDAMPED
    return Regime.CRITICAL


def critical_coupling(omega2_of_kappa: Callable[[float], float], k_lo: float, k_hi: float,
                      xtol: float = 1e-14, rtol: float = 1e-12) -> float:
    """Coupling where ``Omega^2`` changes sign, bracketed by ``[k_lo, k_hi]``."""
    f_lo, f_hi = omega2_of_kappa(k_lo), omega2_of_kappa(k_hi)
    if f_lo * f_hi > 0:
        raise BranchAbsent(f"Omega^2 has one sign on [{k_lo}, {k_hi}] ({f_lo}, {f_hi})")
    return float(optimize.brentq(omega2_of_kappa, k_lo, k_hi, xtol=xtol, rtol=rtol))


# ---------------------------------------------------------------------------
# Spin-boson, high temperature


def _check_high_t(spin: SpinModel, temp: ThermalState) -> None:
    if temp.zero_temperature:
        raise DomainError("high-temperature formulas need finite beta")
    x = temp.beta * spin.hbar * spin.omega0
    if x >= TOL.high_t_warn:
        warnings.warn(f"beta*hbar*omega0 = {x:.3g} is not small; high-T formulas are "
                      "outside their range", HighTemperatureWarning, stacklevel=3)


def _check_bath(spin: SpinModel, bath: BathSpec) -> None:
    bath.require_unit(KappaUnit.ACTION)
    if bath.hbar != spin.hbar:
        raise DomainError(f"hbar mismatch: spin {spin.hbar}, bath {bath.hbar}")


def spin_boson_highT(spin: SpinModel, bath: BathSpec, temp: ThermalState) -> MarkovRates:
    """High-temperature Ullersma-bath rates at finite ``omega0 / alpha``."""
    _check_bath(spin, bath)
    _check_high_t(spin, temp)
    k, a, b, hb, w0 = bath.kappa, bath.alpha, temp.beta, spin.hbar, spin.omega0
    r = a * a / (a * a + w0 * w0)
    gamma = 2.0 * k * r / (b * hb * hb)
    w2 = w0 * w0 + 4.0 * k * w0 * w0 * r / (a * b * hb * hb)
    gz = -k * w0 * r / hb
    z_inf = gz / gamma if gamma > 0 else None
    return MarkovRates(gamma, w2 - gamma * gamma, z_inf, w0)


def spin_boson_limit_rates(spin: SpinModel, kappa: float, temp: ThermalState) -> MarkovRates:
    """High-temperature rates in the Markov-consistent limit ``omega0 / alpha -> 0``."""
    if kappa < 0:
        raise DomainError(f"kappa must be >= 0, got {kappa}")
    _check_high_t(spin, temp)
    hb, w0, b = spin.hbar, spin.omega0, temp.beta
    gamma = 2.0 * kappa / (b * hb * hb)
    z_inf = -0.5 * b * hb * w0 if kappa > 0 else None
    return MarkovRates(gamma, w0 * w0 - gamma * gamma, z_inf, w0)


def spin_boson_kappa_c(spin: SpinModel, temp: ThermalState) -> float:
    _check_high_t(spin, temp)
    return spin.hbar ** 2 * temp.beta * spin.omega0 / 2.0


def highT_modes(kappa: float, spin: SpinModel, temp: ThermalState) -> ModeSet:
    """Overdamped-branch rates for ``kappa >= kappa_c``.

    ``s3`` uses the cancellation-free form ``-(2k/hb^2 b) r^2 / (1 + sqrt(1 - r^2))``
    with ``r = kappa_c / kappa``.
    """
    kc = spin_boson_kappa_c(spin, temp)
    if kappa < kc:
        raise BranchAbsent(f"kappa = {kappa} < kappa_c = {kc}: normal damping; "
                           "use modes(spin_boson_limit_rates(...)) instead")
    g = 2.0 * kappa / (spin.hbar ** 2 * temp.beta)
    r2 = (kc / kappa) ** 2
    root = math.sqrt(max(0.0, 1.0 - r2))
    return ModeSet(0j, complex(-2.0 * g), complex(-g * r2 / (1.0 + root)), complex(-g * (1.0 + root)))


def deep_overdamped_rate(kappa: float, spin: SpinModel, temp: ThermalState) -> float:
    """Leading behaviour ``s3 ~ -hbar^2 beta omega0^2 / (4 kappa)`` for ``kappa >> kappa_c``."""
    return -spin.hbar ** 2 * temp.beta * spin.omega0 ** 2 / (4.0 * kappa)
