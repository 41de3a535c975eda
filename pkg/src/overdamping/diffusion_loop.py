"""Particle on an N-site ring with delta-correlated local dephasing.

Inserting the white-noise correlator ``2 Q delta(tau) delta_ll'`` into the
Redfield double commutator (the delta integrates to ``Q`` over the half line)
gives a pure-dephasing generator in the site basis::

    rho'_{ll'} = -(i/hbar) [H, rho]_{ll'} - (2Q/hbar^2) (1 - delta_ll') rho_{ll'}

Translation invariance splits it into N Bloch sectors. With
``rho_{l+r, l} = e^{i q l} f_r`` (indices mod N) a sector reads::

    f'_r = -(iA/hbar) [(e^{-iq} - 1) f_{r+1} + (e^{iq} - 1) f_{r-1}]
           - (2Q/hbar^2) (1 - delta_r0) f_r

The r = 0 site carries no dephasing, so the sector is an impurity problem
whose bound state is the diffusive eigenvalue.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .bath import BathSpec, KappaUnit, ThermalState
from .config import TOL
from .errors import BranchAbsent, DomainError
from .numerics import general_eig

__all__ = [
    "LoopModel",
    "DephasingBath",
    "Sector",
    "SectorSpectrum",
    "bloch_energies",
    "build_full_generator",
    "build_sector",
    "sector_spectrum",
    "full_spectrum_by_sectors",
    "diffusive_eigenvalue",
    "localization_ratio",
    "q_critical",
    "dephasing_from_ullersma",
    "dispersion_highT",
    "dispersion_small_q",
    "multiset_distance",
    "track_branches",
]


@dataclass(frozen=True)
class LoopModel:
    n_sites: int
    hop: float
    e0: float = 0.0
    hbar: float = 1.0

    def __post_init__(self):
        if int(self.n_sites) != self.n_sites or self.n_sites < 2:
            raise DomainError(f"n_sites must be an integer >= 2, got {self.n_sites}")
        if not self.hop > 0:
            raise DomainError(f"hop must be > 0, got {self.hop}")
        if not self.hbar > 0:
            raise DomainError(f"hbar must be > 0, got {self.hbar}")

    def hamiltonian(self) -> np.ndarray:
        n = self.n_sites
        h = self.e0 * np.eye(n)
        for l in range(n):
            h[l, (l + 1) % n] -= self.hop
            h[(l + 1) % n, l] -= self.hop
        return h

    def bloch_q(self, n: int) -> float:
        return 2.0 * math.pi * n / self.n_sites


@dataclass(frozen=True)
class DephasingBath:
    q_strength: float

    def __post_init__(self):
        if not self.q_strength >= 0:
            raise DomainError(f"q_strength must be >= 0, got {self.q_strength}")


@dataclass(frozen=True)
class Sector:
    n: int
    bloch_q: float
    matrix: np.ndarray
    branch_exists: bool     # Q >= 2 hbar A |sin(q/2)|


@dataclass(frozen=True)
class SectorSpectrum:
    bloch_q: float
    eigenvalues: np.ndarray
    diffusive: float | None


def bloch_energies(model: LoopModel) -> np.ndarray:
    m = np.arange(model.n_sites)
    return model.e0 - 2.0 * model.hop * np.cos(2.0 * math.pi * m / model.n_sites)


def build_full_generator(model: LoopModel, bath: DephasingBath) -> np.ndarray:
    """Generator on row-major ``vec(rho)``; size ``N^2``. Refuses ``N > 12``."""
    n = model.n_sites
    if n > TOL.full_generator_max_sites:
        raise DomainError(f"full generator refused for N = {n} > "
                          f"{TOL.full_generator_max_sites}; use the sector decomposition")
    h = model.hamiltonian()
    eye = np.eye(n)
    gen = (-1j / model.hbar) * (np.kron(h, eye) - np.kron(eye, h.T))
    off = 1.0 - eye.reshape(-1)
    gen[np.diag_indices(n * n)] -= 2.0 * bath.q_strength / model.hbar ** 2 * off
    return gen


def _branch_exists(model: LoopModel, bath: DephasingBath, q: float) -> bool:
    return bath.q_strength >= 2.0 * model.hbar * model.hop * abs(math.sin(q / 2.0))


def build_sector(model: LoopModel, bath: DephasingBath, n: int) -> Sector:
    """Sector ``q = 2 pi n / N``, ``1 <= n <= N``, acting on offsets ``r = 0..N-1``."""
    size = model.n_sites
    if not 1 <= n <= size:
        raise DomainError(f"sector index must lie in [1, {size}], got {n}")
    q = model.bloch_q(n)
    a, hb = model.hop, model.hbar
    up = -1j * a / hb * (np.exp(-1j * q) - 1.0)     # coefficient of f_{r+1}
    down = -1j * a / hb * (np.exp(1j * q) - 1.0)    # coefficient of f_{r-1}
    mat = np.zeros((size, size), dtype=complex)
    for r in range(size):
        mat[r, (r + 1) % size] += up
        mat[r, (r - 1) % size] += down
        if r:
            mat[r, r] -= 2.0 * bath.q_strength / hb ** 2
    return Sector(n, q, mat, _branch_exists(model, bath, q))


def sector_spectrum(sector: Sector) -> SectorSpectrum:
    """All sector eigenvalues, plus the diffusive one when it has separated.

    The diffusive eigenvalue is the eigenvalue of largest real part, provided
    the infinite-ring branch exists and that eigenvalue is real. On a finite
    ring just above the branch point the bound state is not yet localized and
    the top eigenvalue can still be complex; ``diffusive`` is then None.
    """
    ev = general_eig(sector.matrix)
    ev = ev[np.lexsort((ev.imag, -ev.real))]
    diffusive = None
    if sector.branch_exists:
        top = ev[0]
        scale = max(1.0, float(np.max(np.abs(ev))))
        if abs(top.imag) <= 1e-9 * scale:
            diffusive = float(top.real)
    return SectorSpectrum(sector.bloch_q, ev, diffusive)


def localization_ratio(model: LoopModel, bath: DephasingBath, q: float) -> float:
    """Decay ratio ``zeta = (1 - sqrt(1 - r^2)) / r`` of the diffusive bound state, ``r = 2 hbar A sin(q/2) / Q``.

    The finite-ring eigenvalue differs from the closed form by roughly ``zeta^N``.
    """
    if bath.q_strength == 0:
        return 1.0
    r = 2.0 * model.hbar * model.hop * abs(math.sin(q / 2.0)) / bath.q_strength
    if r == 0:
        return 0.0
    if r >= 1:
        return 1.0
    return r / (1.0 + math.sqrt(1.0 - r * r))


def full_spectrum_by_sectors(model: LoopModel, bath: DephasingBath) -> list[SectorSpectrum]:
    return [sector_spectrum(build_sector(model, bath, n)) for n in range(1, model.n_sites + 1)]


def diffusive_eigenvalue(model: LoopModel, bath: DephasingBath, q: float) -> float:
    """Bound-state rate ``-(2Q/hbar^2)(1 - sqrt(1 - (2 hbar A sin(q/2) / Q)^2))``.

    Evaluated as ``-(2Q/hbar^2) r^2 / (1 + sqrt(1 - r^2))`` to avoid cancellation.
    """
    s = abs(math.sin(q / 2.0))
    if s == 0.0:
        return 0.0
    if not _branch_exists(model, bath, q):
        raise BranchAbsent(f"Q = {bath.q_strength} < 2 hbar A |sin(q/2)| = "
                           f"{2 * model.hbar * model.hop * s}: no diffusive eigenvalue at q = {q}")
    qq, hb = bath.q_strength, model.hbar
    r2 = (2.0 * hb * model.hop * s / qq) ** 2
    return -(2.0 * qq / hb ** 2) * r2 / (1.0 + math.sqrt(max(0.0, 1.0 - r2)))


def q_critical(model: LoopModel) -> float:
    return 2.0 * model.hbar * model.hop * math.sin(math.pi / model.n_sites)


def dephasing_from_ullersma(bath: BathSpec, temp: ThermalState) -> DephasingBath:
    """White-noise strength matching the zero-frequency high-T spectral density: ``Q = kappa / beta``."""
    bath.require_unit(KappaUnit.ACTION)
    if temp.zero_temperature:
        raise DomainError("the white-noise identification needs finite temperature")
    return DephasingBath(bath.kappa / temp.beta)


def dispersion_highT(model: LoopModel, bath: BathSpec, temp: ThermalState, q: float) -> float:
    return diffusive_eigenvalue(model, dephasing_from_ullersma(bath, temp), q)


def dispersion_small_q(model: LoopModel, bath: BathSpec, temp: ThermalState, q: float) -> float:
    """Leading small-q term ``-(beta A^2 / kappa) q^2``."""
    return -temp.beta * model.hop ** 2 / bath.kappa * q * q


def multiset_distance(a: Sequence[complex], b: Sequence[complex]) -> float:
    """Largest pair distance under the optimal one-to-one matching."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise DomainError(f"multisets differ in size: {a.size} vs {b.size}")
    cost = np.abs(a[:, None] - b[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max()) if a.size else 0.0


def track_branches(model: LoopModel, n: int, q_values: Sequence[float]) -> np.ndarray:
    """Sector-``n`` eigenvalues along a sweep of Q, columns kept on continuous branches.

    Successive spectra are paired by minimum total distance in the complex
    plane (ties broken toward equal real parts).
    """
    rows = []
    prev = None
    for qv in q_values:
        ev = general_eig(build_sector(model, DephasingBath(qv), n).matrix)
        if prev is None:
            ev = ev[np.lexsort((ev.imag, -ev.real))]
        else:
            cost = np.abs(prev[:, None] - ev[None, :]) + 1e-12 * np.abs(prev.real[:, None] - ev.real[None, :])
            _, cols = linear_sum_assignment(cost)
            ev = ev[cols]
        rows.append(ev)
        prev = ev
    return np.array(rows)
