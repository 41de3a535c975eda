"""Spin coupled to a random-matrix (GOE) environment.

The bath Hamiltonian and coupling agent are ``X / sqrt(8N)`` and
``eta X' / sqrt(8N)`` with ``X, X'`` independent GOE matrices of size ``N/2``
(off-diagonal sd 1, diagonal sd sqrt(2)). The level density is then a
semicircle of radius 1/2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .damped_spin import (BlochVector, MarkovRates, SpinModel, Trajectory,
                          shifted_frequency_squared)
from .errors import DomainError, EmptyShellError
from .numerics import GaussianStream, bessel_j1, symmetric_eig

__all__ = [
    "GormModel",
    "MicrocanonicalWindow",
    "GoeSample",
    "GormRates",
    "EtaCritical",
    "DeviationReport",
    "sample_goe",
    "gorm_correlator",
    "gorm_ft",
    "gorm_rates",
    "gorm_shift_hilbert",
    "gorm_shift_closed_form",
    "eta_critical",
    "build_full_hamiltonian",
    "shell_states",
    "exact_evolve",
    "compare_exact_redfield",
    "count_sign_changes",
    "count_extrema",
]

SEMICIRCLE_RADIUS = 0.5


@dataclass(frozen=True)
class GormModel:
    n_total: int
    eta: float
    omega0: float
    hbar: float = 1.0

    def __post_init__(self):
        if int(self.n_total) != self.n_total or self.n_total < 4 or self.n_total % 2:
            raise DomainError(f"n_total must be an even integer >= 4, got {self.n_total}")
        if not self.eta >= 0:
            raise DomainError(f"eta must be >= 0, got {self.eta}")
        if not self.omega0 > 0:
            raise DomainError(f"omega0 must be > 0, got {self.omega0}")
        if not self.hbar > 0:
            raise DomainError(f"hbar must be > 0, got {self.hbar}")

    @property
    def bath_dim(self) -> int:
        return self.n_total // 2

    @property
    def spin(self) -> SpinModel:
        return SpinModel(self.omega0, self.hbar)

    def with_eta(self, eta: float) -> "GormModel":
        return GormModel(self.n_total, eta, self.omega0, self.hbar)


@dataclass(frozen=True)
class MicrocanonicalWindow:
    eps: float
    delta_eps: float

    def __post_init__(self):
        if not self.delta_eps > 0:
            raise DomainError(f"delta_eps must be > 0, got {self.delta_eps}")

    @property
    def bounds(self) -> tuple[float, float]:
        return self.eps - 0.5 * self.delta_eps, self.eps + 0.5 * self.delta_eps


@dataclass(frozen=True)
class GoeSample:
    hb: np.ndarray
    bmat: np.ndarray
    seed: int


@dataclass(frozen=True)
class GormRates:
    gamma: float
    omega2: float
    z_inf: float | None
    omega0: float

    def __post_init__(self):
        if self.gamma < 0:
            raise DomainError(f"gamma must be >= 0, got {self.gamma}")

    def as_markov(self) -> MarkovRates:
        return MarkovRates(self.gamma, self.omega2, self.z_inf, self.omega0)


@dataclass(frozen=True)
class EtaCritical:
    """Result of :func:`eta_critical`. Falsy when there is no transition."""

    eta_c: float | None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.eta_c is not None

    def __float__(self) -> float:
        if self.eta_c is None:
            raise DomainError(f"no transition: {self.reason}")
        return self.eta_c


@dataclass(frozen=True)
class DeviationReport:
    sup: dict
    rms: dict

    @property
    def worst(self) -> float:
        return max(self.sup.values())


# ---------------------------------------------------------------------------
# Sampling


def _goe(stream: GaussianStream, m: int) -> np.ndarray:
    g = stream.draw(m * m).reshape(m, m)
    return (g + g.T) / math.sqrt(2.0)


def sample_goe(model: GormModel, seed: int) -> GoeSample:
    """Draw ``X`` then ``X'`` from one seeded stream and apply the scalings.

    ``X'`` does not depend on ``eta``, so one seed gives the same bath for
    every coupling strength.
    """
    m = model.bath_dim
    stream = GaussianStream(seed)
    scale = 1.0 / math.sqrt(8.0 * model.n_total)
    x = _goe(stream, m)
    xp = _goe(stream, m)
    return GoeSample(hb=x * scale, bmat=(model.eta * scale) * xp, seed=int(seed))


# ---------------------------------------------------------------------------
# Large-N correlator and rates


def gorm_correlator(model: GormModel, window: MicrocanonicalWindow, t: float) -> complex:
    hb = model.hbar
    if t == 0:
        amp = model.eta ** 2 / 16.0
    else:
        amp = model.eta ** 2 * bessel_j1(t / (2.0 * hb)) / (4.0 * t / hb)
    return amp * complex(math.cos(window.eps * t / hb), math.sin(window.eps * t / hb))


def gorm_ft(model: GormModel, eps: float, omega):
    """Semicircle spectral density ``(eta^2 hbar / 2 pi) sqrt(1/4 - (eps + hbar w)^2)``, 0 outside."""
    w = np.asarray(omega, dtype=float)
    arg = 0.25 - (eps + model.hbar * w) ** 2
    out = model.eta ** 2 * model.hbar / (2 * math.pi) * np.sqrt(np.maximum(arg, 0.0))
    return out if out.ndim else float(out)


def _band_edges(model: GormModel, eps: float) -> list[float]:
    r = SEMICIRCLE_RADIUS
    return sorted({abs(r - eps) / model.hbar, abs(r + eps) / model.hbar})


def gorm_gamma(model: GormModel, eps: float) -> float:
    e, hw = eps, model.hbar * model.omega0
    root = lambda y: math.sqrt(max(0.0, 0.25 - y * y))
    return model.eta ** 2 / (2 * model.hbar) * (root(e - hw) + root(e + hw))


def gorm_rates(model: GormModel, eps: float) -> GormRates:
    """Markovian rates for a bath prepared at energy ``eps``.

    ``Omega^2 + Gamma^2`` comes from the principal-value quadrature of the
    semicircle density; ``z_inf`` is None when the Bohr frequency falls
    outside the band on both sides.
    """
    spin = model.spin
    gamma = gorm_gamma(model, eps)
    ft = lambda w: gorm_ft(model, eps, w)
    w2 = shifted_frequency_squared(spin, ft, points=_band_edges(model, eps))
    fp, fm = ft(model.omega0), ft(-model.omega0)
    z_inf = (fm - fp) / (fm + fp) if fm + fp > 0 else None
    return GormRates(gamma, w2 - gamma * gamma, z_inf, model.omega0)


def _semicircle_hilbert(y: float) -> float:
    # PV int_{-1/2}^{1/2} sqrt(1/4 - x^2) / (y - x) dx
    if abs(y) <= SEMICIRCLE_RADIUS:
        return math.pi * y
    return math.pi * (y - math.copysign(math.sqrt(y * y - 0.25), y))


def gorm_shift_hilbert(model: GormModel, eps: float) -> float:
    """``Omega^2 + Gamma^2`` from the finite Hilbert transform of the semicircle.

    Equals ``omega0^2 (1 + 2 eta^2)`` whenever ``|eps +- hbar omega0| <= 1/2``.
    """
    hw = model.hbar * model.omega0
    diff = _semicircle_hilbert(eps + hw) - _semicircle_hilbert(eps - hw)
    return model.omega0 ** 2 + model.eta ** 2 * model.omega0 / (math.pi * model.hbar) * diff


def gorm_shift_closed_form(model: GormModel, eps: float) -> float:
    """Closed arctan expression for ``Omega^2 + Gamma^2`` outside the band.

    Real only when both ``|eps +- hbar omega0| >= 1/2``; raises otherwise.
    Its shift comes out at half of :func:`gorm_shift_hilbert`, so it is kept
    as a reference only.
    """
    hw, e2, w0 = model.hbar * model.omega0, model.eta ** 2, model.omega0
    out = w0 * w0 + e2 * w0 * w0
    for y, sign in ((eps + hw, -1.0), (eps - hw, 1.0)):
        rad = y * y - 0.25
        if rad < 0:
            raise DomainError(f"radicand (eps {'+' if sign < 0 else '-'} hbar w0)^2 - 1/4 = {rad} < 0")
        r = math.sqrt(rad)
        if r == 0:
            continue
        term = r / math.pi * (math.atan((y + 0.5) / r) + math.atan((y - 0.5) / r))
        out += sign * e2 / model.hbar * w0 * term
    return out


def eta_critical(omega0: float, eps: float = 0.0, hbar: float = 1.0,
                 eta_max: float | None = None) -> EtaCritical:
    """Coupling where ``Omega^2(eta)`` vanishes.

    ``Gamma`` and the frequency shift are both proportional to ``eta^2``, so
    ``Omega^2 = omega0^2 + S eta^2 - G^2 eta^4`` with ``S, G`` read at ``eta = 1``.
    """
    unit = GormModel(4, 1.0, omega0, hbar)
    r = gorm_rates(unit, eps)
    g2 = r.gamma ** 2
    s = r.omega2 + g2 - omega0 ** 2
    if g2 == 0:
        return EtaCritical(None, "Gamma vanishes: omega0 lies outside the band")
    eta2 = (s + math.sqrt(s * s + 4 * g2 * omega0 ** 2)) / (2 * g2)
    eta = math.sqrt(eta2)
    if eta_max is not None and eta > eta_max:
        return EtaCritical(None, f"eta_c = {eta:.6g} exceeds eta_max = {eta_max}")
    return EtaCritical(eta)


# ---------------------------------------------------------------------------
# Exact dynamics


def build_full_hamiltonian(model: GormModel, sample: GoeSample) -> np.ndarray:
    """``(hbar w0 / 2) sz x 1 + 1 x hb + sx x bmat``, spin index outermost, up first."""
    m = model.bath_dim
    if sample.hb.shape != (m, m) or sample.bmat.shape != (m, m):
        raise DomainError(f"sample matrices {sample.hb.shape}, {sample.bmat.shape} "
                          f"do not match bath dimension {m}")
    half = 0.5 * model.hbar * model.omega0
    eye = np.eye(m)
    h = np.empty((2 * m, 2 * m))
    h[:m, :m] = sample.hb + half * eye
    h[m:, m:] = sample.hb - half * eye
    h[:m, m:] = sample.bmat
    h[m:, :m] = sample.bmat
    return h


def shell_states(sample: GoeSample, window: MicrocanonicalWindow):
    """Bath eigenpairs with energy in the closed window ``[eps - de/2, eps + de/2]``."""
    dec = symmetric_eig(sample.hb)
    lo, hi = window.bounds
    sel = (dec.eigenvalues >= lo) & (dec.eigenvalues <= hi)
    if not sel.any():
        k = int(np.argmin(np.abs(dec.eigenvalues - window.eps)))
        raise EmptyShellError(f"no bath eigenvalue in [{lo}, {hi}]; nearest is "
                              f"{dec.eigenvalues[k]:.6g}")
    return dec.eigenvalues[sel], dec.eigenvectors[:, sel]


def _spinor(b: BlochVector) -> tuple[complex, complex]:
    norm = b.norm
    if abs(norm - 1.0) > 1e-9:
        raise DomainError(f"initial spin must be pure (|b| = 1), got |b| = {norm}")
    theta = math.acos(max(-1.0, min(1.0, b.z)))
    phi = math.atan2(b.y, b.x)
    return complex(math.cos(theta / 2)), complex(math.cos(phi), math.sin(phi)) * math.sin(theta / 2)


def exact_evolve(model: GormModel, sample: GoeSample, window: MicrocanonicalWindow,
                 spin0: BlochVector, times, chunk: int = 32) -> Trajectory:
    """Shell-averaged Bloch vector under the full Hamiltonian.

    Each bath eigenstate in the window is paired with ``spin0`` and propagated
    with the eigendecomposition of the full Hamiltonian; the average over the
    shell is taken at the end.
    """
    t = np.asarray(times, dtype=float)
    _, vecs = shell_states(sample, window)
    m, k = vecs.shape
    up, dn = _spinor(spin0)
    psi0 = np.vstack([up * vecs, dn * vecs])              # (2m, k)
    full = symmetric_eig(build_full_hamiltonian(model, sample))
    e, v = full.eigenvalues, full.eigenvectors
    coef = v.T @ psi0.real + 1j * (v.T @ psi0.imag)        # (2m, k) complex
    out = np.empty((3, t.size))
    for start in range(0, t.size, chunk):
        tc = t[start:start + chunk]
        phase = np.exp(-1j * np.outer(e, tc) / model.hbar)  # (2m, nt)
        c_t = (coef[:, None, :] * phase[:, :, None]).reshape(2 * m, -1)
        # contiguous real operands keep both products on BLAS
        psi = v @ np.ascontiguousarray(c_t.real) + 1j * (v @ np.ascontiguousarray(c_t.imag))
        psi = psi.reshape(2 * m, tc.size, k)
        a, b = psi[:m], psi[m:]
        cross = np.einsum("itk,itk->tk", a.conj(), b)
        pop = np.einsum("itk,itk->tk", a.conj(), a).real - np.einsum("itk,itk->tk", b.conj(), b).real
        out[0, start:start + tc.size] = 2.0 * cross.real.mean(axis=1)
        out[1, start:start + tc.size] = 2.0 * cross.imag.mean(axis=1)
        out[2, start:start + tc.size] = pop.mean(axis=1)
    return Trajectory(t, out[0], out[1], out[2])


def compare_exact_redfield(exact: Trajectory, redfield: Trajectory) -> DeviationReport:
    if exact.t.shape != redfield.t.shape or not np.array_equal(exact.t, redfield.t):
        raise DomainError("trajectories are on different time grids")
    sup, rms = {}, {}
    for c in "xyz":
        d = exact.component(c) - redfield.component(c)
        sup[c] = float(np.max(np.abs(d))) if d.size else 0.0
        rms[c] = float(np.sqrt(np.mean(d * d))) if d.size else 0.0
    return DeviationReport(sup, rms)


# ---------------------------------------------------------------------------
# Shape diagnostics for noisy trajectories


def count_sign_changes(v: Sequence[float], tol: float) -> int:
    """Sign changes, ignoring excursions that stay within ``[-tol, tol]``."""
    state = 0
    changes = 0
    for x in v:
        s = 1 if x > tol else (-1 if x < -tol else 0)
        if s == 0:
            continue
        if state and s != state:
            changes += 1
        state = s
    return changes


def count_extrema(v: Sequence[float], tol: float) -> int:
    """Interior turning points whose reversal exceeds ``tol`` (zig-zag filter)."""
    v = list(v)
    if not v:
        return 0
    direction, turns = 0, 0
    hi = lo = ext = v[0]
    for x in v[1:]:
        if direction == 0:
            hi, lo = max(hi, x), min(lo, x)
            if hi - lo > tol:
                direction = 1 if x == hi else -1
                ext = x
        elif direction == 1:
            if x > ext:
                ext = x
            elif ext - x > tol:
                turns, direction, ext = turns + 1, -1, x
        else:
            if x < ext:
                ext = x
            elif x - ext > tol:
                turns, direction, ext = turns + 1, 1, x
    return turns
