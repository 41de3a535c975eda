"""Quantum Brownian motion: a harmonic oscillator linearly coupled to a Drude bath.

Eliminating the bath from the Heisenberg equations leaves a linear
integro-differential equation for the central coordinate whose Laplace
kernel, for the Ullersma spectral strength with cutoff ``alpha``, is
rational. The mean position then obeys a third-order ODE with
characteristic polynomial::

    p(s) = s^3 + alpha s^2 + (omega0^2 + alpha kappa) s + alpha omega0^2

whose roots are ``-lambda`` and ``-Gamma +- i Omega``. Matching coefficients
gives the three rate relations checked by :func:`rate_residuals`.

The response function ``A(t)`` has Laplace transform ``(s + alpha) / p(s)``,
so ``A(0) = 0``, ``A'(0) = 1``, ``A''(0) = 0``.

Here ``kappa`` carries frequency units: the bath couples to the coordinate
``Q`` with ``gamma(w) = (2/pi) kappa alpha^2 w^2 / (alpha^2 + w^2)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import integrate, linalg, optimize

from .bath import BathSpec, KappaUnit, ThermalState, spectral_gamma, thermal_energy
from .config import TOL
from .damped_spin import Regime, _damped_cos_sinc
from .errors import BranchAbsent, DomainError, NumericalError, RecurrenceError
from .numerics import cubic_discriminant, cubic_roots, linear_ode_rk4

__all__ = [
    "QbmModel",
    "QbmRates",
    "PerturbativeRates",
    "OscillatorMeanState",
    "DiscretizedBath",
    "UllersmaBound",
    "characteristic_coefficients",
    "rate_residuals",
    "exact_rates",
    "markov_rates",
    "markov_ratio",
    "perturbative_rates",
    "amplitude",
    "amplitude_dot",
    "amplitude_by_expm",
    "mean_displacement",
    "kappa_critical",
    "transition_kappa",
    "strong_overdamping_rate",
    "discretize_bath",
    "finite_bath_oracle",
    "oscillator_energy",
    "ullersma_bound",
    "to_ullersma_frequency_sq",
    "from_ullersma_frequency_sq",
    "ullersma_critical_kappa",
    "g_function",
    "g_function_rational",
]


@dataclass(frozen=True)
class QbmModel:
    omega0: float
    kappa: float
    alpha: float
    beta: float = math.inf
    hbar: float = 1.0

    def __post_init__(self):
        if not self.omega0 > 0:
            raise DomainError(f"omega0 must be > 0, got {self.omega0}")
        if not self.kappa >= 0:
            raise DomainError(f"kappa must be >= 0, got {self.kappa}")
        if not self.alpha > 0:
            raise DomainError(f"alpha must be > 0, got {self.alpha}")
        if not self.beta > 0:
            raise DomainError(f"beta must be > 0, got {self.beta}")
        if not self.hbar > 0:
            raise DomainError(f"hbar must be > 0, got {self.hbar}")

    @classmethod
    def from_bath(cls, omega0: float, bath: BathSpec, temp: ThermalState) -> "QbmModel":
        bath.require_unit(KappaUnit.FREQUENCY)
        return cls(omega0, bath.kappa, bath.alpha, temp.beta, bath.hbar)

    @property
    def bath(self) -> BathSpec:
        return BathSpec(self.kappa, self.alpha, self.hbar, KappaUnit.FREQUENCY)

    @property
    def thermal(self) -> ThermalState:
        return ThermalState(self.beta)

    def with_kappa(self, kappa: float) -> "QbmModel":
        return QbmModel(self.omega0, kappa, self.alpha, self.beta, self.hbar)


@dataclass(frozen=True)
class QbmRates:
    gamma: float
    omega2: float      # sign free: negative means overdamped
    lam: float
    regime: Regime
    residual: float | None = None   # worst relative residual of the rate relations

    def __post_init__(self):
        if self.gamma < 0:
            raise DomainError(f"gamma must be >= 0, got {self.gamma}")
        if not self.lam > 0:
            raise DomainError(f"lambda must be > 0, got {self.lam}")

    @property
    def pair_roots(self) -> tuple[complex, complex]:
        w = np.sqrt(complex(self.omega2))
        return complex(-self.gamma) + 1j * w, complex(-self.gamma) - 1j * w


@dataclass(frozen=True)
class PerturbativeRates:
    gamma: float
    omega2: float
    p2_eq: float
    mixed_coefficient: float


@dataclass(frozen=True)
class OscillatorMeanState:
    q_mean: float
    p_mean: float

    def __post_init__(self):
        if not (math.isfinite(self.q_mean) and math.isfinite(self.p_mean)):
            raise DomainError("initial means must be finite")


@dataclass(frozen=True)
class DiscretizedBath:
    frequencies: np.ndarray
    couplings: np.ndarray
    spacing: float

    @property
    def count(self) -> int:
        return int(self.frequencies.size)

    @property
    def recurrence_time(self) -> float:
        return 2.0 * math.pi / self.spacing

    @property
    def static_shift(self) -> float:
        """``sum eps_n^2 / w_n^2``; tends to ``kappa alpha`` in the continuum."""
        return float(np.sum(self.couplings ** 2 / self.frequencies ** 2))


@dataclass(frozen=True)
class UllersmaBound:
    kappa_max: float
    renormalized_omega0_sq: float


# ---------------------------------------------------------------------------
# Exact rates


def characteristic_coefficients(model: QbmModel) -> tuple[float, float, float]:
    a, w2 = model.alpha, model.omega0 ** 2
    return a, w2 + a * model.kappa, a * w2


def rate_residuals(model: QbmModel, gamma: float, omega2: float, lam: float) -> np.ndarray:
    """Relative residuals of the three relations linking (Gamma, Omega^2, lambda) to the model."""
    a, k, w2 = model.alpha, model.kappa, model.omega0 ** 2
    r1 = abs(lam + 2 * gamma - a) / a
    lhs2 = omega2 + gamma * gamma + 2 * lam * gamma
    r2 = abs(lhs2 - (w2 + a * k)) / max(w2 + a * k, abs(omega2) + gamma * gamma + 2 * lam * gamma)
    lhs3 = (omega2 + gamma * gamma) * lam
    r3 = abs(lhs3 - a * w2) / max(a * w2, abs(omega2) * lam + gamma * gamma * lam)
    return np.array([r1, r2, r3])


def _roots(model: QbmModel) -> np.ndarray:
    c2, c1, c0 = characteristic_coefficients(model)
    return cubic_roots(c2, c1, c0).roots


def _track_lambda_root(model: QbmModel, steps: int = 400) -> complex:
    """Root continuously connected to ``-alpha`` at ``kappa = 0``."""
    prev = complex(-model.alpha)
    for k in np.linspace(0.0, model.kappa, steps + 1)[1:]:
        rr = _roots(model.with_kappa(float(k)))
        prev = complex(rr[np.argmin(np.abs(rr - prev))])
    return prev


def exact_rates(model: QbmModel, tol: float = TOL.critical_band) -> QbmRates:
    """(Gamma, Omega^2, lambda) from the roots of the characteristic cubic.

    ``-lambda`` is the root tracked continuously from ``-alpha`` as kappa grows
    from zero; the other two give ``Gamma`` and ``Omega^2``. Far from the
    Markovian regime that root can itself join a complex pair, in which case
    no real (Gamma, Omega^2, lambda) exists and BranchAbsent is raised.
    """
    a = model.alpha
    if model.kappa == 0:
        return QbmRates(0.0, model.omega0 ** 2, a, Regime.NORMAL, 0.0)
    rr = _roots(model)
    tracked = _track_lambda_root(model)
    i = int(np.argmin(np.abs(rr - tracked)))
    if rr[i].imag != 0:
        raise BranchAbsent(f"the bath root has merged into a complex pair at kappa = {model.kappa}, "
                           f"alpha = {a}; roots {rr.tolist()}")
    lam = -float(rr[i].real)
    others = np.delete(rr, i)
    if others[0].imag != 0:
        gamma = -float(others[0].real)
        omega2 = float(others[0].imag) ** 2
    else:
        r1, r2 = float(others[0].real), float(others[1].real)
        gamma = -0.5 * (r1 + r2)
        omega2 = -0.25 * (r1 - r2) ** 2
    res = rate_residuals(model, gamma, omega2, lam)
    worst = float(res.max())
    if worst > TOL.characteristic_residual:
        raise NumericalError(f"rate relations violated: residuals {res.tolist()}")
    band = tol * max(model.omega0 ** 2, gamma * gamma)
    if abs(omega2) <= band:
        regime = Regime.CRITICAL
    else:
        regime = Regime.NORMAL if omega2 > 0 else Regime.OVERDAMPED
    return QbmRates(max(gamma, 0.0), omega2, lam, regime, worst)


def markov_rates(model: QbmModel, tol: float = TOL.critical_band) -> QbmRates:
    g = 0.5 * model.kappa
    w2 = model.omega0 ** 2 - g * g
    band = tol * max(model.omega0 ** 2, g * g)
    regime = Regime.CRITICAL if abs(w2) <= band else (Regime.NORMAL if w2 > 0 else Regime.OVERDAMPED)
    return QbmRates(g, w2, model.alpha, regime, None)


def markov_ratio(model: QbmModel, rates: QbmRates | None = None) -> float:
    """``min(alpha, lambda) / max|s|`` over the oscillator pair; large means Markovian."""
    rates = rates or exact_rates(model)
    fastest = max(abs(s) for s in rates.pair_roots)
    if fastest == 0:
        return math.inf
    return min(model.alpha, rates.lam) / fastest


def perturbative_rates(model: QbmModel) -> PerturbativeRates:
    """Second-order Redfield coefficients; the mixed term is the high-temperature form."""
    a, k, w0 = model.alpha, model.kappa, model.omega0
    d = a * a + w0 * w0
    gp = k * a * a / (2 * d)
    w2_plus_g2 = w0 * w0 + k * a - k * a ** 3 / d
    p2 = thermal_energy(model.thermal, w0, model.hbar)
    mixed = 0.0 if math.isinf(model.beta) else k * a / (model.beta * d)
    return PerturbativeRates(gp, w2_plus_g2 - gp * gp, float(p2), mixed)


# ---------------------------------------------------------------------------
# Response function and mean displacement


def _as_times(t) -> tuple[np.ndarray, bool]:
    arr = np.asarray(t, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    if np.any(arr < 0):
        raise DomainError("times must be >= 0")
    return arr, scalar


def _resonant(rates: QbmRates) -> bool:
    d = (rates.lam - rates.gamma) ** 2 + rates.omega2
    scale = rates.lam ** 2 + abs(rates.omega2) + rates.gamma ** 2
    return abs(d) <= 1e-8 * scale


def _companion(rates: QbmRates) -> np.ndarray:
    # p(s) rebuilt from the rates so that the companion matches them exactly
    lam, g, w2 = rates.lam, rates.gamma, rates.omega2
    c2 = lam + 2 * g
    c1 = w2 + g * g + 2 * lam * g
    c0 = (w2 + g * g) * lam
    return np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [-c0, -c1, -c2]])


def amplitude_by_expm(rates: QbmRates, t) -> tuple[np.ndarray, np.ndarray]:
    """``(A, A')`` by propagating ``(A, A', A'') = (0, 1, 0)`` with the companion matrix."""
    ts, _ = _as_times(t)
    m = _companion(rates)
    e0 = np.array([0.0, 1.0, 0.0])
    out = np.array([linalg.expm(m * tt) @ e0 for tt in ts])
    return out[:, 0], out[:, 1]


def _full_form(rates: QbmRates, ts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    lam, g, w2 = rates.lam, rates.gamma, rates.omega2
    d = (lam - g) ** 2 + w2
    c = 2 * g / d
    b = (lam * lam + w2 - g * g) / d
    ec, es = _damped_cos_sinc(g, w2, ts)
    el = np.exp(-lam * ts)
    a = c * (el - ec) + b * es
    adot = c * (-lam * el + g * ec + w2 * es) + b * (ec - g * es)
    return a, adot


def _evaluate(model: QbmModel, rates: QbmRates, t, form: str):
    ts, scalar = _as_times(t)
    if form == "markov":
        ec, es = _damped_cos_sinc(rates.gamma, rates.omega2, ts)
        a, adot = es, ec - rates.gamma * es
    elif form == "full":
        if _resonant(rates):
            a, adot = amplitude_by_expm(rates, ts)
        else:
            a, adot = _full_form(rates, ts)
    else:
        raise DomainError(f"form must be 'full' or 'markov', got {form!r}")
    if scalar:
        return float(a[0]), float(adot[0])
    return a, adot


def amplitude(model: QbmModel, rates: QbmRates, t, form: str = "full"):
    """Response function ``A(t)``: full three-rate form or the two-rate Markovian one."""
    return _evaluate(model, rates, t, form)[0]


def amplitude_dot(model: QbmModel, rates: QbmRates, t, form: str = "full"):
    return _evaluate(model, rates, t, form)[1]


def mean_displacement(model: QbmModel, rates: QbmRates, init: OscillatorMeanState, t,
                      form: str = "full"):
    a, adot = _evaluate(model, rates, t, form)
    return adot * init.q_mean + a * init.p_mean


# ---------------------------------------------------------------------------
# Critical coupling


def kappa_critical(model: QbmModel) -> float:
    return 2.0 * model.omega0


def _normalized_discriminant(model: QbmModel, kappa: float) -> float:
    c2, c1, c0 = characteristic_coefficients(model.with_kappa(kappa))
    scale = max(c2, math.sqrt(c1), c0 ** (1 / 3)) ** 6
    return cubic_discriminant(c2, c1, c0) / scale


def transition_kappa(model: QbmModel, k_max: float | None = None, grid: int = 400) -> float:
    """Smallest ``kappa`` at which the complex pair meets the real axis (discriminant zero)."""
    k_max = k_max if k_max is not None else 20.0 * model.omega0
    ks = np.geomspace(1e-6 * model.omega0, k_max, grid)
    vals = [_normalized_discriminant(model, k) for k in ks]
    for i in range(1, grid):
        if vals[i - 1] < 0 <= vals[i]:
            return float(optimize.brentq(lambda k: _normalized_discriminant(model, k),
                                         ks[i - 1], ks[i], xtol=1e-14, rtol=1e-13))
    raise BranchAbsent(f"no overdamping transition for kappa <= {k_max}")


def strong_overdamping_rate(model: QbmModel) -> float:
    """Slow Markovian root ``-k/2 + (k/2) sqrt(1 - (2 w0/k)^2)`` in cancellation-free form."""
    k = model.kappa
    kc = kappa_critical(model)
    if k < kc:
        raise BranchAbsent(f"kappa = {k} below the critical coupling {kc}")
    r2 = (kc / k) ** 2
    return -0.5 * k * r2 / (1.0 + math.sqrt(1.0 - r2))


# ---------------------------------------------------------------------------
# Brute-force finite bath


def discretize_bath(model: QbmModel, n_osc: int, omega_max: float) -> DiscretizedBath:
    if n_osc < 100:
        raise DomainError(f"n_osc must be >= 100, got {n_osc}")
    if omega_max < 10 * model.alpha:
        raise DomainError(f"omega_max must be >= 10 alpha = {10 * model.alpha}, got {omega_max}")
    dw = omega_max / n_osc
    w = (np.arange(n_osc) + 0.5) * dw
    eps = np.sqrt(spectral_gamma(model.bath, w) * dw)
    return DiscretizedBath(w, eps, dw)


def oscillator_energy(model: QbmModel, bath: DiscretizedBath, y: np.ndarray) -> float:
    """Conserved quadratic form of the mean-value flow (bath in displaced coordinates)."""
    n = bath.count
    q, qn, p, pn = y[0], y[1:n + 1], y[n + 1], y[n + 2:]
    w2 = bath.frequencies ** 2
    shifted = qn + bath.couplings * q / w2
    return 0.5 * (p * p + model.omega0 ** 2 * q * q) + 0.5 * float(np.sum(pn * pn + w2 * shifted ** 2))


def finite_bath_oracle(model: QbmModel, n_osc: int, omega_max: float, init: OscillatorMeanState,
                       times: Sequence[float], step_fraction: float = 1.0 / 40.0,
                       return_result: bool = False):
    """Mean position from the explicit (2 n_osc + 2)-dimensional linear system.

    Bath means start at rest. The central oscillator carries the counterterm
    ``sum eps^2 / w^2`` so that its static frequency stays ``omega0``.
    The RK4 step is ``step_fraction / max(omega_max, omega0)``; fractions above
    1/20 are refused. RK4 is not symplectic and its energy drift scales as
    the fourth power of the step, hence the finer default.
    """
    if not 0 < step_fraction <= 1.0 / 20.0:
        raise DomainError(f"step_fraction must lie in (0, 1/20], got {step_fraction}")
    bath = discretize_bath(model, n_osc, omega_max)
    t = np.asarray(times, dtype=float)
    if t.ndim != 1 or t.size == 0:
        raise DomainError("times must be a non-empty 1-d grid")
    if t[-1] > 0.5 * bath.recurrence_time:
        raise RecurrenceError(f"final time {t[-1]:g} exceeds half the recurrence time "
                              f"{0.5 * bath.recurrence_time:g}")
    n = bath.count
    w2 = bath.frequencies ** 2
    eps = bath.couplings
    w_eff2 = model.omega0 ** 2 + bath.static_shift

    def matvec(y):
        q, qn, p, pn = y[0], y[1:n + 1], y[n + 1], y[n + 2:]
        out = np.empty_like(y)
        out[0] = p
        out[1:n + 1] = pn
        out[n + 1] = -w_eff2 * q - float(eps @ qn)
        out[n + 2:] = -w2 * qn - eps * q
        return out

    y0 = np.zeros(2 * n + 2)
    y0[0] = init.q_mean
    y0[n + 1] = init.p_mean
    w_top = max(omega_max, model.omega0, math.sqrt(w_eff2))
    step = step_fraction / w_top
    res = linear_ode_rk4(matvec, y0, t, step, omega_max=w_top,
                         invariant=lambda y: oscillator_energy(model, bath, y))
    q = res.y[:, 0]
    return (q, res) if return_result else q


# ---------------------------------------------------------------------------
# Ullersma mapping and the dispersion function


def ullersma_bound(model: QbmModel) -> UllersmaBound:
    return UllersmaBound(model.omega0 ** 2 / model.alpha, to_ullersma_frequency_sq(model))


def to_ullersma_frequency_sq(model: QbmModel) -> float:
    return model.omega0 ** 2 + model.kappa * model.alpha


def from_ullersma_frequency_sq(omega_u_sq: float, kappa: float, alpha: float) -> float:
    """QBM ``omega0^2`` for an Ullersma bare frequency; must stay positive."""
    w2 = omega_u_sq - kappa * alpha
    if w2 <= 0:
        raise DomainError(f"kappa alpha = {kappa * alpha} exceeds the bare frequency squared {omega_u_sq}")
    return w2


def ullersma_critical_kappa(omega_u_sq: float, alpha: float) -> float:
    """Positive root of ``kappa alpha + kappa^2 / 4 = omega_u^2``."""
    # 2(-a + sqrt(a^2 + w^2)) without cancellation
    return 2.0 * omega_u_sq / (alpha + math.sqrt(alpha * alpha + omega_u_sq))


def g_function(model: QbmModel, z: complex) -> complex:
    """``z^2 - w0^2 - int g/w^2 - int g(w)/(z^2 - w^2) dw`` by quadrature, for ``Im z > 0``."""
    z = complex(z)
    if z.imag <= 0:
        raise DomainError("g_function is evaluated in the upper half plane only")
    spec = model.bath
    z2 = z * z

    def part(fn):
        val, _ = integrate.quad(lambda w: fn(spectral_gamma(spec, w) / (z2 - w * w)),
                                0.0, math.inf, epsabs=0.0, epsrel=1e-11, limit=400)
        return val

    integral = part(lambda v: v.real) + 1j * part(lambda v: v.imag)
    return z2 - model.omega0 ** 2 - model.kappa * model.alpha - integral


def g_function_rational(model: QbmModel, z: complex) -> complex:
    """Closed form ``-p(s)/(s + alpha)`` with ``s = -i z``."""
    s = -1j * complex(z)
    c2, c1, c0 = characteristic_coefficients(model)
    return -(s ** 3 + c2 * s * s + c1 * s + c0) / (s + model.alpha)
