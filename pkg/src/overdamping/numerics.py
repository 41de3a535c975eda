"""Numerical kernels with explicit accuracy contracts.

Quadrature and eigensolvers delegate to QUADPACK and LAPACK (via scipy/numpy);
the wrappers here add the error reporting, size guards and post-hoc residual
checks the rest of the package relies on.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy import integrate, special

from .config import TOL
from .errors import DomainError, EigenError, QuadratureError

__all__ = [
    "QuadratureResult",
    "adaptive_quadrature",
    "fourier_integral",
    "pv_integral",
    "CubicRoots",
    "cubic_discriminant",
    "cubic_roots",
    "bessel_j1",
    "GaussianStream",
    "gaussian_stream",
    "EigenDecomposition",
    "symmetric_eig",
    "general_eig",
    "ODEResult",
    "linear_ode_rk4",
]

# QUADPACK ier codes that mean "the answer is not trustworthy". ier=2 (roundoff
# detected) is accepted: the result is then as accurate as the arithmetic allows.
_QUAD_FATAL = {1: "maximum number of subdivisions reached",
               3: "extremely bad integrand behaviour",
               4: "algorithm does not converge",
               5: "integral is probably divergent or slowly convergent"}


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error: float
    panels: int

    def __float__(self) -> float:
        return float(self.value)


def adaptive_quadrature(
    f: Callable[[float], float],
    a: float,
    b: float,
    rel_tol: float = TOL.quad_rel,
    abs_tol: float = TOL.quad_abs_floor,
    points: Sequence[float] | None = None,
    limit: int = 500,
) -> QuadratureResult:
    """Globally adaptive Gauss-Kronrod quadrature of a real function.

    Infinite limits are handled by QUADPACK's domain mapping. Raises
    QuadratureError naming the worst panel when the error estimate cannot be
    brought under ``rel_tol * |value| + abs_tol``.
    """
    if a == b:
        return QuadratureResult(0.0, 0.0, 0)
    kwargs = dict(epsabs=abs_tol, epsrel=rel_tol, limit=limit, full_output=1)
    if points is not None and math.isfinite(a) and math.isfinite(b):
        pts = sorted(p for p in points if min(a, b) < p < max(a, b))
        if pts:
            kwargs["points"] = pts
    out = integrate.quad(f, a, b, **kwargs)
    value, err, info = out[0], out[1], out[2]
    ier = 0 if len(out) == 3 else _ier_from_message(out[3])
    panels = int(info.get("last", 0)) if isinstance(info, dict) else 0
    if ier in _QUAD_FATAL:
        worst = None
        if isinstance(info, dict) and "elist" in info and panels:
            k = int(np.argmax(info["elist"][:panels]))
            worst = (float(info["alist"][k]), float(info["blist"][k]))
        raise QuadratureError(
            f"quadrature on [{a}, {b}] failed: {_QUAD_FATAL[ier]} "
            f"(value={value:.6g}, error={err:.3g}, panels={panels}, worst panel={worst})",
            value=value, error=err, panels=panels, worst_panel=worst,
        )
    return QuadratureResult(float(value), float(abs(err)), panels)


def _ier_from_message(msg: str) -> int:
    m = msg.lower()
    if "maximum number of subdivisions" in m:
        return 1
    if "roundoff" in m:
        return 2
    if "extremely bad" in m:
        return 3
    if "does not converge" in m:
        return 4
    if "divergent" in m:
        return 5
    return 6


def fourier_integral(
    g: Callable[[float], float],
    t: float,
    kind: str = "cos",
    abs_tol: float = 1e-12,
    limlst: int = 200,
    split: float | None = None,
) -> QuadratureResult:
    """``int_0^inf g(w) cos(w t) dw`` (or ``sin``) for slowly decaying ``g``.

    Uses the QAWF cycle-by-cycle extrapolation, which converges for
    ``g ~ 1/w`` tails. ``t`` must be nonzero. With ``split`` the range
    ``[0, split]`` is done by a finite-interval oscillatory rule and only the
    tail goes to QAWF; this keeps very small ``t`` (cycles much longer than the
    scale of ``g``) tractable.
    """
    if kind not in ("cos", "sin"):
        raise ValueError(f"kind must be 'cos' or 'sin', got {kind!r}")
    if t == 0.0:
        raise DomainError("fourier_integral needs t != 0; the t=0 limit is not oscillatory")
    sign = 1.0
    if t < 0:
        t = -t
        sign = -1.0 if kind == "sin" else 1.0
    value, err = 0.0, 0.0
    lower = 0.0
    if split is not None:
        if not split > 0:
            raise DomainError(f"split must be > 0, got {split}")
        # the head spans at least 20 cycles so QAWF starts on a short period;
        # beyond ``split`` it is covered by doubling segments
        head = max(split, 40.0 * math.pi / t)
        edges = [0.0, split]
        while edges[-1] < head:
            edges.append(min(2.0 * edges[-1], head))
        tol_seg = 0.5 * abs_tol / (len(edges) - 1)
        for x0, x1 in zip(edges[:-1], edges[1:]):
            out = integrate.quad(g, x0, x1, weight=kind, wvar=t, epsabs=tol_seg,
                                 epsrel=1e-13, limit=500, full_output=1)
            _check_quad(out, t)
            value += out[0]
            err += out[1]
        lower = head
        abs_tol = 0.5 * abs_tol
    out = integrate.quad(g, lower, np.inf, weight=kind, wvar=t, epsabs=abs_tol,
                         limlst=limlst, full_output=1)
    _check_quad(out, t)
    value += out[0]
    err += out[1]
    return QuadratureResult(sign * float(value), float(abs(err)), 0)


def _check_quad(out, t) -> None:
    if len(out) > 3:
        msg = out[3]
        if "roundoff" not in msg.lower():
            raise QuadratureError(f"Fourier quadrature at t={t} failed: {msg}",
                                  value=out[0], error=out[1])


def pv_integral(
    f: Callable[[float], float],
    pole_locations: Sequence[float],
    a: float,
    b: float,
    rel_tol: float = TOL.pv_rel,
    abs_tol: float = 1e-14,
    points: Sequence[float] | None = None,
) -> float:
    """Cauchy principal value of ``int_a^b f`` where ``f`` has simple poles.

    Around each pole ``c`` a symmetric window ``[c-h, c+h]`` is folded onto
    ``[0, h]`` as ``f(c+u) + f(c-u)``; the odd singular parts cancel exactly,
    which is the window -> 0 limit without extrapolation. The rest of the
    interval is integrated directly. ``points`` marks extra breakpoints (e.g.
    square-root edges) that must not fall inside a window.
    """
    lo, hi = float(a), float(b)
    if lo >= hi:
        raise DomainError(f"need a < b, got [{a}, {b}]")
    poles = sorted(float(c) for c in pole_locations)
    for c in poles:
        if c == lo or c == hi:
            raise DomainError(f"pole at the interval endpoint {c}")
    poles = [c for c in poles if lo < c < hi]
    marks = sorted(p for p in (points or ()) if lo < p < hi and p not in poles)
    if not poles:
        return _plain(f, lo, hi, rel_tol, abs_tol, marks)

    # Half-widths: stay clear of endpoints, breakpoints and neighbouring windows.
    obstacles = [o for o in [lo, hi] + marks if math.isfinite(o)]
    widths = []
    for i, c in enumerate(poles):
        gaps = [abs(c - o) for o in obstacles]
        if i > 0:
            gaps.append(c - poles[i - 1])
        if i + 1 < len(poles):
            gaps.append(poles[i + 1] - c)
        widths.append(0.5 * min(gaps) if gaps else max(1.0, abs(c)))

    total = 0.0
    cursor = lo
    for c, h in zip(poles, widths):
        total += _plain(f, cursor, c - h, rel_tol, abs_tol, marks)
        folded = adaptive_quadrature(lambda u, c=c: f(c + u) + f(c - u), 0.0, h,
                                     rel_tol=rel_tol, abs_tol=abs_tol, limit=500)
        total += folded.value
        cursor = c + h
    total += _plain(f, cursor, hi, rel_tol, abs_tol, marks)
    return total


def _plain(f, a, b, rel_tol, abs_tol, marks):
    if a >= b:
        return 0.0
    inner = [m for m in marks if a < m < b]
    if not (math.isfinite(a) and math.isfinite(b)):
        # split at finite marks so each infinite piece has one finite end
        edges = [a] + inner + [b]
        return sum(adaptive_quadrature(f, x, y, rel_tol, abs_tol).value
                   for x, y in zip(edges[:-1], edges[1:]))
    return adaptive_quadrature(f, a, b, rel_tol, abs_tol, points=inner).value


# ---------------------------------------------------------------------------
# Cubic roots


class CubicRoots(NamedTuple):
    roots: np.ndarray       # complex, ordered: real root(s) first
    discriminant: float
    repeated: bool


def cubic_discriminant(c2: float, c1: float, c0: float) -> float:
    """Discriminant of ``s^3 + c2 s^2 + c1 s + c0``; positive means three real roots."""
    return (18.0 * c2 * c1 * c0 - 4.0 * c2 ** 3 * c0 + c2 ** 2 * c1 ** 2
            - 4.0 * c1 ** 3 - 27.0 * c0 ** 2)


def _cubic_scale(c2, c1, c0, s):
    s = abs(s)
    return max(s ** 3, abs(c2) * s ** 2, abs(c1) * s, abs(c0), 1e-300)


def _newton_polish(c2, c1, c0, s, iters=6):
    for _ in range(iters):
        p = ((s + c2) * s + c1) * s + c0
        dp = (3.0 * s + 2.0 * c2) * s + c1
        if dp == 0:
            break
        step = p / dp
        s_new = s - step
        if abs(((s_new + c2) * s_new + c1) * s_new + c0) >= abs(p):
            break
        s = s_new
    return s


def cubic_roots(c2: float, c1: float, c0: float, rel_tol: float = 1e-10) -> CubicRoots:
    """Roots of the real monic cubic ``s^3 + c2 s^2 + c1 s + c0``.

    A real root is found and polished, the cubic is deflated to a quadratic
    solved in cancellation-free form, and every root is Newton-polished on the
    original polynomial. Complex roots come out as an exact conjugate pair.
    ``repeated`` flags a (near-)zero discriminant.
    """
    c2, c1, c0 = float(c2), float(c1), float(c0)
    disc = cubic_discriminant(c2, c1, c0)
    seeds = np.roots([1.0, c2, c1, c0])
    real_seeds = seeds[np.abs(seeds.imag) <= 1e-7 * np.maximum(1.0, np.abs(seeds))].real
    if real_seeds.size == 0:
        real_seeds = np.array([seeds[np.argmin(np.abs(seeds.imag))].real])
    # deflate on the largest-magnitude real root: forward deflation is stable then
    r = float(real_seeds[np.argmax(np.abs(real_seeds))])
    r = float(_newton_polish(c2, c1, c0, r))
    b1 = c2 + r
    b0 = c1 + r * b1
    qd = b1 * b1 - 4.0 * b0
    if qd >= 0.0:
        sq = math.sqrt(qd)
        q = -0.5 * (b1 + math.copysign(sq, b1)) if b1 != 0 else -0.5 * sq
        if q != 0.0:
            r2, r3 = q, b0 / q
        else:
            r2 = r3 = 0.0
        r2 = float(_newton_polish(c2, c1, c0, r2))
        r3 = float(_newton_polish(c2, c1, c0, r3))
        roots = np.array(sorted([r, r2, r3]), dtype=complex)
    else:
        z = complex(-0.5 * b1, 0.5 * math.sqrt(-qd))
        z = _newton_polish(c2, c1, c0, z)
        roots = np.array([r, z.conjugate(), z], dtype=complex)

    scale = max(1.0, abs(c2), abs(c1), abs(c0)) ** 3
    repeated = abs(disc) <= rel_tol * scale
    if not repeated:
        # discriminant test is scale-sensitive; also compare root separations
        rr = roots
        sep = min(abs(rr[0] - rr[1]), abs(rr[0] - rr[2]), abs(rr[1] - rr[2]))
        repeated = sep <= 1e-7 * max(1.0, float(np.max(np.abs(rr))))
    return CubicRoots(roots, float(disc), bool(repeated))


# ---------------------------------------------------------------------------
# Special functions and random numbers


def bessel_j1(u):
    """Bessel function of the first kind, order one (Cephes implementation)."""
    return special.j1(u)


class GaussianStream:
    """Reproducible stream of standard normals.

    Philox4x64 is counter-based, so the bit stream depends only on the seed
    and the draw order, not on the platform or thread count.
    """

    def __init__(self, seed: int):
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self._gen = np.random.Generator(np.random.Philox(self.seed))

    def draw(self, count) -> np.ndarray:
        return self._gen.standard_normal(count)


def gaussian_stream(seed: int, count: int) -> np.ndarray:
    return GaussianStream(seed).draw(count)


# ---------------------------------------------------------------------------
# Eigensolvers


@dataclass
class EigenDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    max_residual: float        # max_i ||H v_i - l_i v_i|| / ||H||
    orthogonality_error: float  # ||V^T V - I||_max


def symmetric_eig(matrix: np.ndarray, check: bool = True) -> EigenDecomposition:
    """Eigen-decomposition of a real symmetric matrix, eigenvalues ascending."""
    h = np.asarray(matrix, dtype=float)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise DomainError(f"need a square matrix, got shape {h.shape}")
    if not np.array_equal(h, h.T):
        raise DomainError("symmetric_eig needs an exactly symmetric matrix")
    try:
        w, v = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise EigenError(f"eigh failed for a {h.shape[0]}x{h.shape[0]} matrix: {exc}") from exc
    res = orth = 0.0
    if check:
        norm = max(np.linalg.norm(h, 2) if h.shape[0] <= 400 else np.abs(w).max(), 1e-300)
        res = float(np.max(np.linalg.norm(h @ v - v * w, axis=0)) / norm)
        orth = float(np.max(np.abs(v.T @ v - np.eye(h.shape[0]))))
        if res > TOL.eig_residual or orth > TOL.eig_residual:
            raise EigenError(f"eigenpair residual {res:.2e}, orthogonality {orth:.2e} exceed "
                             f"{TOL.eig_residual:.0e}")
    return EigenDecomposition(w, v, res, orth)


def general_eig(matrix: np.ndarray) -> np.ndarray:
    """Eigenvalues of a small dense (possibly non-normal) matrix."""
    m = np.asarray(matrix)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DomainError(f"need a square matrix, got shape {m.shape}")
    if m.shape[0] > TOL.general_eig_max:
        raise DomainError(f"general_eig is capped at {TOL.general_eig_max}, got {m.shape[0]}")
    try:
        return np.linalg.eigvals(m)
    except np.linalg.LinAlgError as exc:
        raise EigenError(f"eigvals did not converge: {exc}") from exc


# ---------------------------------------------------------------------------
# Fixed-step RK4 for linear systems


@dataclass
class ODEResult:
    t: np.ndarray
    y: np.ndarray                  # shape (len(t), dim)
    steps: int
    invariant_drift: float | None  # max relative drift of the supplied invariant


def linear_ode_rk4(
    matvec: Callable[[np.ndarray], np.ndarray],
    y0: np.ndarray,
    t_grid: Sequence[float],
    step: float,
    omega_max: float | None = None,
    invariant: Callable[[np.ndarray], float] | None = None,
) -> ODEResult:
    """Integrate ``y' = M y`` with classical RK4 and a step no larger than ``step``.

    Between consecutive output times the interval is split into equal substeps.
    If ``omega_max`` (the largest frequency of ``M``) is given, steps beyond the
    RK4 stability limit ``2.8/omega_max`` are refused.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size == 0:
        raise DomainError("t_grid must be a non-empty 1-d sequence")
    if np.any(np.diff(t_grid) < 0):
        raise DomainError("t_grid must be ascending")
    if step <= 0:
        raise DomainError("step must be positive")
    if omega_max is not None and step * omega_max > 2.8:
        raise DomainError(f"step {step:g} exceeds the RK4 stability bound 2.8/omega_max "
                          f"= {2.8 / omega_max:g}")
    y = np.array(y0, dtype=float, copy=True)
    out = np.empty((t_grid.size, y.size))
    out[0] = y
    inv0 = invariant(y) if invariant is not None else None
    drift = 0.0
    nsteps = 0
    for k in range(1, t_grid.size):
        span = t_grid[k] - t_grid[k - 1]
        n = int(math.ceil(span / step - 1e-12)) if span > 0 else 0
        if n:
            h = span / n
            for _ in range(n):
                k1 = matvec(y)
                k2 = matvec(y + 0.5 * h * k1)
                k3 = matvec(y + 0.5 * h * k2)
                k4 = matvec(y + h * k3)
                y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            nsteps += n
        out[k] = y
        if invariant is not None:
            drift = max(drift, abs(invariant(y) - inv0) / max(abs(inv0), 1e-300))
    return ODEResult(t_grid, out, nsteps, drift if invariant is not None else None)
