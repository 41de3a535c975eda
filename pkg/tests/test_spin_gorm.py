import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, special, stats

from overdamping.damped_spin import BlochVector, Regime, classify, evolve
from overdamping.errors import DomainError, EmptyShellError
from overdamping.numerics import fourier_integral
from overdamping.spin_gorm import (
    GormModel, MicrocanonicalWindow, build_full_hamiltonian, compare_exact_redfield,
    count_extrema, count_sign_changes, eta_critical, exact_evolve, gorm_correlator,
    gorm_ft, gorm_gamma, gorm_rates, gorm_shift_closed_form, gorm_shift_hilbert,
    sample_goe,
)


# ---------------------------------------------------------------------------
# sampling

def test_sample_is_reproducible():
    m = GormModel(60, 0.2, 0.1)
    a, b = sample_goe(m, 7), sample_goe(m, 7)
    assert np.array_equal(a.hb, b.hb) and np.array_equal(a.bmat, b.bmat)
    c = sample_goe(m, 8)
    assert not np.array_equal(a.hb, c.hb)


def test_sample_symmetric_and_eta_scaling():
    s1 = sample_goe(GormModel(40, 1.0, 0.1), 3)
    s2 = sample_goe(GormModel(40, 0.3, 0.1), 3)
    assert np.array_equal(s1.hb, s1.hb.T) and np.array_equal(s1.bmat, s1.bmat.T)
    assert np.array_equal(s1.hb, s2.hb)
    assert np.allclose(0.3 * s1.bmat, s2.bmat, rtol=1e-15, atol=0)


def test_sample_entry_statistics():
    n = 400
    s = sample_goe(GormModel(n, 1.0, 0.1), 11)
    x = s.hb * math.sqrt(8.0 * n)          # unscaled GOE
    m = x.shape[0]
    iu = np.triu_indices(m, 1)
    off, diag = x[iu], np.diag(x)
    # off-diagonal variance 1, diagonal variance 2
    assert abs(off.mean()) < 4.0 / math.sqrt(off.size)
    assert abs(off.var() - 1.0) < 4.0 * math.sqrt(2.0 / off.size)
    assert abs(diag.var() - 2.0) < 4.0 * 2.0 * math.sqrt(2.0 / diag.size)


def test_semicircle_histogram():
    n = 1200
    ev = np.linalg.eigvalsh(sample_goe(GormModel(n, 1.0, 0.1), 5).hb)
    edges = np.linspace(-0.5, 0.5, 13)
    obs, _ = np.histogram(np.clip(ev, -0.5 + 1e-12, 0.5 - 1e-12), edges)
    cdf = lambda y: 0.5 + (2 * y * np.sqrt(np.maximum(0.25 - y * y, 0)) * 2
                           + np.arcsin(np.clip(2 * y, -1, 1))) / math.pi
    exp = np.diff(cdf(edges)) * ev.size
    assert stats.chisquare(obs, exp * obs.sum() / exp.sum()).pvalue > 0.01


def test_model_validation():
    with pytest.raises(DomainError):
        GormModel(5, 0.1, 0.1)
    with pytest.raises(DomainError):
        GormModel(10, -0.1, 0.1)
    with pytest.raises(DomainError):
        MicrocanonicalWindow(0.0, 0.0)


# ---------------------------------------------------------------------------
# correlator and rates

def test_correlator_at_zero():
    m = GormModel(4, 0.3, 0.1)
    assert gorm_correlator(m, MicrocanonicalWindow(0.1, 0.01), 0.0) == pytest.approx(0.09 / 16)


@given(st.floats(-0.4, 0.4), st.floats(0.01, 50.0))
def test_correlator_modulus_independent_of_eps(eps, t):
    m = GormModel(4, 0.5, 0.1)
    a = gorm_correlator(m, MicrocanonicalWindow(0.0, 0.01), t)
    b = gorm_correlator(m, MicrocanonicalWindow(eps, 0.01), t)
    assert abs(abs(a) - abs(b)) <= 1e-15 + 1e-12 * abs(a)


def test_correlator_small_t_continuous():
    m = GormModel(4, 0.5, 0.1)
    w = MicrocanonicalWindow(0.0, 0.01)
    assert abs(gorm_correlator(m, w, 1e-6) - gorm_correlator(m, w, 0.0)) < 1e-12


def test_spectral_density_matches_correlator_by_fft():
    # alpha(t) = int dw e^{-i w t} alpha~(w) with alpha~ the semicircle density
    eta, eps = 1.0, 0.1
    m = GormModel(4, eta, 0.1)
    n, dt = 2 ** 16, 0.25
    t = (np.arange(n) - n // 2) * dt
    win = MicrocanonicalWindow(eps, 0.01)
    corr = np.array([gorm_correlator(m, win, abs(x)) for x in t])
    corr[t < 0] = np.conj(corr[t < 0])
    # alpha~(w) = (1/2 pi) int dt e^{i w t} alpha(t)
    w = 2 * math.pi * np.fft.fftshift(np.fft.fftfreq(n, dt))
    spec = np.fft.fftshift(np.fft.ifft(np.fft.ifftshift(corr))) * n * dt / (2 * math.pi)
    ref = gorm_ft(m, eps, w)
    sel = np.abs(w) < 1.0
    peak = ref.max()
    assert np.max(np.abs(spec.real[sel] - ref[sel])) < 1e-2 * peak
    core = np.abs(eps + w) < 0.4
    assert np.max(np.abs(spec.real[core] - ref[core])) < 1e-3 * peak


def test_sum_rule():
    for eta, eps in [(0.2, 0.0), (1.0, 0.3)]:
        m = GormModel(4, eta, 0.1)
        lo, hi = -0.5 - eps, 0.5 - eps
        val, _ = integrate.quad(lambda w: gorm_ft(m, eps, w), lo, hi, epsabs=1e-14)
        assert val == pytest.approx(eta ** 2 / 16, rel=1e-9)


def test_gamma_two_paths():
    for eps, w0 in [(0.0, 0.01), (0.2, 0.15), (0.35, 0.2), (0.0, 0.7)]:
        m = GormModel(4, 0.3, w0)
        direct = gorm_gamma(m, eps)
        via_ft = math.pi * (gorm_ft(m, eps, w0) + gorm_ft(m, eps, -w0))
        assert abs(direct - via_ft) <= 1e-12


def test_gamma_example():
    m = GormModel(4, 0.2, 0.01)
    assert gorm_rates(m, 0.0).gamma == pytest.approx(0.04 * math.sqrt(0.25 - 1e-4), rel=1e-12)
    assert gorm_rates(m, 0.0).gamma == pytest.approx(0.019996, abs=1e-6)


def test_gamma_vanishes_outside_band():
    m = GormModel(4, 0.5, 0.3)
    r = gorm_rates(m, 0.9)
    assert r.gamma == 0.0 and r.z_inf is None


def test_in_band_shift():
    for w0, eta in [(0.01, 0.1), (0.1, 0.5), (0.3, 0.2)]:
        m = GormModel(4, eta, w0)
        assert gorm_shift_hilbert(m, 0.0) == pytest.approx(w0 ** 2 * (1 + 2 * eta ** 2), rel=1e-10)
        r = gorm_rates(m, 0.0)
        assert r.omega2 + r.gamma ** 2 == pytest.approx(w0 ** 2 * (1 + 2 * eta ** 2), rel=1e-8)


def test_in_band_shift_time_domain_oracle():
    # shift = (4 w0 / hbar^2) int_0^inf sin(w0 s) Re alpha(s) ds at eps = 0
    w0, eta = 0.2, 0.4
    m = GormModel(4, eta, w0)
    f = lambda s: eta ** 2 * special.j1(s / 2) / (4 * s) if s > 0 else eta ** 2 / 16
    val = fourier_integral(f, w0, kind="sin").value
    assert w0 ** 2 + 4 * w0 * val == pytest.approx(gorm_shift_hilbert(m, 0.0), rel=1e-7)


def test_closed_form_outside_band_gives_half_shift():
    for eps, w0, eta in [(0.9, 0.3, 0.5), (1.2, 0.1, 1.0), (-0.8, 0.2, 0.3)]:
        m = GormModel(4, eta, w0)
        h, c = gorm_shift_hilbert(m, eps), gorm_shift_closed_form(m, eps)
        assert (c - w0 ** 2) == pytest.approx(0.5 * (h - w0 ** 2), rel=1e-9)


def test_closed_form_refuses_in_band():
    with pytest.raises(DomainError):
        gorm_shift_closed_form(GormModel(4, 0.2, 0.1), 0.0)


# ---------------------------------------------------------------------------
# critical coupling

def test_eta_critical_small_omega0():
    r = eta_critical(0.01)
    assert r
    assert 0.138 <= float(r) <= 0.145
    assert float(r) == pytest.approx(math.sqrt(0.02), rel=0.02)


def test_eta_critical_zero_of_omega2():
    for w0 in (0.005, 0.02, 0.1):
        ec = float(eta_critical(w0))
        assert abs(gorm_rates(GormModel(4, ec, w0), 0.0).omega2) < 1e-12 * max(1.0, w0 ** 2) + 1e-15


def test_eta_critical_absent():
    r = eta_critical(0.4, eta_max=0.3)
    assert not r and "eta_max" in r.reason
    with pytest.raises(DomainError):
        float(r)
    assert not eta_critical(0.6)


def test_regime_flip_across_eta_c():
    w0 = 0.01
    ec = float(eta_critical(w0))
    below = gorm_rates(GormModel(4, 0.9 * ec, w0), 0.0).as_markov()
    above = gorm_rates(GormModel(4, 1.1 * ec, w0), 0.0).as_markov()
    assert classify(below) is Regime.NORMAL
    assert classify(above) is Regime.OVERDAMPED


def test_slowest_rate_cusp_at_eta_c():
    # |Re s| of the slowest transverse mode peaks at eta_c
    w0 = 0.01
    ec = float(eta_critical(w0))

    def slow(eta):
        r = gorm_rates(GormModel(4, eta, w0), 0.0)
        return r.gamma - math.sqrt(max(0.0, -r.omega2))

    etas = np.linspace(0.5 * ec, 2 * ec, 301)
    vals = [slow(e) for e in etas]
    assert abs(etas[int(np.argmax(vals))] - ec) < 0.01 * ec


# ---------------------------------------------------------------------------
# full Hamiltonian and exact dynamics

def test_full_hamiltonian_structure():
    m = GormModel(20, 0.3, 0.2)
    s = sample_goe(m, 2)
    h = build_full_hamiltonian(m, s)
    assert np.array_equal(h, h.T)
    assert np.trace(h) == pytest.approx(2 * np.trace(s.hb), abs=1e-14)
    h0 = build_full_hamiltonian(m.with_eta(0.0), sample_goe(m.with_eta(0.0), 2))
    ev = np.sort(np.linalg.eigvalsh(h0))
    eb = np.linalg.eigvalsh(s.hb)
    assert np.allclose(ev, np.sort(np.concatenate([eb + 0.1, eb - 0.1])), atol=1e-13)


def test_exact_evolve_initial_value_and_norm():
    m = GormModel(200, 0.3, 0.2)
    s = sample_goe(m, 4)
    b0 = BlochVector.from_angles(1.1, 0.4)
    traj = exact_evolve(m, s, MicrocanonicalWindow(0.0, 0.05), b0, np.linspace(0, 40, 41))
    assert np.allclose(traj[0].as_array(), b0.as_array(), atol=1e-12)
    assert np.all(traj.norms() <= 1 + 1e-9)


def test_exact_evolve_free_precession():
    m = GormModel(100, 0.0, 0.3)
    s = sample_goe(m, 1)
    b0 = BlochVector(1.0, 0.0, 0.0)
    t = np.linspace(0, 30, 61)
    traj = exact_evolve(m, s, MicrocanonicalWindow(0.0, 0.1), b0, t)
    red = evolve(gorm_rates(m, 0.0).as_markov(), m.spin, b0, t)
    assert compare_exact_redfield(traj, red).worst < 1e-10


def test_exact_evolve_refuses_mixed_and_empty():
    m = GormModel(40, 0.2, 0.1)
    s = sample_goe(m, 1)
    with pytest.raises(DomainError):
        exact_evolve(m, s, MicrocanonicalWindow(0.0, 0.2), BlochVector(0.5, 0, 0), [0.0])
    with pytest.raises(EmptyShellError):
        exact_evolve(m, s, MicrocanonicalWindow(3.0, 0.01), BlochVector(0, 0, 1), [0.0])


def test_compare_identical_and_grid_mismatch():
    m = GormModel(4, 0.2, 0.1)
    b0 = BlochVector(0, 0, 1)
    r = gorm_rates(m, 0.0).as_markov()
    a = evolve(r, m.spin, b0, np.linspace(0, 5, 11))
    rep = compare_exact_redfield(a, a)
    assert rep.worst == 0.0 and max(rep.rms.values()) == 0.0
    with pytest.raises(DomainError):
        compare_exact_redfield(a, evolve(r, m.spin, b0, np.linspace(0, 5, 12)))


# ---------------------------------------------------------------------------
# shape diagnostics

def test_count_sign_changes():
    assert count_sign_changes([1, -1, 1, -1], 0.1) == 3
    assert count_sign_changes([1, 0.05, -0.05, 0.05, 1], 0.1) == 0
    assert count_sign_changes([], 0.1) == 0
    t = np.linspace(0, 10, 500)
    assert count_sign_changes(np.cos(t), 0.01) == 3


def test_count_extrema():
    t = np.linspace(0, 10, 500)
    assert count_extrema(np.cos(t), 0.01) == 3
    assert count_extrema(np.exp(-t), 0.01) == 0
    noisy = np.exp(-t) + 1e-3 * np.sin(50 * t)
    assert count_extrema(noisy, 0.01) == 0


@settings(max_examples=30)
@given(st.lists(st.floats(-1, 1), max_size=40))
def test_sign_changes_bounded_by_extrema(v):
    assert count_sign_changes(v, 0.05) <= count_extrema(v, 0.05) + 1
