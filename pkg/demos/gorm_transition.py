"""Spin in a random-matrix environment: weak coupling that still overdamps.

Prints the critical coupling for a small splitting, then compares exact
shell-averaged dynamics with the Redfield prediction on either side of it.
Run with ``python demos/gorm_transition.py [N]``; N defaults to 600.
"""
import math
import sys

import numpy as np

from overdamping.damped_spin import BlochVector, classify, evolve
from overdamping.spin_gorm import (GormModel, MicrocanonicalWindow, compare_exact_redfield,
                                   count_sign_changes, eta_critical, exact_evolve, gorm_rates,
                                   sample_goe)

n = int(sys.argv[1]) if len(sys.argv) > 1 else 600
w0 = 0.01
ec = float(eta_critical(w0))
print(f"eta_c(omega0={w0}) = {ec:.6f}   (small-omega0 estimate sqrt(2 omega0) = {math.sqrt(2 * w0):.6f})")

b0 = BlochVector(math.sqrt(8) / 3, 0.0, 1 / 3)
window = MicrocanonicalWindow(0.0, 0.025)
base = sample_goe(GormModel(n, 1.0, w0), seed=1)

for eta in (0.5 * ec, ec, 1.5 * ec):
    model = GormModel(n, eta, w0)
    rates = gorm_rates(model, 0.0)
    ts = np.linspace(0.0, 3.0 / rates.gamma, 151)
    sample = type(base)(base.hb, eta * base.bmat, base.seed)
    exact = exact_evolve(model, sample, window, b0, ts)
    red = evolve(rates.as_markov(), model.spin, b0, ts)
    dev = compare_exact_redfield(exact, red)
    flips = count_sign_changes(red.x, 1e-9)
    print(f"eta = {eta:.4f}  regime = {classify(rates.as_markov()).value:10s}  "
          f"Omega^2 = {rates.omega2: .3e}  Redfield x sign changes = {flips}  "
          f"sup|dz| = {dev.sup['z']:.3f}  sup|dx| = {dev.sup['x']:.3f}")
