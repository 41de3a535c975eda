"""Damped oscillator: exact rates, Markov limit and a brute-force bath.

For an Ullersma bath the Heisenberg equations close on a cubic. This script
shows how its roots approach the Markov values as the cutoff grows, where
the overdamping transition sits, and that a 2000-oscillator bath integrated
directly reproduces the closed-form mean displacement.
"""
import numpy as np

from overdamping.qbm import (OscillatorMeanState, QbmModel, exact_rates, finite_bath_oracle,
                             markov_rates, mean_displacement, transition_kappa)

print("alpha      Gamma      Omega^2    lambda      (kappa = 1, omega0 = 1)")
for alpha in (10.0, 100.0, 1000.0):
    r = exact_rates(QbmModel(1.0, 1.0, alpha))
    print(f"{alpha:7.0f}  {r.gamma:.7f}  {r.omega2:.7f}  {r.lam:10.4f}")
m = markov_rates(QbmModel(1.0, 1.0, 1e9))
print(f"Markov   {m.gamma:.7f}  {m.omega2:.7f}")

print(f"\ntransition coupling at alpha = 1000: {transition_kappa(QbmModel(1.0, 0.0, 1000.0)):.6f}"
      " (Markov value 2)")

init = OscillatorMeanState(1.0, 0.5)
for kappa in (1.0, 2.0, 4.0):
    model = QbmModel(1.0, kappa, 20.0)
    rates = exact_rates(model)
    ts = np.linspace(0.0, 5.0 / rates.gamma, 51)
    q_bath = finite_bath_oracle(model, 2000, 400.0, init, ts)
    q_form = mean_displacement(model, rates, init, ts)
    dev = np.max(np.abs(q_bath - q_form)) / np.max(np.abs(q_form))
    print(f"kappa = {kappa}: regime {rates.regime.value:10s} finite bath vs closed form {dev:.1e}")
