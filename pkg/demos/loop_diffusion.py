"""Particle on a dephasing ring: coherent bands give way to diffusion.

Each Bloch sector of the Redfield generator carries one isolated real
eigenvalue once the dephasing strength passes 2 hbar A sin(q/2). Its
small-q behaviour is diffusive.
"""
import numpy as np

from overdamping.diffusion_loop import (DephasingBath, LoopModel, build_sector, diffusive_eigenvalue,
                                        q_critical, sector_spectrum)

model = LoopModel(16, 1.0)
print(f"N = 16: the slowest sector separates for Q > {q_critical(model):.7f}")
for q_strength in (0.2, 0.5, 1.0, 3.0):
    bath = DephasingBath(q_strength)
    spec = sector_spectrum(build_sector(model, bath, 1))
    if spec.diffusive is None:
        print(f"Q = {q_strength}: no separated real eigenvalue in the q = 2 pi/16 sector")
        continue
    exact = diffusive_eigenvalue(model, bath, spec.bloch_q)
    print(f"Q = {q_strength}: sector {spec.diffusive:.10f}  closed form {exact:.10f}")

bath = DephasingBath(5.0)
qs = np.array([0.01, 0.05, 0.1])
lam = [diffusive_eigenvalue(LoopModel(1000, 1.0), bath, q) for q in qs]
print("lambda / q^2 at Q = 5:", np.round(np.array(lam) / qs ** 2, 6), " (-A^2/Q = -0.2)")
