"""Exact reduced dynamics by summing all forward/backward paths."""
import numpy as np

from nmqsim.bath import OhmicBath
from nmqsim.pathsum import SpinBosonModel, trajectory

dt = 0.25
free = SpinBosonModel(1.0, OhmicBath(0.0, 7.5, 5.0), dt)
weak = SpinBosonModel(1.0, OhmicBath(0.1, 7.5, 5.0), dt)
strong = SpinBosonModel(1.0, OhmicBath(1.2, 2.5, 0.2), dt)

n_steps = 6
runs = {name: trajectory(m, n_steps) for name, m in [("free", free), ("weak", weak), ("strong", strong)]}

print(" t     free    cos^2    weak    strong")
for k in range(n_steps + 1):
    p = [runs[name][k].populations[0] for name in ("free", "weak", "strong")]
    print(f"{k * dt:4.2f}  {p[0]:.5f}  {np.cos(k * dt) ** 2:.5f}  {p[1]:.5f}  {p[2]:.5f}")

# the bath never breaks trace or hermiticity
rdm = runs["strong"][-1]
print("\ntrace:", rdm.trace(), " hermiticity error:", rdm.hermiticity_error())

# finite memory: L=2 vs full memory at N=6
short = trajectory(strong, n_steps, memory=2)[-1].populations[0]
print(f"p0(t=1.5) full memory {rdm.populations[0]:.6f}, L=2 {short:.6f}")
