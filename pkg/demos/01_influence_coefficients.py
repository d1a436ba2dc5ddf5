"""Influence coefficients for the two Ohmic baths used throughout the demos."""
import numpy as np

from nmqsim.bath import OhmicBath, influence_coefficients, spectral_density

# weak coupling, low temperature
weak = OhmicBath(xi=0.1, omega_c=7.5, beta=5.0)
# strong coupling, high temperature
strong = OhmicBath(xi=1.2, omega_c=2.5, beta=0.2)

w = np.linspace(-20, 20, 9)
print("J(w) for the weak bath:")
print(np.round(spectral_density(w, weak), 4))  # odd in w

table = influence_coefficients(weak, dt=0.25, n_steps=4)
print(f"\n{len(table)} coefficients, N=4, full memory")
for kp, k in table:
    a = table[(kp, k)]
    print(f"  alpha[{kp},{k}] = {a.real:+.6f} {a.imag:+.6f}i")

# interior entries only care about the lag
print("\nlag-1 interior entries:", table[(2, 1)], table[(3, 2)])

# interior coefficients fall off with lag; the hot, strongly coupled bath
# stays correlated for longer relative to its self term
w6 = influence_coefficients(weak, dt=0.25, n_steps=6)
s6 = influence_coefficients(strong, dt=0.25, n_steps=6)
for lag in range(1, 5):
    rw = abs(w6[(lag + 1, 1)]) / abs(w6[(1, 1)])
    rs = abs(s6[(lag + 1, 1)]) / abs(s6[(1, 1)])
    print(f"lag {lag}: |alpha|/|alpha_self|  weak {rw:.3f}  strong {rs:.3f}")

# truncating memory just zeroes the far pairs
short = table.truncated(2)
print("\nL=2 drops (3,0):", short[(3, 0)], " keeps (2,0):", short[(2, 0)])
