"""Independent reference implementations used only by the tests.

Nothing here imports the quadrature, path-sum or synthesis code under test.
"""
import itertools

import numpy as np

WEAK = dict(xi=0.1, omega_c=7.5, beta=5.0)
STRONG = dict(xi=1.2, omega_c=2.5, beta=0.2)
PRESETS = {"weak": WEAK, "strong": STRONG}


def _literal_integrand(omega, kp, k, n_steps, dt, xi, omega_c, beta):
    """Two-sided integrand written straight from the coefficient formulas.

    The lag is always (later time) - (earlier time).
    """
    omega = np.asarray(omega, dtype=float)
    j = 0.5 * np.pi * xi * omega * np.exp(-np.abs(omega) / omega_c)
    with np.errstate(over="ignore", divide="ignore"):
        # exp(x)/sinh(x) = 2 / (1 - exp(-2x)), x = beta*omega/2
        thermal = 2.0 / -np.expm1(-beta * omega)
    base = j / omega**2 * thermal
    t = n_steps * dt
    if kp == k:
        half = dt / 2 if k in (0, n_steps) else dt
        return base * (1 - np.exp(-1j * omega * half)) / (2 * np.pi)
    if (kp, k) == (n_steps, 0):
        window, lag = np.sin(omega * dt / 4) ** 2, t - dt / 2
    elif k == 0:
        window, lag = np.sin(omega * dt / 4) * np.sin(omega * dt / 2), kp * dt - dt / 4
    elif kp == n_steps:
        window, lag = np.sin(omega * dt / 4) * np.sin(omega * dt / 2), t - k * dt - dt / 4
    else:
        window, lag = np.sin(omega * dt / 2) ** 2, (kp - k) * dt
    return 2 / np.pi * base * window * np.exp(-1j * omega * lag)


def fine_grid_alpha(kp, k, n_steps, dt, xi, omega_c, beta, nodes=2**21, span=100.0):
    """Midpoint rule on [0, span*omega_c] of the numerically symmetrized integrand.

    Midpoint nodes never touch the removable singularity at zero.
    """
    h = span * omega_c / nodes
    w = (np.arange(nodes) + 0.5) * h
    even = _literal_integrand(w, kp, k, n_steps, dt, xi, omega_c, beta)
    even = even + _literal_integrand(-w, kp, k, n_steps, dt, xi, omega_c, beta)
    return complex(np.sum(even) * h)


def propagator(omega, dt):
    c, s = np.cos(omega * dt), np.sin(omega * dt)
    return np.array([[c, 1j * s], [1j * s, c]])


def naive_rdm(alpha, n_steps, memory, omega, dt, initial=0, s=(1.0, -1.0)):
    """Loop-over-paths sum with the influence functional as one exponential.

    ``alpha`` maps ``(k', k)`` to a complex coefficient.
    """
    u = propagator(omega, dt)
    n = len(s)
    rho = np.zeros((n, n), dtype=complex)
    for free in itertools.product(range(n), repeat=2 * n_steps):
        fwd = (initial,) + free[0::2]
        bwd = (initial,) + free[1::2]
        amp = 1.0 + 0j
        for k in range(n_steps):
            amp *= u[fwd[k + 1], fwd[k]] * np.conj(u[bwd[k + 1], bwd[k]])
        phase = 0j
        for kp in range(n_steps + 1):
            for k in range(max(0, kp - memory), kp + 1):
                a = alpha[(kp, k)]
                phase += (s[fwd[kp]] - s[bwd[kp]]) * (a * s[fwd[k]] - np.conj(a) * s[bwd[k]])
        rho[fwd[-1], bwd[-1]] += amp * np.exp(-phase)
    return rho


def walsh_matrix_product(coefficients):
    """``prod_j exp(i a_j Z^{(j)})`` as a dense matrix, one term at a time."""
    a = np.asarray(coefficients, dtype=float)
    q = a.size.bit_length() - 1
    z = np.diag([1.0, -1.0])
    out = np.eye(a.size, dtype=complex)
    for j, aj in enumerate(a):
        op = np.ones((1, 1))
        for qubit in range(q):
            bit = q - 1 - qubit  # first tensor factor is the most significant qubit
            op = np.kron(op, z if (j >> bit) & 1 else np.eye(2))
        out = out @ (np.cos(aj) * np.eye(a.size) + 1j * np.sin(aj) * op)
    return out


def mcx_matrix(n_controls, n_work):
    """Unitary of a multi-controlled X on qubits (controls, work, target)."""
    n = n_controls + n_work + 1
    dim = 2**n
    u = np.zeros((dim, dim))
    for col in range(dim):
        controls = col >> (n - n_controls)
        row = col ^ 1 if controls == 2**n_controls - 1 else col
        u[row, col] = 1.0
    return u
