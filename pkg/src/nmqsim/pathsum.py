"""Brute-force forward/backward path sum for the reduced density matrix.

This is the classical reference that every circuit result is checked
against.  For a computational-basis initial state the density matrix at time
``N dt`` is the sum over all interior paths of the bare-propagator product
times the (memory-truncated) influence functional.
"""
from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import linalg

from .bath import CoeffTable, OhmicBath, influence_coefficients

__all__ = [
    "SpinBosonModel",
    "ReducedDensityMatrix",
    "PathBudgetError",
    "bare_propagator",
    "influence_factor",
    "path_amplitude",
    "rdm_pathsum",
    "trajectory",
    "write_trajectory_csv",
]

# enumeration guard: N * log2(n) <= MAX_PATH_BITS
MAX_PATH_BITS = 8


class PathBudgetError(ValueError):
    """Raised when a path enumeration would exceed the configured budget."""


@dataclass(frozen=True)
class SpinBosonModel:
    """System Hamiltonian in the DVR basis plus its bath and time step.

    For two levels the Hamiltonian is ``-omega_rabi * sigma_x``.  For more
    levels it defaults to a nearest-neighbour chain with hopping
    ``-omega_rabi`` unless an explicit ``hamiltonian`` is given.
    """

    omega_rabi: float
    bath: OhmicBath
    dt: float
    dvr_values: tuple = (1.0, -1.0)
    hamiltonian: Optional[np.ndarray] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        values = tuple(float(v) for v in self.dvr_values)
        object.__setattr__(self, "dvr_values", values)
        if len(values) < 2:
            raise ValueError("need at least two DVR values")
        if len(set(values)) != len(values):
            raise ValueError(f"DVR values must be distinct, got {values}")
        if self.hamiltonian is not None:
            h = np.asarray(self.hamiltonian, dtype=complex)
            if h.shape != (len(values),) * 2 or not np.allclose(h, h.conj().T):
                raise ValueError("hamiltonian must be a Hermitian n x n matrix")
            object.__setattr__(self, "hamiltonian", h)

    @property
    def n_levels(self) -> int:
        return len(self.dvr_values)

    def system_hamiltonian(self) -> np.ndarray:
        if self.hamiltonian is not None:
            return self.hamiltonian
        n = self.n_levels
        h = np.zeros((n, n), dtype=complex)
        idx = np.arange(n - 1)
        h[idx, idx + 1] = h[idx + 1, idx] = -self.omega_rabi
        return h


@dataclass(frozen=True)
class ReducedDensityMatrix:
    entries: np.ndarray

    @property
    def populations(self) -> np.ndarray:
        return self.entries.diagonal().real.copy()

    def trace(self) -> complex:
        return complex(np.trace(self.entries))

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.entries - self.entries.conj().T)))


def bare_propagator(model: SpinBosonModel) -> np.ndarray:
    """Short-time propagator ``exp(-i H dt)`` in the DVR basis."""
    if model.n_levels == 2 and model.hamiltonian is None:
        c, s = np.cos(model.omega_rabi * model.dt), np.sin(model.omega_rabi * model.dt)
        return np.array([[c, 1j * s], [1j * s, c]])
    energies, vecs = linalg.eigh(model.system_hamiltonian())
    return (vecs * np.exp(-1j * energies * model.dt)) @ vecs.conj().T


def influence_factor(kp, k, s_kp_plus, s_kp_minus, s_k_plus, s_k_minus, table: CoeffTable):
    """Influence factor coupling time ``k'`` (later) with time ``k`` (earlier).

    Works elementwise on arrays of DVR values.
    """
    a = table[(kp, k)]
    return np.exp(-(s_kp_plus - s_kp_minus) * (a * s_k_plus - np.conj(a) * s_k_minus))


def path_amplitude(
    forward: Sequence[int],
    backward: Sequence[int],
    model: SpinBosonModel,
    table: CoeffTable,
    initial: tuple,
) -> complex:
    """Amplitude of a single forward/backward path.

    Args:
        forward: DVR state indices ``s_0^+ .. s_N^+``.
        backward: DVR state indices ``s_0^- .. s_N^-``.
        model: the system/bath model.
        table: coefficients spanning at least ``N`` steps.
        initial: ``(i, j)`` such that ``rho(0) = |i><j|``.

    Returns:
        ``rho0 * prod K * prod I`` for the path, using the memory window of
        ``table``.
    """
    n = len(forward) - 1
    if len(backward) != n + 1:
        raise ValueError("forward and backward paths must have equal length")
    if (forward[0], backward[0]) != tuple(initial):
        return 0j
    u = bare_propagator(model)
    s = np.asarray(model.dvr_values)
    amp = 1.0 + 0j
    for k in range(n):
        amp *= u[forward[k + 1], forward[k]] * np.conj(u[backward[k + 1], backward[k]])
    for kp in range(n + 1):
        for k in range(max(0, kp - table.memory), kp + 1):
            amp *= influence_factor(kp, k, s[forward[kp]], s[backward[kp]], s[forward[k]], s[backward[k]], table)
    return complex(amp)


def _check_budget(model: SpinBosonModel, n_steps: int, max_bits: int) -> None:
    bits = n_steps * np.log2(model.n_levels)
    if bits > max_bits:
        raise PathBudgetError(
            f"path enumeration with N={n_steps}, n={model.n_levels} exceeds budget "
            f"(N*log2(n)={bits:g} > {max_bits})"
        )


def rdm_pathsum(
    model: SpinBosonModel,
    table: Optional[CoeffTable],
    n_steps: int,
    initial: int = 0,
    max_bits: int = MAX_PATH_BITS,
) -> ReducedDensityMatrix:
    """Reduced density matrix after ``n_steps`` by summing every path.

    The initial state is the DVR basis state ``initial``.  Paths are
    enumerated as one array per time point (forward indices more significant
    than backward ones, earlier times more significant than later), so the sum
    is a vectorized reduction with a fixed order.
    """
    _check_budget(model, n_steps, max_bits)
    n = model.n_levels
    if not 0 <= initial < n:
        raise ValueError(f"initial state {initial} outside 0..{n - 1}")
    if n_steps == 0:
        rho = np.zeros((n, n), dtype=complex)
        rho[initial, initial] = 1.0
        return ReducedDensityMatrix(rho)
    if table is None or table.n_steps != n_steps:
        got = None if table is None else table.n_steps
        raise ValueError(f"need a coefficient table for exactly {n_steps} steps, got {got}")

    u = bare_propagator(model)
    s = np.asarray(model.dvr_values)
    # free indices: (s_1^+, s_1^-, ..., s_N^+, s_N^-)
    grids = np.indices((n,) * (2 * n_steps)).reshape(2 * n_steps, -1)
    fwd = [np.full(grids.shape[1], initial)] + [grids[2 * i] for i in range(n_steps)]
    bwd = [np.full(grids.shape[1], initial)] + [grids[2 * i + 1] for i in range(n_steps)]

    amp = np.ones(grids.shape[1], dtype=complex)
    for k in range(n_steps):
        amp *= u[fwd[k + 1], fwd[k]] * np.conj(u[bwd[k + 1], bwd[k]])
    for kp in range(n_steps + 1):
        for k in range(max(0, kp - table.memory), kp + 1):
            amp *= influence_factor(kp, k, s[fwd[kp]], s[bwd[kp]], s[fwd[k]], s[bwd[k]], table)

    # last two free indices are (s_N^+, s_N^-): reduce over everything else
    rho = amp.reshape(-1, n, n).sum(axis=0)
    return ReducedDensityMatrix(rho)


def trajectory(
    model: SpinBosonModel,
    n_steps: int,
    memory: Optional[int] = None,
    initial: int = 0,
    max_bits: int = MAX_PATH_BITS,
):
    """Density matrices at ``t = 0, dt, ..., n_steps*dt``.

    Each step ``N`` gets its own ``N``-step coefficient table (the endpoint
    formulas depend on ``N``) with memory ``min(memory, N)``.
    """
    memory = n_steps if memory is None else memory
    _check_budget(model, n_steps, max_bits)
    out = [rdm_pathsum(model, None, 0, initial)]
    for step in range(1, n_steps + 1):
        table = influence_coefficients(model.bath, model.dt, step, min(memory, step))
        out.append(rdm_pathsum(model, table, step, initial, max_bits))
    return out


def write_trajectory_csv(rdms, dt: float, fh) -> None:
    """CSV rows ``t, p_0 .. p_{n-1}, re_rho_01, im_rho_01``."""
    n = rdms[0].entries.shape[0]
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["t"] + [f"p_{i}" for i in range(n)] + ["re_rho_01", "im_rho_01"])
    for step, rdm in enumerate(rdms):
        rho = rdm.entries
        row = [f"{step * dt:.17g}"] + [f"{p:.17g}" for p in rho.diagonal().real]
        row += [f"{rho[0, 1].real:.17g}", f"{rho[0, 1].imag:.17g}"]
        writer.writerow(row)


def enumerate_paths(n_levels: int, n_steps: int, initial: int):
    """Yield ``(forward, backward)`` index tuples in lexicographic order."""
    for free in itertools.product(range(n_levels), repeat=2 * n_steps):
        yield (initial,) + free[0::2], (initial,) + free[1::2]
