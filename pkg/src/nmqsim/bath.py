"""Ohmic harmonic bath and the discretized influence-functional coefficients.

The coefficients are the time-discretized bath response kernels that couple
the forward/backward system path at two time points.  Every kernel is a
two-sided frequency integral of ``J(w)/w**2 * exp(b w/2)/sinh(b w/2)`` times
a trigonometric window; with the odd extension ``J(-w) = -J(w)`` only the even
part of the integrand survives, so each entry is evaluated as twice a
one-sided integral on ``[0, omega_max]``.

Units: hbar = 1 throughout.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterator, Tuple

import numpy as np
from scipy import integrate

__all__ = [
    "OhmicBath",
    "CoeffTable",
    "QuadratureError",
    "spectral_density",
    "influence_coefficients",
    "coefficient_kind",
]


class QuadratureError(RuntimeError):
    """Raised when an adaptive quadrature fails to reach its tolerance."""

    def __init__(self, message: str, abserr: float):
        super().__init__(f"{message} (achieved error estimate {abserr:.3e})")
        self.abserr = abserr


@dataclass(frozen=True)
class OhmicBath:
    """Ohmic spectral density ``J(w) = (pi/2) xi w exp(-|w|/omega_c)``.

    Attributes:
        xi: dimensionless Kondo parameter.
        omega_c: cutoff frequency.
        beta: inverse temperature.
    """

    xi: float
    omega_c: float
    beta: float

    def __post_init__(self):
        if not self.xi >= 0:
            raise ValueError(f"xi must be >= 0, got {self.xi}")
        if not self.omega_c > 0:
            raise ValueError(f"omega_c must be > 0, got {self.omega_c}")
        if not self.beta > 0:
            raise ValueError(f"beta must be > 0, got {self.beta}")

    def scaled(self, xi: float) -> "OhmicBath":
        return OhmicBath(xi=xi, omega_c=self.omega_c, beta=self.beta)


def spectral_density(omega, bath: OhmicBath):
    """Ohmic spectral density, oddly extended to negative frequencies."""
    omega = np.asarray(omega, dtype=float)
    out = 0.5 * np.pi * bath.xi * omega * np.exp(-np.abs(omega) / bath.omega_c)
    return out if out.ndim else float(out)


Pair = Tuple[int, int]


@dataclass(frozen=True)
class CoeffTable:
    """Influence-functional coefficients ``alpha[(k', k)]`` with ``k' >= k``.

    Only pairs with ``k' - k <= memory`` are stored; lookups outside the
    memory window return exactly zero.
    """

    n_steps: int
    dt: float
    memory: int
    alpha: Dict[Pair, complex] = field(repr=False)

    def __getitem__(self, pair: Pair) -> complex:
        kp, k = pair
        if kp < k:
            raise KeyError(f"coefficients are indexed with k' >= k, got {pair}")
        return self.alpha.get((kp, k), 0j)

    def __iter__(self) -> Iterator[Pair]:
        return iter(sorted(self.alpha))

    def __len__(self) -> int:
        return len(self.alpha)

    def in_window(self, kp: int, k: int) -> bool:
        return 0 <= k <= kp <= self.n_steps and kp - k <= self.memory

    def with_entry(self, pair: Pair, value: complex) -> "CoeffTable":
        """Copy of the table with one entry replaced (used for fault injection)."""
        alpha = dict(self.alpha)
        alpha[pair] = complex(value)
        return CoeffTable(self.n_steps, self.dt, self.memory, alpha)

    def truncated(self, memory: int) -> "CoeffTable":
        """Copy restricted to a shorter memory window."""
        if not 1 <= memory <= self.memory:
            raise ValueError(f"memory must be in [1, {self.memory}], got {memory}")
        alpha = {p: v for p, v in self.alpha.items() if p[0] - p[1] <= memory}
        return CoeffTable(self.n_steps, self.dt, memory, alpha)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            write_coeff_csv(self, fh)


def write_coeff_csv(table: CoeffTable, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["kp", "k", "re_alpha", "im_alpha"])
    for kp, k in table:
        a = table.alpha[(kp, k)]
        writer.writerow([kp, k, f"{a.real:.17g}", f"{a.imag:.17g}"])


def coefficient_kind(kp: int, k: int, n_steps: int) -> str:
    """Name of the discretization formula governing pair ``(k', k)``.

    Returns one of ``"endpoint_self"``, ``"self"``, ``"full_span"``,
    ``"from_start"``, ``"to_end"`` or ``"interior"``.
    """
    if not 0 <= k <= kp <= n_steps:
        raise ValueError(f"pair ({kp}, {k}) outside 0 <= k <= k' <= {n_steps}")
    if kp == k:
        return "endpoint_self" if k in (0, n_steps) else "self"
    if k == 0 and kp == n_steps:
        return "full_span"
    if k == 0:
        return "from_start"
    if kp == n_steps:
        return "to_end"
    return "interior"


def _window(kind: str, kp: int, k: int, n_steps: int, dt: float):
    """Trigonometric window and time lag for the off-diagonal formulas.

    The lag is always later-minus-earlier time, so the imaginary part carries
    ``-sin(w * lag)`` like the continuous bath correlation function.
    """
    if kind == "interior":
        return (lambda w: np.sin(0.5 * w * dt) ** 2), (kp - k) * dt
    if kind == "full_span":
        return (lambda w: np.sin(0.25 * w * dt) ** 2), n_steps * dt - 0.5 * dt
    if kind == "from_start":
        return (lambda w: np.sin(0.25 * w * dt) * np.sin(0.5 * w * dt)), kp * dt - 0.25 * dt
    if kind == "to_end":
        return (lambda w: np.sin(0.25 * w * dt) * np.sin(0.5 * w * dt)), (n_steps - k) * dt - 0.25 * dt
    raise ValueError(kind)


def _unit_xi_weight(omega, bath: OhmicBath):
    # J(w) / w**2 for xi = 1 and w > 0
    return 0.5 * np.pi * np.exp(-omega / bath.omega_c) / omega


def _coth(x):
    return 1.0 / np.tanh(x)


def _integrands(kind: str, kp: int, k: int, n_steps: int, dt: float, bath: OhmicBath):
    """Real and imaginary one-sided integrands (prefactors included), xi = 1."""
    half_beta = 0.5 * bath.beta
    if kind in ("self", "endpoint_self"):
        step = dt if kind == "self" else 0.5 * dt
        # (1/2pi) * 2 * [coth (1 - cos w s) + i sin w s]; 1 - cos written as 2 sin^2
        def re(w):
            return (2.0 / np.pi) * _unit_xi_weight(w, bath) * _coth(half_beta * w) * np.sin(0.5 * w * step) ** 2

        def im(w):
            return (1.0 / np.pi) * _unit_xi_weight(w, bath) * np.sin(w * step)

        return re, im

    window, lag = _window(kind, kp, k, n_steps, dt)

    # (2/pi) * 2 * T(w) [coth cos(w lag) - i sin(w lag)]
    def re(w):
        return (4.0 / np.pi) * _unit_xi_weight(w, bath) * window(w) * _coth(half_beta * w) * np.cos(w * lag)

    def im(w):
        return -(4.0 / np.pi) * _unit_xi_weight(w, bath) * window(w) * np.sin(w * lag)

    return re, im


def _quad(f: Callable[[float], float], upper: float, tol: float, limit: int) -> float:
    out = integrate.quad(f, 0.0, upper, epsabs=tol, epsrel=tol, limit=limit, full_output=True)
    if len(out) == 4:
        raise QuadratureError(f"quadrature did not converge: {out[3].splitlines()[0]}", out[1])
    return out[0]


def unit_coefficient(
    kp: int,
    k: int,
    n_steps: int,
    dt: float,
    bath: OhmicBath,
    omega_max_factor: float = 50.0,
    tol: float = 1e-10,
    limit: int = 2000,
) -> complex:
    """Coefficient ``alpha[(k', k)]`` per unit Kondo parameter."""
    kind = coefficient_kind(kp, k, n_steps)
    re, im = _integrands(kind, kp, k, n_steps, dt, bath)
    upper = omega_max_factor * bath.omega_c
    return complex(_quad(re, upper, tol, limit), _quad(im, upper, tol, limit))


def influence_coefficients(
    bath: OhmicBath,
    dt: float,
    n_steps: int,
    memory: int | None = None,
    omega_max_factor: float = 50.0,
    tol: float = 1e-10,
) -> CoeffTable:
    """Compute every coefficient within the memory window.

    Args:
        bath: Ohmic bath parameters.
        dt: time step.
        n_steps: number of time steps ``N``.
        memory: memory length ``L`` (defaults to ``N``).
        omega_max_factor: upper integration limit in units of ``omega_c``.
        tol: absolute and relative quadrature tolerance per entry.

    Returns:
        CoeffTable holding all pairs ``0 <= k <= k' <= N`` with ``k' - k <= L``.

    Raises:
        ValueError: on invalid window parameters.
        QuadratureError: if an integral fails to converge.
    """
    memory = n_steps if memory is None else memory
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    if n_steps < 1:
        raise ValueError(f"n_steps must be >= 1, got {n_steps}")
    if not 1 <= memory <= n_steps:
        raise ValueError(f"memory must be in [1, {n_steps}], got {memory}")

    alpha: Dict[Pair, complex] = {}
    if bath.xi == 0:
        for kp in range(n_steps + 1):
            for k in range(max(0, kp - memory), kp + 1):
                alpha[(kp, k)] = 0j
        return CoeffTable(n_steps, dt, memory, alpha)

    # interior and self entries depend only on k' - k: evaluate once per lag
    cache: Dict[tuple, complex] = {}
    for kp in range(n_steps + 1):
        for k in range(max(0, kp - memory), kp + 1):
            kind = coefficient_kind(kp, k, n_steps)
            if kind == "interior":
                key = (kind, kp - k)
            elif kind in ("self", "endpoint_self"):
                key = (kind,)
            else:
                key = (kind, kp, k)
            if key not in cache:
                cache[key] = unit_coefficient(kp, k, n_steps, dt, bath, omega_max_factor, tol)
            alpha[(kp, k)] = bath.xi * cache[key]
    return CoeffTable(n_steps, dt, memory, alpha)


def read_coeff_csv(path, n_steps: int, dt: float) -> CoeffTable:
    alpha: Dict[Pair, complex] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            alpha[(int(row["kp"]), int(row["k"]))] = complex(float(row["re_alpha"]), float(row["im_alpha"]))
    memory = max((kp - k for kp, k in alpha), default=1)
    return CoeffTable(n_steps, dt, max(memory, 1), alpha)

