"""Exact circuits for complex diagonal operators.

A diagonal with entries of modulus at most one is embedded in a unitary
diagonal on one extra (ancilla) qubit, ``diag(D_plus, D_minus)`` with
``(D_plus + D_minus) / 2 = D``.  Sandwiching it between Hadamards on the
ancilla puts ``D`` in the ancilla-``|0>`` block.  The unitary diagonal is then
written as a product of exponentiated Z-strings (Walsh operators) whose
angles come from a fast Walsh-Hadamard transform of the phases; visiting the
Z-strings in Gray-code order lets consecutive CNOT ladders share gates, which
gives ``2**(q+1) - 3`` RZ/CNOT gates for a dense q-qubit diagonal.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .circuit import Circuit, cnot, global_phase, h, rz

__all__ = [
    "DiagonalOp",
    "WalshSpec",
    "dilate",
    "fwht",
    "walsh_coefficients",
    "walsh_circuit",
    "synthesize_diagonal",
]

# Walsh terms below this magnitude are dropped on the sparse path
SPARSE_CUTOFF = 1e-14


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and n & (n - 1) == 0


@dataclass(frozen=True, eq=False)
class DiagonalOp:
    """Complex diagonal operator, rescaled so every entry has modulus <= 1.

    Attributes:
        entries: rescaled diagonal (``original / scale``).
        scale: ``max |original|`` when that exceeds one, else 1.
        qubits: operand qubits, first one most significant.
    """

    entries: np.ndarray
    scale: float = 1.0
    qubits: tuple = ()

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=complex).reshape(-1)
        object.__setattr__(self, "entries", entries)
        if not _is_power_of_two(entries.size):
            raise ValueError(f"diagonal length {entries.size} is not a power of two")
        if self.qubits and len(self.qubits) != self.n_qubits:
            raise ValueError(f"{len(self.qubits)} operand qubits for a {self.n_qubits}-qubit diagonal")
        if np.max(np.abs(entries)) > 1 + 1e-12:
            raise ValueError("rescaled entries must have modulus <= 1")

    @classmethod
    def from_entries(cls, values, qubits: Sequence[int] = ()) -> "DiagonalOp":
        values = np.asarray(values, dtype=complex).reshape(-1)
        peak = float(np.max(np.abs(values)))
        scale = peak if peak > 1.0 else 1.0
        return cls(values / scale, scale, tuple(qubits))

    @property
    def dim(self) -> int:
        return self.entries.size

    @property
    def n_qubits(self) -> int:
        return self.entries.size.bit_length() - 1

    def original(self) -> np.ndarray:
        return self.entries * self.scale


def dilate(op) -> np.ndarray:
    """Unit-modulus diagonal ``[D_plus, D_minus]`` of twice the length.

    ``D_pm = s +- i sqrt(1 - |s|**2) s/|s|``; a zero entry maps to ``+-i``.
    """
    s = op.entries if isinstance(op, DiagonalOp) else np.asarray(op, dtype=complex)
    mod = np.abs(s)
    if np.max(mod) > 1 + 1e-12:
        raise ValueError("dilation needs entries of modulus <= 1; rescale first")
    # angle(0) = 0, so zero entries take the |s| -> 0 limit along the real axis
    unit = np.exp(1j * np.angle(s))
    comp = 1j * np.sqrt(np.clip(1.0 - mod**2, 0.0, None)) * unit
    return np.concatenate([s + comp, s - comp])


def fwht(values) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform in natural (Hadamard) order."""
    a = np.array(values, dtype=float)
    n = a.size
    if not _is_power_of_two(n):
        raise ValueError(f"length {n} is not a power of two")
    width = 1
    while width < n:
        blocks = a.reshape(-1, 2, width)
        a = np.stack([blocks[:, 0] + blocks[:, 1], blocks[:, 0] - blocks[:, 1]], axis=1).reshape(-1)
        width *= 2
    return a


@dataclass(frozen=True, eq=False)
class WalshSpec:
    """Angles ``a_j`` with ``diag = exp(i * sum_j a_j Z^{(j)})``.

    Bit ``b`` of ``j`` (LSB = 0) selects a Z on the ``b``-th least
    significant operand qubit.
    """

    q: int
    coefficients: np.ndarray

    def phases(self) -> np.ndarray:
        return fwht(self.coefficients)

    def diagonal(self) -> np.ndarray:
        return np.exp(1j * self.phases())


def walsh_coefficients(phases) -> WalshSpec:
    phases = np.asarray(phases, dtype=float).reshape(-1)
    if not _is_power_of_two(phases.size):
        raise ValueError(f"length {phases.size} is not a power of two")
    return WalshSpec(phases.size.bit_length() - 1, fwht(phases) / phases.size)


def walsh_circuit(
    spec: WalshSpec,
    targets: Sequence[int],
    n_qubits: Optional[int] = None,
    dense: bool = False,
) -> Circuit:
    """RZ/CNOT circuit for ``prod_j exp(i a_j Z^{(j)})`` on ``targets``.

    Terms are grouped by their most significant Z; inside a group the lower
    bits follow the reflected Gray code, so each step needs one CNOT onto the
    group's pivot qubit, and one more CNOT restores the pivot at the end.
    On the sparse path zero terms are skipped and only the CNOTs needed to
    reach the next nonzero term are emitted.
    ``a_0`` becomes a global phase.  With ``dense=True`` every RZ is emitted
    even at zero angle, which makes the gate count exactly ``2**(q+1) - 3``.
    """
    q = spec.q
    targets = list(targets)
    if len(targets) != q:
        raise ValueError(f"need {q} target qubits, got {len(targets)}")
    n_qubits = max(targets) + 1 if n_qubits is None else n_qubits
    a = spec.coefficients

    def qubit(bit):
        return targets[q - 1 - bit]

    gates = []
    if dense or abs(a[0]) >= SPARSE_CUTOFF:
        gates.append(global_phase(a[0]))
    for m in range(q):
        group = a[1 << m : 2 << m]
        if not dense and np.all(np.abs(group) < SPARSE_CUTOFF):
            continue
        pivot = qubit(m)
        parity = 0  # lower bits currently folded onto the pivot
        for i in range(1 << m):
            code = i ^ (i >> 1)
            angle = a[(1 << m) + code]
            if not dense and abs(angle) < SPARSE_CUTOFF:
                continue
            gates += _toggle(code ^ parity, pivot, qubit)
            gates.append(rz(pivot, -2.0 * angle))
            parity = code
        gates += _toggle(parity, pivot, qubit)
    return Circuit(n_qubits, tuple(gates))


def _toggle(bits: int, pivot: int, qubit) -> list:
    return [cnot(qubit(b), pivot) for b in range(bits.bit_length()) if (bits >> b) & 1]


def synthesize_diagonal(
    op: DiagonalOp,
    targets: Sequence[int],
    ancilla: int,
    n_qubits: Optional[int] = None,
    dense: bool = False,
) -> Circuit:
    """Circuit whose ancilla-``|0>`` block is ``op.entries`` on ``targets``."""
    targets = list(targets)
    if ancilla in targets:
        raise ValueError("ancilla must not be one of the targets")
    if len(targets) != op.n_qubits:
        raise ValueError(f"{op.n_qubits}-qubit diagonal given {len(targets)} targets")
    n_qubits = max(targets + [ancilla]) + 1 if n_qubits is None else n_qubits
    spec = walsh_coefficients(np.angle(dilate(op)))
    body = walsh_circuit(spec, [ancilla] + targets, n_qubits, dense=dense)
    return Circuit(n_qubits, (h(ancilla),) + body.gates + (h(ancilla),))
