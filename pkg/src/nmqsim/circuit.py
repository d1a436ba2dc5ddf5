"""Gate-list circuits and a dense statevector simulator.

Conventions:
    * qubit 0 is the most significant bit of a basis index, so the amplitude
      array reshaped to ``(2,) * n`` has one axis per qubit in qubit order;
    * ``RZ(theta) = diag(exp(-i theta/2), exp(+i theta/2))``;
    * ``GLOBAL_PHASE(phi)`` multiplies every amplitude by ``exp(i phi)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, Mapping, Optional, Sequence

import numpy as np

__all__ = [
    "Gate",
    "Circuit",
    "Statevector",
    "QubitCapError",
    "h",
    "x",
    "rz",
    "cnot",
    "toffoli",
    "global_phase",
    "simulate",
    "sample",
    "unitary_of",
    "to_text",
    "from_text",
    "to_qasm",
]

DEFAULT_MAX_QUBITS = 26
UNITARY_MAX_QUBITS = 12

ARITY = {"H": 1, "X": 1, "RZ": 1, "CNOT": 2, "TOFFOLI": 3, "GLOBAL_PHASE": 0}
PARAMETRIC = {"RZ", "GLOBAL_PHASE"}
NATIVE = {"RZ", "CNOT"}


class QubitCapError(ValueError):
    """Raised when a register is too large for dense simulation."""


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple = ()
    theta: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ARITY:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        qubits = tuple(int(q) for q in self.qubits)
        object.__setattr__(self, "qubits", qubits)
        if len(qubits) != ARITY[self.kind]:
            raise ValueError(f"{self.kind} takes {ARITY[self.kind]} qubits, got {len(qubits)}")
        if len(set(qubits)) != len(qubits):
            raise ValueError(f"{self.kind} operands must be distinct, got {qubits}")
        if (self.theta is not None) != (self.kind in PARAMETRIC):
            raise ValueError(f"{self.kind} {'needs' if self.kind in PARAMETRIC else 'takes no'} angle")
        if self.theta is not None:
            object.__setattr__(self, "theta", float(self.theta))


def h(q):
    return Gate("H", (q,))


def x(q):
    return Gate("X", (q,))


def rz(q, theta):
    return Gate("RZ", (q,), theta)


def cnot(control, target):
    return Gate("CNOT", (control, target))


def toffoli(c1, c2, target):
    return Gate("TOFFOLI", (c1, c2, target))


def global_phase(phi):
    return Gate("GLOBAL_PHASE", (), phi)


@dataclass(frozen=True, eq=False)
class Circuit:
    """An ordered gate list on ``n_qubits`` qubits.

    ``roles`` labels qubits (e.g. ``"fwd:1"``, ``"bwd:1"``, ``"dilation:0"``,
    ``"work:3"``, ``"readout"``); it is informational only.
    """

    n_qubits: int
    gates: tuple = ()
    roles: Mapping[int, str] = field(default_factory=dict)

    def __post_init__(self):
        gates = tuple(self.gates)
        object.__setattr__(self, "gates", gates)
        for g in gates:
            if any(q < 0 or q >= self.n_qubits for q in g.qubits):
                raise ValueError(f"gate {g} acts outside a {self.n_qubits}-qubit register")

    def __len__(self):
        return len(self.gates)

    def __add__(self, other: "Circuit") -> "Circuit":
        n = max(self.n_qubits, other.n_qubits)
        return Circuit(n, self.gates + other.gates, {**self.roles, **other.roles})

    def count(self, kind: str) -> int:
        return sum(g.kind == kind for g in self.gates)

    def native_gate_count(self) -> int:
        """Number of RZ and CNOT gates."""
        return sum(g.kind in NATIVE for g in self.gates)

    def counts(self) -> Dict[str, int]:
        out: Dict[str, int] = {}
        for g in self.gates:
            out[g.kind] = out.get(g.kind, 0) + 1
        return out


@dataclass
class Statevector:
    n_qubits: int
    amplitudes: np.ndarray

    def probabilities(self, qubits: Optional[Sequence[int]] = None) -> np.ndarray:
        """Outcome probabilities, marginalized onto ``qubits`` if given."""
        p = np.abs(self.amplitudes) ** 2
        if qubits is None:
            return p
        qubits = list(qubits)
        t = p.reshape((2,) * self.n_qubits)
        rest = [q for q in range(self.n_qubits) if q not in qubits]
        t = t.sum(axis=tuple(rest))
        # remaining axes are in ascending qubit order; reorder to requested order
        order = sorted(qubits)
        t = np.transpose(t, [order.index(q) for q in qubits])
        return t.reshape(-1)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def _index(n: int, fixed: Mapping[int, int]):
    sl = [slice(None)] * n
    for q, v in fixed.items():
        sl[q] = v
    return tuple(sl)


def _apply(psi: np.ndarray, n: int, g: Gate) -> None:
    """Apply ``g`` in place to the ``(2,)*n (+batch)`` tensor ``psi``."""
    kind, qs = g.kind, g.qubits
    if kind == "GLOBAL_PHASE":
        psi *= np.exp(1j * g.theta)
    elif kind == "RZ":
        psi[_index(n, {qs[0]: 0})] *= np.exp(-0.5j * g.theta)
        psi[_index(n, {qs[0]: 1})] *= np.exp(0.5j * g.theta)
    elif kind == "H":
        i0, i1 = _index(n, {qs[0]: 0}), _index(n, {qs[0]: 1})
        a = psi[i0].copy()
        b = psi[i1]
        psi[i0] += b
        a -= b
        psi[i1] = a
        psi[i0] *= np.sqrt(0.5)
        psi[i1] *= np.sqrt(0.5)
    else:
        controls, target = qs[:-1], qs[-1]
        fixed = {c: 1 for c in controls}
        i0 = _index(n, {**fixed, target: 0})
        i1 = _index(n, {**fixed, target: 1})
        tmp = psi[i0].copy()
        psi[i0] = psi[i1]
        psi[i1] = tmp


def _run(circuit: Circuit, psi: np.ndarray, check_norm: bool) -> np.ndarray:
    n = circuit.n_qubits
    batch = psi.shape[1:]
    t = psi.reshape((2,) * n + batch)
    for g in circuit.gates:
        _apply(t, n, g)
        if check_norm:
            norms = np.sqrt(np.sum(np.abs(t.reshape((2**n,) + batch)) ** 2, axis=0))
            if np.max(np.abs(norms - 1.0)) > 1e-12:
                raise FloatingPointError(f"norm drifted to {norms} after {g}")
    return t.reshape((2**n,) + batch)


def simulate(
    circuit: Circuit,
    initial=0,
    max_qubits: int = DEFAULT_MAX_QUBITS,
    check_norm: bool = False,
) -> Statevector:
    """Run ``circuit`` on a basis state (or a given normalized state vector).

    Raises:
        QubitCapError: if the register exceeds ``max_qubits``.
    """
    n = circuit.n_qubits
    if n > max_qubits:
        raise QubitCapError(f"{n} qubits exceeds the simulator cap of {max_qubits}")
    if np.ndim(initial) == 0:
        if not 0 <= int(initial) < 2**n:
            raise ValueError(f"basis index {initial} outside a {n}-qubit register")
        psi = np.zeros(2**n, dtype=np.complex128)
        psi[int(initial)] = 1.0
    else:
        psi = np.array(initial, dtype=np.complex128).reshape(-1)
        if psi.size != 2**n:
            raise ValueError(f"state has {psi.size} amplitudes, expected {2**n}")
    out = _run(circuit, psi, check_norm)
    return Statevector(n, out)


def unitary_of(circuit: Circuit, max_qubits: int = UNITARY_MAX_QUBITS) -> np.ndarray:
    """Dense unitary whose column ``j`` is the circuit applied to ``|j>``."""
    n = circuit.n_qubits
    if n > max_qubits:
        raise QubitCapError(f"{n} qubits exceeds the unitary extraction cap of {max_qubits}")
    return _run(circuit, np.eye(2**n, dtype=np.complex128), check_norm=False)


def sample(
    state: Statevector,
    shots: int,
    seed: int,
    qubits: Optional[Sequence[int]] = None,
) -> Dict[str, int]:
    """Draw ``shots`` measurement outcomes (multinomial in the Born weights).

    Returns a mapping from bit strings (measured qubits in the given order,
    first qubit leftmost) to counts; outcomes never drawn are omitted.
    """
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    p = state.probabilities(qubits)
    p = p / p.sum()
    width = state.n_qubits if qubits is None else len(qubits)
    counts = np.random.default_rng(seed).multinomial(shots, p)
    return {format(i, f"0{width}b"): int(c) for i, c in enumerate(counts) if c}


def _fmt(theta: float) -> str:
    return f"{theta:.17g}"


def to_text(circuit: Circuit) -> str:
    """One gate per line: ``KIND q0 [q1 [q2]] [theta]``."""
    lines = [f"QUBITS {circuit.n_qubits}"]
    for g in circuit.gates:
        parts = [g.kind] + [str(q) for q in g.qubits]
        if g.theta is not None:
            parts.append(_fmt(g.theta))
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


def from_text(text: str) -> Circuit:
    n_qubits = None
    gates = []
    for line in text.splitlines():
        parts = line.split()
        if not parts or parts[0].startswith("#"):
            continue
        if parts[0] == "QUBITS":
            n_qubits = int(parts[1])
            continue
        kind = parts[0]
        arity = ARITY[kind]
        qubits = [int(p) for p in parts[1 : 1 + arity]]
        theta = float(parts[1 + arity]) if kind in PARAMETRIC else None
        gates.append(Gate(kind, tuple(qubits), theta))
    if n_qubits is None:
        n_qubits = 1 + max((q for g in gates for q in g.qubits), default=-1)
    return Circuit(n_qubits, tuple(gates))


_QASM = {"H": "h", "X": "x", "RZ": "rz", "CNOT": "cx", "TOFFOLI": "ccx"}


def to_qasm(circuit: Circuit) -> str:
    """OpenQASM 2 rendering; global phases become comments."""
    lines = ["OPENQASM 2.0;", 'include "qelib1.inc";', f"qreg q[{circuit.n_qubits}];"]
    for g in circuit.gates:
        if g.kind == "GLOBAL_PHASE":
            lines.append(f"// gphase({_fmt(g.theta)})")
            continue
        operands = ",".join(f"q[{q}]" for q in g.qubits)
        name = _QASM[g.kind] + (f"({_fmt(g.theta)})" if g.theta is not None else "")
        lines.append(f"{name} {operands};")
    return "\n".join(lines) + "\n"


def concat(circuits: Iterable[Circuit]) -> Circuit:
    out = Circuit(0)
    for c in circuits:
        out = out + c
    return out
