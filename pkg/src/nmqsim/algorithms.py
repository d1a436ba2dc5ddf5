"""Circuit assembly for the path-sum algorithms and their resource counts.

Register layout for ``N`` steps and ``b = log2(n)`` qubits per DVR index:
time point ``k`` owns the forward qubits ``[2kb, 2kb + b)`` and the backward
qubits ``[2kb + b, 2(k+1)b)``; one dilation ancilla per compact operator
follows, in operator order.  Qubit value 0 is the first DVR state.

Algorithm I measures everything and keeps the all-zeros outcome.  Algorithm II
maps that outcome onto a single readout qubit with a multi-controlled X built
from a Toffoli chain.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Sequence

import numpy as np

from .bath import CoeffTable
from .circuit import Circuit, Statevector, h, simulate, toffoli, x
from .pathsum import SpinBosonModel, bare_propagator, influence_factor
from .synthesis import DiagonalOp, synthesize_diagonal

__all__ = [
    "CompactOperator",
    "ExperimentPlan",
    "combine",
    "time_qubits",
    "build_algorithm_I",
    "build_algorithm_II",
    "mcx_chain",
    "success_probability",
    "exact_success_probability",
    "estimate_populations",
    "estimate_populations_multi",
    "resource_counts",
    "circuit_resources",
]

# gates in the textbook Toffoli decomposition (6 CNOT + 7 T/Tdg + 2 H)
TOFFOLI_CNOTS = 6
TOFFOLI_ONE_QUBIT = 9


def _bits(n_levels: int) -> int:
    b = n_levels.bit_length() - 1
    if n_levels < 2 or 1 << b != n_levels:
        raise ValueError(f"circuit algorithms need a power-of-two level count, got {n_levels}")
    return b


def time_qubits(k: int, n_levels: int):
    """Forward and backward qubit lists of time point ``k``."""
    b = _bits(n_levels)
    start = 2 * k * b
    return list(range(start, start + b)), list(range(start + b, start + 2 * b))


@dataclass(frozen=True, eq=False)
class CompactOperator:
    """Combined diagonal coupling time points ``k < k'``.

    The diagonal is indexed by ``(s_k'^+, s_k'^-, s_k^+, s_k^-)`` with the
    first index most significant and acts on ``k'_f, k'_b, k_f, k_b``.
    """

    k: int
    kp: int
    diagonal: DiagonalOp

    @property
    def scale(self) -> float:
        return self.diagonal.scale

    @property
    def qubits(self) -> tuple:
        return self.diagonal.qubits


@dataclass(frozen=True)
class ExperimentPlan:
    model: SpinBosonModel
    n_steps: int
    memory: int
    algorithm: str = "I"
    initial: int = 0
    probe: int = 0
    shots: int = 1000
    runs: int = 1
    seed: int = 0
    dense: bool = False

    def __post_init__(self):
        if self.n_steps < 1:
            raise ValueError(f"n_steps must be >= 1, got {self.n_steps}")
        if not 1 <= self.memory <= self.n_steps:
            raise ValueError(f"memory must be in [1, {self.n_steps}], got {self.memory}")
        if self.algorithm not in ("I", "II"):
            raise ValueError(f"algorithm must be 'I' or 'II', got {self.algorithm!r}")
        if self.shots < 1 or self.runs < 1:
            raise ValueError("shots and runs must be positive")
        for name in ("initial", "probe"):
            if not 0 <= getattr(self, name) < self.model.n_levels:
                raise ValueError(f"{name} state outside the DVR basis")


def _self_factor(a: complex, s_plus, s_minus):
    return np.exp(-(s_plus - s_minus) * (a * s_plus - np.conj(a) * s_minus))


def combine(model: SpinBosonModel, table: CoeffTable, n_steps: int, memory: int) -> List[CompactOperator]:
    """Compact two-time-point operators for an ``n_steps`` propagation.

    Operator ``(k, k+1)`` carries the forward/backward propagator pair, the
    self term of time ``k`` and the nearest-neighbour influence factor;
    operators with ``2 <= k' - k <= memory`` carry their influence factor.
    The final self term is folded into operator ``(max(0, N - L), N)``.
    Operators come in ascending ``k`` then ``k'``.
    """
    if table.n_steps != n_steps or table.memory < memory:
        raise ValueError(
            f"table spans N={table.n_steps}, L={table.memory}; need N={n_steps}, L>={memory}"
        )
    if not 1 <= memory <= n_steps:
        raise ValueError(f"memory must be in [1, {n_steps}], got {memory}")
    n = model.n_levels
    u = bare_propagator(model)
    s = np.asarray(model.dvr_values)
    pp, pm, kp_, km = np.indices((n,) * 4).reshape(4, -1)  # s_k'^+, s_k'^-, s_k^+, s_k^-
    last_pair = (max(0, n_steps - memory), n_steps)

    ops = []
    for k in range(n_steps):
        for kp in range(k + 1, min(k + memory, n_steps) + 1):
            entries = influence_factor(kp, k, s[pp], s[pm], s[kp_], s[km], table).astype(complex)
            if kp == k + 1:
                entries = entries * u[pp, kp_] * np.conj(u[pm, km])
                entries = entries * _self_factor(table[(k, k)], s[kp_], s[km])
            if (k, kp) == last_pair:
                entries = entries * _self_factor(table[(n_steps, n_steps)], s[pp], s[pm])
            fk, bk = time_qubits(k, n)
            fkp, bkp = time_qubits(kp, n)
            ops.append(CompactOperator(k, kp, DiagonalOp.from_entries(entries, fkp + bkp + fk + bk)))
    return ops


def _index_bits(index: int, width: int) -> List[int]:
    return [(index >> (width - 1 - i)) & 1 for i in range(width)]


def build_algorithm_I(plan: ExperimentPlan, table: CoeffTable, probes: Sequence[int] | None = None) -> List[Circuit]:
    """One all-zeros-success circuit per probed final state.

    For two levels the default is the pair ``[probe |0>, probe |1>]``.
    """
    n = plan.model.n_levels
    b = _bits(n)
    ops = combine(plan.model, table, plan.n_steps, plan.memory)
    probes = range(n) if probes is None else probes
    return [_algorithm_I_circuit(ops, plan.n_steps, n, b, plan.initial, p, plan.dense) for p in probes]


def _algorithm_I_circuit(ops, n_steps, n_levels, b, initial, probe, dense) -> Circuit:
    n_time = 2 * (n_steps + 1) * b
    n_qubits = n_time + len(ops)
    roles: Dict[int, str] = {}
    for k in range(n_steps + 1):
        f, bw = time_qubits(k, n_levels)
        roles.update({q: f"fwd:{k}" for q in f})
        roles.update({q: f"bwd:{k}" for q in bw})

    prep = []
    for k, state in ((0, initial), (n_steps, probe)):
        f, bw = time_qubits(k, n_levels)
        bits = _index_bits(state, b)
        prep += [x(q) for q, bit in zip(f + bw, bits + bits) if bit]
    middle = [q for k in range(1, n_steps) for part in time_qubits(k, n_levels) for q in part]

    gates = list(prep) + [h(q) for q in middle]
    for i, op in enumerate(ops):
        anc = n_time + i
        roles[anc] = f"dilation:{op.k},{op.kp}"
        gates += synthesize_diagonal(op.diagonal, op.qubits, anc, n_qubits, dense=dense).gates
    gates += [h(q) for q in middle] + list(prep)
    return Circuit(n_qubits, tuple(gates), roles)


def mcx_chain(controls: Sequence[int], work: Sequence[int], target: int) -> List:
    """Toffoli chain flipping ``target`` iff all ``controls`` are 1.

    Uses ``len(controls) - 2`` clean work qubits, which are restored, and
    ``2 * len(controls) - 3`` Toffolis.
    """
    c = list(controls)
    w = list(work)
    if len(c) < 2:
        raise ValueError("need at least two controls")
    if len(w) != len(c) - 2:
        raise ValueError(f"{len(c)} controls need {len(c) - 2} work qubits, got {len(w)}")
    if not w:
        return [toffoli(c[0], c[1], target)]
    compute = [toffoli(c[0], c[1], w[0])]
    compute += [toffoli(c[i + 1], w[i - 1], w[i]) for i in range(1, len(w))]
    return compute + [toffoli(c[-1], w[-1], target)] + compute[::-1]


def build_algorithm_II(plan: ExperimentPlan, table: CoeffTable, probes: Sequence[int] | None = None) -> List[Circuit]:
    """Algorithm-I circuits followed by an all-zeros detector on a readout qubit."""
    out = []
    for base in build_algorithm_I(plan, table, probes):
        q = base.n_qubits
        work = list(range(q, 2 * q - 2))
        readout = 2 * q - 2
        flips = [x(i) for i in range(q)]
        gates = base.gates + tuple(flips + mcx_chain(range(q), work, readout) + flips)
        roles = dict(base.roles)
        roles.update({w: f"work:{i}" for i, w in enumerate(work)})
        roles[readout] = "readout"
        out.append(Circuit(2 * q - 1, gates, roles))
    return out


def _readout(circuit: Circuit):
    for q, role in circuit.roles.items():
        if role == "readout":
            return q
    return None


def success_probability(state: Statevector, circuit: Circuit) -> float:
    """Probability of the success outcome: readout = 1 if present, else all zeros."""
    r = _readout(circuit)
    if r is None:
        return float(abs(state.amplitudes[0]) ** 2)
    return float(state.probabilities([r])[1])


def exact_success_probability(circuit: Circuit, **kwargs) -> float:
    return success_probability(simulate(circuit, **kwargs), circuit)


def estimate_populations(success0, success1):
    """Populations from the success statistics of the two probe circuits.

    Both circuits share the same operators, so their success rates are
    ``c * p0**2`` and ``c * p1**2`` with a common unknown ``c``.
    """
    p = estimate_populations_multi([success0, success1])
    return float(p[0]), float(1.0 - p[0])


def estimate_populations_multi(successes) -> np.ndarray:
    roots = np.sqrt(np.asarray(successes, dtype=float))
    total = roots.sum()
    if total == 0:
        raise ZeroDivisionError("every probe circuit has zero success statistics; increase shots")
    return roots / total


def resource_counts(n_levels: int, n_steps: int, memory: int | None = None, algorithm: str = "I") -> Dict[str, int]:
    """Closed-form qubit and gate counts.

    ``native_gates`` counts RZ and CNOT in the dense Walsh circuits.  For
    algorithm II, ``toffolis`` is ``2 * (Q - 2)`` with ``Q`` the algorithm-I
    qubit count, and the register adds ``Q - 2`` work qubits and one readout.
    """
    memory = n_steps if memory is None else memory
    b = _bits(n_levels)
    n_ops = (2 * n_steps - memory + 1) * memory // 2
    q1 = 2 * (n_steps + 1) * b + n_ops
    per_op = 4 * n_levels**4 - 3
    out = {
        "compact_operators": n_ops,
        "qubits": q1,
        "native_gates": per_op * n_ops,
        "toffolis": 0,
    }
    if algorithm == "II":
        out["work_qubits"] = q1 - 2
        out["readout_qubits"] = 1
        out["qubits"] = 2 * q1 - 1
        out["toffolis"] = 2 * (q1 - 2)
    elif algorithm != "I":
        raise ValueError(f"algorithm must be 'I' or 'II', got {algorithm!r}")
    out["toffoli_native_gates"] = out["toffolis"] * (TOFFOLI_CNOTS + TOFFOLI_ONE_QUBIT)
    return out


def circuit_resources(circuit: Circuit) -> Dict[str, int]:
    """The same counts read off a built circuit."""
    counts = circuit.counts()
    return {
        "compact_operators": sum(r.startswith("dilation") for r in circuit.roles.values()),
        "qubits": circuit.n_qubits,
        "native_gates": circuit.native_gate_count(),
        "toffolis": counts.get("TOFFOLI", 0),
    }
