"""Configuration-driven experiment runner and the invariant self-check.

A run builds both probe circuits for every scheduled time step, computes the
exact success probabilities once, then draws ``runs`` independent shot
samples of each and turns them into population estimates.
"""
from __future__ import annotations

import csv
import io
import itertools
import os
from dataclasses import dataclass, field, fields, replace
from typing import List, Optional, Sequence

import numpy as np
import yaml
from scipy import linalg

from .algorithms import (
    ExperimentPlan,
    build_algorithm_I,
    build_algorithm_II,
    circuit_resources,
    combine,
    estimate_populations_multi,
    exact_success_probability,
    resource_counts,
)
from .bath import CoeffTable, OhmicBath, influence_coefficients
from .circuit import DEFAULT_MAX_QUBITS, unitary_of
from .pathsum import MAX_PATH_BITS, SpinBosonModel, path_amplitude, rdm_pathsum
from .synthesis import DiagonalOp, fwht, synthesize_diagonal, walsh_circuit, walsh_coefficients

__all__ = [
    "RunConfig",
    "StepResult",
    "PRESETS",
    "SHOT_SCHEDULES",
    "load_config",
    "run_experiment",
    "write_trajectory",
    "std_comparison",
    "verify",
    "Check",
]

# shots per time step (steps 1..5), identical for both algorithms
SHOT_SCHEDULES = {
    "weak": [20_000, 30_000, 40_000, 250_000, 5_000_000],
    "strong": [20_000, 75_000, 300_000, 5_000_000, 5_000_000],
}

PRESETS = {
    "weak": dict(omega=1.0, xi=0.1, omega_c=7.5, beta=5.0),
    "strong": dict(omega=1.0, xi=1.2, omega_c=2.5, beta=0.2),
}


@dataclass(frozen=True)
class RunConfig:
    """Model parameters plus a per-step ``(n_steps, shots, runs)`` schedule.

    ``memory=None`` keeps the full memory at every step; otherwise step ``N``
    uses ``min(memory, N)``.
    """

    omega: float = 1.0
    xi: float = 0.1
    omega_c: float = 7.5
    beta: float = 5.0
    dt: float = 0.25
    n_levels: int = 2
    schedule: tuple = ((1, 1000, 100),)
    algorithm: str = "I"
    memory: Optional[int] = None
    initial: int = 0
    seed: int = 0
    dense: bool = False
    max_qubits: int = DEFAULT_MAX_QUBITS
    output: Optional[str] = None
    preset: Optional[str] = None

    def __post_init__(self):
        schedule = tuple(tuple(int(v) for v in row) for row in self.schedule)
        object.__setattr__(self, "schedule", schedule)
        if not schedule:
            raise ValueError("empty schedule")
        steps = [row[0] for row in schedule]
        if any(b <= a for a, b in zip(steps, steps[1:])) or steps[0] < 1:
            raise ValueError(f"schedule time steps must be positive and strictly increasing, got {steps}")
        if any(row[1] < 1 or row[2] < 1 for row in schedule):
            raise ValueError("shots and runs must be positive")
        if self.algorithm not in ("I", "II", "pathsum"):
            raise ValueError(f"algorithm must be I, II or pathsum, got {self.algorithm!r}")
        if self.memory is not None and self.memory < 1:
            raise ValueError(f"memory must be >= 1, got {self.memory}")
        if self.dt <= 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")

    @property
    def bath(self) -> OhmicBath:
        return OhmicBath(self.xi, self.omega_c, self.beta)

    @property
    def model(self) -> SpinBosonModel:
        values = (1.0, -1.0) if self.n_levels == 2 else tuple(np.linspace(1.0, -1.0, self.n_levels))
        return SpinBosonModel(self.omega, self.bath, self.dt, dvr_values=values)

    def memory_at(self, n_steps: int) -> int:
        return n_steps if self.memory is None else min(self.memory, n_steps)

    @classmethod
    def from_preset(cls, name: str, algorithm: str = "I", max_steps: int = 5, runs: int = 100, **overrides):
        if name not in PRESETS:
            raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
        shots = SHOT_SCHEDULES[name][:max_steps]
        schedule = tuple((i + 1, s, runs) for i, s in enumerate(shots))
        return cls(**{**PRESETS[name], "schedule": schedule, "algorithm": algorithm, "preset": name, **overrides})

    def header(self) -> str:
        keys = ("omega", "xi", "omega_c", "beta", "dt", "n_levels", "algorithm", "memory", "initial", "seed")
        return " ".join(f"{k}={getattr(self, k)}" for k in keys)


_FLAT_KEYS = {f.name for f in fields(RunConfig)} | {"n_steps", "shots", "runs", "max_steps"}


def load_config(source) -> RunConfig:
    """Build a config from a flat YAML mapping (path, text or dict).

    Recognized keys are the ``RunConfig`` fields plus ``n_steps``, ``shots``
    and ``runs`` (steps ``1..n_steps``; ``shots`` may be a per-step list) and
    ``preset``/``max_steps`` for the built-in Table-1 schedules.
    """
    if isinstance(source, dict):
        data = dict(source)
    elif os.path.exists(source):
        with open(source, encoding="utf-8") as fh:
            data = yaml.safe_load(fh) or {}
    else:
        data = yaml.safe_load(source) or {}
    if not isinstance(data, dict):
        raise ValueError("config must be a flat key-value mapping")
    unknown = set(data) - _FLAT_KEYS
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")

    preset = data.pop("preset", None)
    n_steps = data.pop("n_steps", None)
    shots = data.pop("shots", None)
    runs = data.pop("runs", None)
    max_steps = data.pop("max_steps", None)

    if preset is not None:
        kwargs = dict(algorithm=data.get("algorithm", "I"), max_steps=max_steps or n_steps or 5)
        if runs is not None:
            kwargs["runs"] = runs
        base = RunConfig.from_preset(preset, **kwargs)
        if shots is not None:
            base = replace(base, schedule=_schedule(len(base.schedule), shots, runs or base.schedule[0][2]))
        return replace(base, **data)
    if n_steps is not None:
        data["schedule"] = _schedule(int(n_steps), 1000 if shots is None else shots, 1 if runs is None else runs)
    elif "schedule" in data:
        data["schedule"] = tuple(tuple(row) for row in data["schedule"])
    return RunConfig(**data)


def _schedule(n_steps: int, shots, runs: int):
    shots = list(shots) if isinstance(shots, (list, tuple)) else [shots] * n_steps
    if len(shots) != n_steps:
        raise ValueError(f"{len(shots)} shot counts for {n_steps} steps")
    return tuple((i + 1, int(s), int(runs)) for i, s in enumerate(shots))


@dataclass(frozen=True)
class StepResult:
    t: float
    n_steps: int
    p0_mean: float
    p0_std: float
    p1_mean: float
    p1_std: float
    p0_exact: float
    runs: int
    shots: int
    p0_circuit: float = float("nan")


def _oracle_p0(model, table, n_steps, initial) -> float:
    if n_steps * np.log2(model.n_levels) > MAX_PATH_BITS:
        return float("nan")
    return float(rdm_pathsum(model, table, n_steps, initial).populations[0])


def _plan(config: RunConfig, n_steps: int, shots: int, runs: int, algorithm: str) -> ExperimentPlan:
    return ExperimentPlan(
        config.model, n_steps, config.memory_at(n_steps), algorithm, config.initial, 0, shots, runs, config.seed, config.dense
    )


def exact_probe_probabilities(config: RunConfig, n_steps: int, algorithm: str, table: CoeffTable) -> List[float]:
    plan = _plan(config, n_steps, 1, 1, algorithm)
    build = build_algorithm_I if algorithm == "I" else build_algorithm_II
    return [exact_success_probability(c, max_qubits=config.max_qubits) for c in build(plan, table)]


def sample_estimates(probs: Sequence[float], shots: int, runs: int, seed: int, n_steps: int) -> np.ndarray:
    """Per-run ``p0`` estimates from binomial success counts.

    Counting the success outcome of a full multinomial draw is exactly a
    binomial draw with the success probability, so only that is sampled.
    Runs where every probe recorded zero successes yield NaN.
    """
    out = np.empty(runs)
    for r in range(runs):
        rng = np.random.default_rng([seed, n_steps, r])
        counts = [rng.binomial(shots, min(max(p, 0.0), 1.0)) for p in probs]
        out[r] = np.nan if not any(counts) else estimate_populations_multi(counts)[0]
    return out


def run_experiment(config: RunConfig) -> List[StepResult]:
    """Run the configured schedule and optionally write the trajectory CSV."""
    model = config.model
    rows = []
    for n_steps, shots, runs in config.schedule:
        table = influence_coefficients(config.bath, config.dt, n_steps, config.memory_at(n_steps))
        exact = _oracle_p0(model, table, n_steps, config.initial)
        if config.algorithm == "pathsum":
            rows.append(StepResult(n_steps * config.dt, n_steps, exact, 0.0, 1.0 - exact, 0.0, exact, 0, 0))
            continue
        probs = exact_probe_probabilities(config, n_steps, config.algorithm, table)
        estimates = sample_estimates(probs, shots, runs, config.seed, n_steps)
        valid = estimates[~np.isnan(estimates)]
        mean = float(valid.mean()) if valid.size else float("nan")
        std = float(valid.std(ddof=1)) if valid.size > 1 else 0.0
        rows.append(
            StepResult(
                n_steps * config.dt, n_steps, mean, std, 1.0 - mean, std, exact, int(valid.size), shots,
                float(estimate_populations_multi(probs)[0]),
            )
        )
    if config.output:
        with open(config.output, "w", newline="", encoding="utf-8") as fh:
            write_trajectory(rows, config, fh)
    return rows


TRAJECTORY_COLUMNS = ("t", "p0_mean", "p0_std", "p1_mean", "p1_std", "p0_exact", "runs", "shots", "p0_circuit")


def write_trajectory(rows: Sequence[StepResult], config: RunConfig, fh) -> None:
    fh.write(f"# {config.header()}\n")
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(TRAJECTORY_COLUMNS)
    for row in rows:
        values = [getattr(row, c) for c in TRAJECTORY_COLUMNS]
        writer.writerow([v if isinstance(v, int) else f"{v:.17g}" for v in values])


def std_comparison(config: RunConfig, fh=None) -> List[tuple]:
    """Run-to-run standard deviation of both algorithms at matched shots.

    Returns ``(t, shots, std_I, std_II)`` rows and writes them as CSV to
    ``fh`` when given.
    """
    rows = []
    for n_steps, shots, runs in config.schedule:
        table = influence_coefficients(config.bath, config.dt, n_steps, config.memory_at(n_steps))
        stds = []
        for algorithm in ("I", "II"):
            probs = exact_probe_probabilities(config, n_steps, algorithm, table)
            est = sample_estimates(probs, shots, runs, config.seed, n_steps)
            est = est[~np.isnan(est)]
            stds.append(float(est.std(ddof=1)) if est.size > 1 else 0.0)
        rows.append((n_steps * config.dt, shots, stds[0], stds[1]))
    if fh is not None:
        fh.write(f"# {config.header()}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "shots", "p0_std_I", "p0_std_II"])
        for t, shots, a, b in rows:
            writer.writerow([f"{t:.17g}", shots, f"{a:.17g}", f"{b:.17g}"])
    return rows


@dataclass
class Check:
    name: str
    passed: bool
    error: float
    tolerance: float
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: error={self.error:.3e} tol={self.tolerance:.1e} {self.detail}".rstrip()


@dataclass
class VerifyReport:
    checks: List[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> Check:
        return next(c for c in self.checks if c.name == name)

    def to_text(self) -> str:
        return "\n".join(c.line() for c in self.checks) + "\n"


def _check(name, error, tol, detail=""):
    return Check(name, bool(error <= tol), float(error), tol, detail)


def verify(config: RunConfig, table: Optional[CoeffTable] = None, max_steps: int = 3, seed: int = 1234) -> VerifyReport:
    """Run the invariant suite on a small instance of ``config``.

    ``table`` replaces the coefficient table fed to the circuit assembly (the
    references are always recomputed), which makes corrupted coefficients
    visible in the factor-product and oracle checks.
    """
    report = VerifyReport()
    rng = np.random.default_rng(seed)
    model = config.model
    n_steps = min(config.schedule[-1][0], max_steps)
    memory = config.memory_at(n_steps)
    reference = influence_coefficients(config.bath, config.dt, n_steps, memory)
    used = reference if table is None else table

    # quadrature: doubled cutoff and tighter tolerance
    if config.xi > 0:
        fine = influence_coefficients(config.bath, config.dt, n_steps, memory, omega_max_factor=100.0, tol=1e-12)
        err = max(abs(reference[p] - fine[p]) / abs(fine[p]) for p in fine)
    else:
        err = 0.0
    report.checks.append(_check("quadrature_refinement", err, 1e-8, f"N={n_steps}"))

    # combined operators reproduce the factorized path amplitude
    ops = combine(model, used, n_steps, memory)
    n = model.n_levels
    err = 0.0
    for fwd_tail, bwd_tail in _paths(n, n_steps):
        fwd, bwd = (config.initial,) + fwd_tail, (config.initial,) + bwd_tail
        prod = 1.0 + 0j
        for op in ops:
            idx = ((fwd[op.kp] * n + bwd[op.kp]) * n + fwd[op.k]) * n + bwd[op.k]
            prod *= op.diagonal.entries[idx] * op.scale
        ref = path_amplitude(fwd, bwd, model, reference, (config.initial, config.initial))
        err = max(err, abs(prod - ref) / max(abs(ref), 1e-300))
    report.checks.append(_check("factor_product", err, 1e-12, f"{len(ops)} operators"))

    # dilation block identity, including zero entries
    err = 0.0
    for trial in range(20):
        d = rng.uniform(0, 1, 4) * np.exp(1j * rng.uniform(-np.pi, np.pi, 4))
        if trial % 4 == 0:
            d[rng.integers(4)] = 0.0
        op = DiagonalOp.from_entries(d)
        block = unitary_of(synthesize_diagonal(op, [1, 2], 0))[:4, :4]
        err = max(err, float(np.max(np.abs(block - np.diag(op.entries)))))
    report.checks.append(_check("dilation_block", err, 1e-10))

    # Walsh round trip against the dense Hadamard matrix
    err = 0.0
    for q in range(1, 6):
        f = rng.uniform(-np.pi, np.pi, 2**q)
        a = linalg.hadamard(2**q) @ f / 2**q
        err = max(err, float(np.max(np.abs(walsh_coefficients(f).coefficients - a))), float(np.max(np.abs(fwht(a) - f))))
    report.checks.append(_check("walsh_reconstruction", err, 1e-12))

    # gate counts: dense Walsh circuits and built algorithm-I registers
    bad = []
    for q in range(1, 7):
        count = walsh_circuit(walsh_coefficients(rng.uniform(-1, 1, 2**q)), list(range(q)), dense=True).native_gate_count()
        if count != 2 ** (q + 1) - 3:
            bad.append(f"q={q}:{count}")
    q3 = walsh_circuit(walsh_coefficients(rng.uniform(-1, 1, 8)), [0, 1, 2], dense=True).native_gate_count()
    for steps in range(1, n_steps + 1):
        mem = config.memory_at(steps)
        circ = build_algorithm_I(replace(_plan(config, steps, 1, 1, "I"), dense=True),
                                 influence_coefficients(config.bath, config.dt, steps, mem), probes=[0])[0]
        built, formula = circuit_resources(circ), resource_counts(n, steps, mem, "I")
        if any(built[k] != formula[k] for k in ("qubits", "native_gates", "compact_operators")):
            bad.append(f"N={steps}")
    report.checks.append(_check("gate_counts", float(len(bad)), 0.0, f"q=3 dense count {q3}; mismatches {bad}"))

    # exact-amplitude circuit populations against the path sum
    err = 0.0
    for steps in range(1, n_steps + 1):
        mem = config.memory_at(steps)
        ref_table = influence_coefficients(config.bath, config.dt, steps, mem)
        circ_table = used if steps == n_steps else ref_table
        plan = _plan(config, steps, 1, 1, "I")
        probs = [exact_success_probability(c, max_qubits=config.max_qubits) for c in build_algorithm_I(plan, circ_table)]
        p0 = estimate_populations_multi(probs)[0]
        err = max(err, abs(p0 - _oracle_p0(model, ref_table, steps, config.initial)))
    report.checks.append(_check("oracle_equivalence", err, 1e-8, f"N<={n_steps}"))
    return report


def _paths(n_levels: int, n_steps: int):
    for free in itertools.product(range(n_levels), repeat=2 * n_steps):
        yield free[0::2], free[1::2]


def trajectory_csv_text(rows, config) -> str:
    buf = io.StringIO()
    write_trajectory(rows, config, buf)
    return buf.getvalue()
