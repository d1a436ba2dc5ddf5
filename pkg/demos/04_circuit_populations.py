"""From coefficients to circuits to populations, with and without shot noise."""
import numpy as np

from nmqsim.algorithms import (
    ExperimentPlan,
    build_algorithm_I,
    build_algorithm_II,
    estimate_populations,
    exact_success_probability,
    resource_counts,
)
from nmqsim.bath import OhmicBath, influence_coefficients
from nmqsim.experiment import RunConfig, run_experiment, sample_estimates
from nmqsim.pathsum import SpinBosonModel, rdm_pathsum

model = SpinBosonModel(1.0, OhmicBath(1.2, 2.5, 0.2), 0.25)
n_steps = 3
table = influence_coefficients(model.bath, model.dt, n_steps)
plan = ExperimentPlan(model, n_steps, memory=n_steps)

circuits = build_algorithm_I(plan, table)  # probe |0> and probe |1>
print("qubits:", circuits[0].n_qubits, "gates:", circuits[0].counts())
print(resource_counts(2, n_steps))

probs = [exact_success_probability(c) for c in circuits]
print("success probabilities:", probs)
print("circuit p0:", estimate_populations(*probs)[0])
print("path sum p0:", rdm_pathsum(model, table, n_steps).populations[0])

# the readout-qubit variant has the same statistics on a bigger register
# (2Q - 1 qubits, so step back to N=2 to stay under the simulator cap)
small = influence_coefficients(model.bath, model.dt, 2)
small_plan = ExperimentPlan(model, 2, memory=2)
one = build_algorithm_I(small_plan, small, probes=[0])[0]
two = build_algorithm_II(small_plan, small, probes=[0])[0]
print("\nalgorithm I:  qubits", one.n_qubits, "p =", exact_success_probability(one))
print("algorithm II: qubits", two.n_qubits, "toffolis", two.count("TOFFOLI"), "p =", exact_success_probability(two))

# shot noise: the |1> probe succeeds only a few times per million shots,
# so small budgets see no |1> successes at all and report p0 = 1
exact = estimate_populations(*probs)[0]
for shots in (10**3, 10**4, 10**5, 10**6):
    est = sample_estimates(probs, shots, 100, seed=1, n_steps=n_steps)
    est = est[~np.isnan(est)]
    print(f"{shots:>8} shots: mean {est.mean():.5f}  std {est.std(ddof=1):.5f}  (exact {exact:.5f})")

# a full schedule, shot counts per step as in the published runs
cfg = RunConfig.from_preset("strong", max_steps=3, runs=100)
for row in run_experiment(cfg):
    print(f"t={row.t:.2f}  p0={row.p0_mean:.4f} +- {row.p0_std:.4f}  exact {row.p0_exact:.4f}  ({row.shots} shots)")
