"""Path-integral circuits for non-Markovian spin-boson dynamics.

Influence-functional coefficients, a brute-force path-sum reference, exact
diagonal-operator synthesis, circuit assembly for the all-zeros and
single-readout measurement schemes, and a small statevector simulator.
"""
from .algorithms import (
    CompactOperator,
    ExperimentPlan,
    build_algorithm_I,
    build_algorithm_II,
    combine,
    estimate_populations,
    estimate_populations_multi,
    exact_success_probability,
    resource_counts,
)
from .bath import CoeffTable, OhmicBath, QuadratureError, influence_coefficients, spectral_density
from .circuit import Circuit, Gate, QubitCapError, Statevector, sample, simulate, unitary_of
from .experiment import RunConfig, load_config, run_experiment, verify
from .pathsum import (
    PathBudgetError,
    ReducedDensityMatrix,
    SpinBosonModel,
    bare_propagator,
    influence_factor,
    path_amplitude,
    rdm_pathsum,
    trajectory,
)
from .synthesis import DiagonalOp, WalshSpec, dilate, synthesize_diagonal, walsh_circuit, walsh_coefficients

__version__ = "0.1.0"
