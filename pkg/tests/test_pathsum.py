import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nmqsim.bath import OhmicBath, influence_coefficients
from nmqsim.pathsum import (
    PathBudgetError,
    SpinBosonModel,
    bare_propagator,
    enumerate_paths,
    influence_factor,
    path_amplitude,
    rdm_pathsum,
    trajectory,
    write_trajectory_csv,
)
from oracles import WEAK, STRONG, naive_rdm, propagator


def model(params=WEAK, dt=0.25, omega=1.0):
    return SpinBosonModel(omega, OhmicBath(**params), dt)


def test_free_propagator_at_quarter_period():
    m = SpinBosonModel(1.0, OhmicBath(0.0, 1.0, 1.0), np.pi / 4)
    u = bare_propagator(m)
    r = 1 / np.sqrt(2)
    np.testing.assert_allclose(u, [[r, 1j * r], [1j * r, r]], atol=1e-15)


@pytest.mark.parametrize("dt", [0.1, 0.25, 1.3])
def test_propagator_is_unitary_and_matches_closed_form(dt):
    u = bare_propagator(model(dt=dt))
    np.testing.assert_allclose(u.conj().T @ u, np.eye(2), atol=1e-15)
    np.testing.assert_allclose(u, propagator(1.0, dt), atol=1e-15)


def test_general_propagator_matches_expm():
    from scipy.linalg import expm

    m = SpinBosonModel(0.7, OhmicBath(**WEAK), 0.3, dvr_values=(1.0, 0.0, -1.0))
    np.testing.assert_allclose(bare_propagator(m), expm(-1j * 0.3 * m.system_hamiltonian()), atol=1e-14)


def test_influence_factor_examples():
    table = influence_coefficients(OhmicBath(**WEAK), 0.25, 2)
    a = table[(1, 0)]
    assert influence_factor(1, 0, 1, 1, 1, -1, table) == 1.0
    assert influence_factor(1, 0, 1, -1, 1, -1, table) == pytest.approx(np.exp(-4 * a.real), abs=1e-15)
    assert influence_factor(1, 0, 1, -1, 1, 1, table) == pytest.approx(np.exp(-4j * a.imag), abs=1e-15)
    # outside the window the factor is one
    assert influence_factor(2, 0, 1, -1, 1, -1, table.truncated(1)) == 1.0


def test_single_step_amplitude_without_bath():
    m = SpinBosonModel(1.0, OhmicBath(0.0, 1.0, 1.0), np.pi / 4)
    table = influence_coefficients(m.bath, m.dt, 1)
    assert path_amplitude((0, 0), (0, 0), m, table, (0, 0)) == pytest.approx(0.5)
    assert path_amplitude((1, 0), (0, 0), m, table, (0, 0)) == 0


@pytest.mark.parametrize("params", [WEAK, STRONG], ids=["weak", "strong"])
@pytest.mark.parametrize("n_steps, memory", [(1, 1), (2, 2), (3, 2), (4, 4), (4, 2)])
def test_matches_naive_exponential_sum(params, n_steps, memory):
    m = model(params)
    table = influence_coefficients(m.bath, m.dt, n_steps, memory)
    alpha = {p: table[p] for p in table}
    ref = naive_rdm(alpha, n_steps, memory, 1.0, m.dt)
    rho = rdm_pathsum(m, table, n_steps).entries
    assert np.max(np.abs(rho - ref)) <= 1e-12


@pytest.mark.parametrize("initial", [0, 1])
def test_path_amplitude_sums_to_rdm(initial):
    m = model(STRONG)
    table = influence_coefficients(m.bath, m.dt, 2)
    rho = np.zeros((2, 2), dtype=complex)
    for fwd, bwd in enumerate_paths(2, 2, initial):
        rho[fwd[-1], bwd[-1]] += path_amplitude(fwd, bwd, m, table, (initial, initial))
    np.testing.assert_allclose(rho, rdm_pathsum(m, table, 2, initial).entries, atol=1e-14)


@settings(max_examples=15, deadline=None)
@given(
    xi=st.floats(0.0, 2.0),
    omega_c=st.floats(0.5, 10.0),
    beta=st.floats(0.1, 10.0),
    dt=st.floats(0.05, 0.5),
    n_steps=st.integers(1, 4),
)
def test_trace_and_hermiticity(xi, omega_c, beta, dt, n_steps):
    m = SpinBosonModel(1.0, OhmicBath(xi, omega_c, beta), dt)
    rdm = rdm_pathsum(m, influence_coefficients(m.bath, dt, n_steps), n_steps)
    assert abs(rdm.trace() - 1) <= 1e-12
    assert rdm.hermiticity_error() <= 1e-12


@pytest.mark.parametrize("dt", [0.1, 0.25])
def test_free_dynamics_is_rabi_oscillation(dt):
    m = SpinBosonModel(1.0, OhmicBath(0.0, 7.5, 5.0), dt)
    for k, rdm in enumerate(trajectory(m, 6)):
        assert rdm.populations[0] == pytest.approx(np.cos(k * dt) ** 2, abs=1e-12)


def test_full_memory_truncation_is_identity():
    m = model(STRONG)
    full = influence_coefficients(m.bath, m.dt, 3, 3)
    np.testing.assert_array_equal(rdm_pathsum(m, full, 3).entries, rdm_pathsum(m, full.truncated(3), 3).entries)


def test_zero_steps_returns_initial_state():
    rho = rdm_pathsum(model(), None, 0, initial=1).entries
    np.testing.assert_array_equal(rho, [[0, 0], [0, 1]])


def test_budget_and_table_errors():
    m = model()
    with pytest.raises(PathBudgetError):
        rdm_pathsum(m, None, 9)
    with pytest.raises(ValueError, match="exactly 3 steps"):
        rdm_pathsum(m, influence_coefficients(m.bath, m.dt, 2), 3)
    with pytest.raises(ValueError):
        rdm_pathsum(m, influence_coefficients(m.bath, m.dt, 2), 2, initial=2)


def test_trajectory_csv():
    m = model()
    buf = io.StringIO()
    write_trajectory_csv(trajectory(m, 2), m.dt, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "t,p_0,p_1,re_rho_01,im_rho_01"
    assert lines[1] == "0,1,0,0,0"
    assert len(lines) == 4
