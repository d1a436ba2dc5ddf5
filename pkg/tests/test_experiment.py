import io
import json

import numpy as np
import pytest

from nmqsim import cli
from nmqsim.bath import influence_coefficients
from nmqsim.experiment import (
    RunConfig,
    load_config,
    run_experiment,
    sample_estimates,
    std_comparison,
    trajectory_csv_text,
    verify,
)


def test_preset_schedule():
    cfg = RunConfig.from_preset("strong")
    assert cfg.schedule[3] == (4, 5_000_000, 100)
    assert (cfg.xi, cfg.omega_c, cfg.beta) == (1.2, 2.5, 0.2)
    assert RunConfig.from_preset("weak", max_steps=2).schedule == ((1, 20_000, 100), (2, 30_000, 100))


@pytest.mark.parametrize(
    "source",
    [
        "xi: 0.3\nn_steps: 3\nshots: 500\nruns: 4\n",
        {"xi": 0.3, "n_steps": 3, "shots": [500, 500, 500], "runs": 4},
    ],
)
def test_load_config(source):
    cfg = load_config(source)
    assert cfg.xi == 0.3
    assert cfg.schedule == ((1, 500, 4), (2, 500, 4), (3, 500, 4))


def test_load_config_from_file(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text("preset: strong\nmax_steps: 2\nruns: 7\nalgorithm: II\n")
    cfg = load_config(str(path))
    assert cfg.schedule == ((1, 20_000, 7), (2, 75_000, 7))
    assert cfg.algorithm == "II"


@pytest.mark.parametrize(
    "source",
    ["bogus: 1\n", "- 1\n- 2\n", {"schedule": [[2, 10, 1], [1, 10, 1]]}, {"n_steps": 2, "shots": [1]}, {"algorithm": "III"}],
)
def test_bad_configs(source):
    with pytest.raises(ValueError):
        load_config(source)


def test_pathsum_only_run():
    rows = run_experiment(RunConfig(xi=0.0, dt=0.25, schedule=((4, 1, 1),), algorithm="pathsum"))
    assert rows[0].t == 1.0
    assert rows[0].p0_mean == pytest.approx(np.cos(1.0) ** 2, abs=1e-12)


def test_trajectory_columns_and_identity():
    cfg = RunConfig.from_preset("weak", max_steps=2, runs=10)
    rows = run_experiment(cfg)
    for row in rows:
        assert row.p0_mean + row.p1_mean == 1.0
        assert row.p0_std >= 0 and row.runs == 10
        assert row.p0_circuit == pytest.approx(row.p0_exact, abs=1e-8)
    header = trajectory_csv_text(rows, cfg).splitlines()[1]
    assert header == "t,p0_mean,p0_std,p1_mean,p1_std,p0_exact,runs,shots,p0_circuit"


def test_run_is_deterministic(tmp_path):
    cfg = RunConfig.from_preset("strong", max_steps=3, runs=5, seed=42)
    a = trajectory_csv_text(run_experiment(cfg), cfg)
    b = trajectory_csv_text(run_experiment(cfg), cfg)
    assert a == b
    other = trajectory_csv_text(run_experiment(RunConfig.from_preset("strong", max_steps=3, runs=5, seed=43)), cfg)
    assert other != a


def test_output_file(tmp_path):
    out = tmp_path / "traj.csv"
    cfg = RunConfig(schedule=((1, 100, 3),), output=str(out))
    rows = run_experiment(cfg)
    assert out.read_text() == trajectory_csv_text(rows, cfg)


def test_sampling_error_shrinks_with_shots():
    probs = [0.02, 0.005]
    exact = np.sqrt(probs[0]) / (np.sqrt(probs[0]) + np.sqrt(probs[1]))
    stds = [np.std(sample_estimates(probs, shots, 200, 0, 1)) for shots in (1_000, 100_000)]
    assert stds[1] < stds[0] / 5
    assert abs(np.mean(sample_estimates(probs, 100_000, 200, 0, 1)) - exact) < 3 * stds[1] / np.sqrt(200)


def test_zero_count_runs_are_dropped():
    est = sample_estimates([1e-12, 1e-12], 10, 5, 0, 1)
    assert np.all(np.isnan(est))
    row = run_experiment(RunConfig(xi=1.2, omega_c=2.5, beta=0.2, schedule=((3, 1, 20),)))[0]
    assert row.runs < 20


def test_std_comparison():
    buf = io.StringIO()
    rows = std_comparison(RunConfig.from_preset("weak", max_steps=2, runs=20), buf)
    assert len(rows) == 2
    # identical success probabilities, identical seeds: identical spreads
    assert all(a == pytest.approx(b, rel=1e-9) for _, _, a, b in rows)
    assert buf.getvalue().splitlines()[1] == "t,shots,p0_std_I,p0_std_II"


@pytest.mark.parametrize("preset", ["weak", "strong"])
def test_verify_passes(preset):
    report = verify(RunConfig.from_preset(preset, max_steps=3))
    assert report.passed, report.to_text()
    assert report["oracle_equivalence"].error <= 1e-8


def test_verify_catches_corrupted_coefficient():
    cfg = RunConfig.from_preset("weak", max_steps=2)
    table = influence_coefficients(cfg.bath, cfg.dt, 2)
    report = verify(cfg, table=table.with_entry((1, 0), table[(1, 0)] * 1.5))
    assert not report["factor_product"].passed
    assert not report["oracle_equivalence"].passed
    assert report["walsh_reconstruction"].passed


class TestCli:
    def run(self, capsys, *argv):
        status = cli.main(list(argv))
        out = capsys.readouterr()
        return status, out.out, out.err

    def test_resources(self, capsys):
        status, out, _ = self.run(capsys, "resources", "--n-steps", "2", "--algorithm", "II")
        assert status == 0
        report = json.loads(out)
        assert report["toffolis"] == 14 and report["qubits"] == 17

    def test_coeffs(self, capsys):
        status, out, _ = self.run(capsys, "coeffs", "--preset", "weak", "--n-steps", "2")
        assert status == 0
        assert out.splitlines()[0] == "kp,k,re_alpha,im_alpha"
        assert len(out.splitlines()) == 7

    def test_pathsum(self, capsys):
        status, out, _ = self.run(capsys, "pathsum", "--xi", "0", "--n-steps", "4")
        assert status == 0
        assert float(out.splitlines()[-1].split(",")[1]) == pytest.approx(np.cos(1.0) ** 2, abs=1e-12)

    @pytest.mark.parametrize("fmt, first", [("text", "QUBITS 9"), ("qasm", "OPENQASM 2.0;")])
    def test_circuit(self, capsys, fmt, first):
        status, out, _ = self.run(capsys, "circuit", "--n-steps", "2", "--format", fmt, "--probe", "1")
        assert status == 0
        assert out.splitlines()[0] == first

    def test_simulate_to_file(self, capsys, tmp_path):
        out, std = tmp_path / "a.csv", tmp_path / "std.csv"
        status, _, _ = self.run(capsys, "simulate", "--preset", "weak", "--n-steps", "2", "--runs", "5",
                                "-o", str(out), "--compare-std", str(std))
        assert status == 0
        assert len(out.read_text().splitlines()) == 4
        assert len(std.read_text().splitlines()) == 4

    def test_config_file(self, capsys, tmp_path):
        path = tmp_path / "c.yaml"
        path.write_text("xi: 0.0\nn_steps: 2\n")
        status, out, _ = self.run(capsys, "pathsum", "--config", str(path), "--dt", "0.5")
        assert status == 0
        assert float(out.splitlines()[-1].split(",")[1]) == pytest.approx(np.cos(1.0) ** 2, abs=1e-12)

    def test_verify(self, capsys):
        status, out, _ = self.run(capsys, "verify", "--preset", "strong", "--max-steps", "2")
        assert status == 0
        assert all(line.startswith("PASS") for line in out.splitlines())

    @pytest.mark.parametrize(
        "argv",
        [("simulate", "--xi", "-1"), ("pathsum", "--n-steps", "12"), ("circuit", "--n-steps", "2", "--probe", "3"),
         ("pathsum", "--config", "/nonexistent.yaml")],
    )
    def test_errors_are_structured(self, capsys, argv):
        status, _, err = self.run(capsys, *argv)
        assert status == 2
        assert set(json.loads(err)) == {"error", "message"}
