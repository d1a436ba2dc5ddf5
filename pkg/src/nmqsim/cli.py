"""Command line entry point: ``nmqsim <subcommand> [options]``.

Subcommands: coeffs, pathsum, circuit, simulate, verify, resources.
Errors go to stderr as one JSON object and the exit status is 2.
"""
from __future__ import annotations

import argparse
import contextlib
import json
import sys
from dataclasses import replace

import yaml

from . import algorithms, bath, circuit, experiment, pathsum

ERRORS = (ValueError, ZeroDivisionError, OSError, bath.QuadratureError)


def _add_model_args(p):
    p.add_argument("--config", help="flat YAML config file")
    p.add_argument("--preset", choices=sorted(experiment.PRESETS), help="built-in parameter set with its shot schedule")
    p.add_argument("--omega", type=float)
    p.add_argument("--xi", type=float)
    p.add_argument("--omega-c", dest="omega_c", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--n-steps", dest="n_steps", type=int)
    p.add_argument("--memory", type=int)
    p.add_argument("--algorithm", choices=["I", "II", "pathsum"])
    p.add_argument("--shots", type=int)
    p.add_argument("--runs", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--initial", type=int)
    p.add_argument("--dense", action="store_true", default=None, help="emit zero-angle RZ gates too")
    p.add_argument("--max-qubits", dest="max_qubits", type=int)
    p.add_argument("-o", "--out", help="output file (default: stdout)")


def _config(args) -> experiment.RunConfig:
    data = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            data = yaml.safe_load(fh) or {}
    if args.preset:
        data["preset"] = args.preset
    for key in ("omega", "xi", "omega_c", "beta", "dt", "n_steps", "memory", "algorithm", "shots", "runs",
                "seed", "initial", "dense", "max_qubits"):
        value = getattr(args, key, None)
        if value is not None:
            data[key] = value
    if "preset" in data and "n_steps" in data:
        data["max_steps"] = data.pop("n_steps")
    return experiment.load_config(data)


@contextlib.contextmanager
def _output(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            yield fh


def cmd_coeffs(args):
    cfg = _config(args)
    n = cfg.schedule[-1][0]
    table = bath.influence_coefficients(cfg.bath, cfg.dt, n, cfg.memory_at(n))
    with _output(args.out) as fh:
        bath.write_coeff_csv(table, fh)


def cmd_pathsum(args):
    cfg = _config(args)
    n = cfg.schedule[-1][0]
    rdms = pathsum.trajectory(cfg.model, n, cfg.memory, cfg.initial)
    with _output(args.out) as fh:
        fh.write(f"# {cfg.header()}\n")
        pathsum.write_trajectory_csv(rdms, cfg.dt, fh)


def cmd_circuit(args):
    cfg = _config(args)
    n = cfg.schedule[-1][0]
    algorithm = "I" if cfg.algorithm == "pathsum" else cfg.algorithm
    table = bath.influence_coefficients(cfg.bath, cfg.dt, n, cfg.memory_at(n))
    plan = algorithms.ExperimentPlan(cfg.model, n, cfg.memory_at(n), algorithm, cfg.initial, args.probe,
                                     dense=cfg.dense)
    build = algorithms.build_algorithm_I if algorithm == "I" else algorithms.build_algorithm_II
    circ = build(plan, table, probes=[args.probe])[0]
    text = circuit.to_qasm(circ) if args.format == "qasm" else circuit.to_text(circ)
    with _output(args.out) as fh:
        fh.write(text)


def cmd_simulate(args):
    cfg = _config(args)
    rows = experiment.run_experiment(replace(cfg, output=None))
    with _output(args.out) as fh:
        experiment.write_trajectory(rows, cfg, fh)
    if args.compare_std:
        with open(args.compare_std, "w", newline="", encoding="utf-8") as fh:
            experiment.std_comparison(cfg, fh)


def cmd_verify(args):
    cfg = _config(args)
    report = experiment.verify(cfg, max_steps=args.max_steps)
    with _output(args.out) as fh:
        fh.write(report.to_text())
    return 0 if report.passed else 1


def cmd_resources(args):
    cfg = _config(args)
    n = cfg.schedule[-1][0]
    algorithm = "I" if cfg.algorithm == "pathsum" else cfg.algorithm
    report = algorithms.resource_counts(cfg.n_levels, n, cfg.memory_at(n), algorithm)
    report.update(n_levels=cfg.n_levels, n_steps=n, memory=cfg.memory_at(n), algorithm=algorithm)
    with _output(args.out) as fh:
        fh.write(json.dumps(report, indent=2, sort_keys=True) + "\n")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nmqsim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("coeffs", help="dump the influence-coefficient table as CSV")
    _add_model_args(p)
    p.set_defaults(func=cmd_coeffs)

    p = sub.add_parser("pathsum", help="exact path-sum trajectory as CSV")
    _add_model_args(p)
    p.set_defaults(func=cmd_pathsum)

    p = sub.add_parser("circuit", help="build a probe circuit and export its gate list")
    _add_model_args(p)
    p.add_argument("--probe", type=int, default=0)
    p.add_argument("--format", choices=["text", "qasm"], default="text")
    p.set_defaults(func=cmd_circuit)

    p = sub.add_parser("simulate", help="sampled population trajectory as CSV")
    _add_model_args(p)
    p.add_argument("--compare-std", dest="compare_std", help="also write the algorithm I/II std comparison CSV")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="run the invariant self-check")
    _add_model_args(p)
    p.add_argument("--max-steps", dest="max_steps", type=int, default=3)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("resources", help="qubit and gate counts as JSON")
    _add_model_args(p)
    p.set_defaults(func=cmd_resources)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        status = args.func(args)
    except ERRORS as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 2
    return status or 0


if __name__ == "__main__":
    sys.exit(main())
