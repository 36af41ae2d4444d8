"""Command-line interface: one subcommand per task, config-file driven.

Exit codes: 0 success, 1 input/configuration error, 2 numerical failure.
Failures emit a machine-readable error record on stderr (and into
``error.json`` in the output directory when it exists).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict, dataclass

import numpy as np

from . import __version__
from .circuit import CircuitSpec, build_d_flux, build_d_ng
from .config import TASKS, ConfigError, RunConfig, load_config_file
from .dynamics import (
    DriveProtocol,
    default_inversion_horizon,
    inversion_threshold,
    simulate_drive,
)
from .metrics import (
    code_space_from_indices,
    matrix_element_table,
    select_code_space,
    select_i1,
)
from .output import write_manifest, write_table
from .spectral import (
    EigenSolution,
    EigenbasisOperator,
    converged_solution,
    initial_cutoff,
    to_eigenbasis,
)
from .sweeps import WORKERS_ENV, find_kappa_null, phase_diagram, sweep_parameter

__all__ = ["main", "run"]


@dataclass
class _Workspace:
    """Solved circuit with derivative tables, optionally rescaled."""

    spec: CircuitSpec
    sol: EigenSolution
    charge: EigenbasisOperator
    flux: EigenbasisOperator
    i1: int
    omega01: float
    code: object | None
    scale: float | None


def _scaled(ws: _Workspace, target: float) -> _Workspace:
    scale = target / ws.omega01
    sol = EigenSolution(
        energies=ws.sol.energies * scale,
        states=ws.sol.states,
        cutoff=ws.sol.cutoff,
        converged=ws.sol.converged,
        parity=ws.sol.parity,
    )
    charge = EigenbasisOperator(entries=ws.charge.entries * scale, channel="charge")
    flux = EigenbasisOperator(entries=ws.flux.entries * scale, channel="flux")
    code = None
    if ws.code is not None:
        code = code_space_from_indices(sol, ws.code.i1, ws.code.i2)
    spec = ws.spec.replace(
        ej_n=ws.spec.ej_n * scale, ej_m=ws.spec.ej_m * scale, ec=ws.spec.ec * scale
    )
    return _Workspace(
        spec=spec, sol=sol, charge=charge, flux=flux, i1=ws.i1,
        omega01=ws.omega01 * scale, code=code, scale=scale,
    )


def _solve(config: RunConfig) -> _Workspace:
    spec = config.circuit
    sol = converged_solution(spec, config.levels, tol=config.tol)
    charge = to_eigenbasis(build_d_ng(spec, sol.cutoff), sol, channel="charge")
    flux = to_eigenbasis(build_d_flux(spec, sol.cutoff), sol, channel="flux")
    i1 = select_i1(sol, charge, l_max=config.levels)
    omega01 = float(sol.energies[i1] - sol.energies[0])
    try:
        code = select_code_space(sol, charge, l_max=config.levels, me_floor=config.me_floor)
    except ValueError:
        code = None
    ws = _Workspace(
        spec=spec, sol=sol, charge=charge, flux=flux, i1=i1,
        omega01=omega01, code=code, scale=None,
    )
    if config.rescale_omega01 is not None:
        ws = _scaled(ws, config.rescale_omega01)
    return ws


def _manifest(config: RunConfig, outdir: str, extras: dict, outputs: list[str]) -> None:
    manifest = {
        "toolkit": "nmon",
        "version": __version__,
        "task": config.task,
        "config": config.resolved,
        "outputs": sorted(os.path.basename(path) for path in outputs),
    }
    manifest.update(extras)
    write_manifest(outdir, manifest)


def _workspace_extras(ws: _Workspace) -> dict:
    extras = {
        "circuit_solved": asdict(ws.spec),
        "cutoff": ws.sol.cutoff,
        "converged": bool(ws.sol.converged),
        "omega01": ws.omega01,
        "scale_applied": ws.scale,
    }
    if ws.code is not None:
        extras["code_space"] = {
            "i0": ws.code.i0, "i1": ws.code.i1, "i2": ws.code.i2,
            "omega01": ws.code.omega01, "alpha_r": ws.code.alpha_r,
        }
    return extras


def _run_spectrum(config: RunConfig, outdir: str) -> None:
    ws = _solve(config)
    rows = [
        (level, float(ws.sol.energies[level]), float(ws.sol.parity[level]))
        for level in range(len(ws.sol.energies))
    ]
    path = write_table(outdir, "spectrum", ["level", "energy_ghz", "parity"],
                       rows, config.output.format)
    _manifest(config, outdir, _workspace_extras(ws), [path])


def _run_sweep(config: RunConfig, outdir: str) -> None:
    ws = _solve(config)
    grid = np.linspace(
        config.sweep.start, config.sweep.stop, config.sweep.points,
        endpoint=config.sweep.endpoint,
    )
    result = sweep_parameter(
        ws.spec, config.sweep.param, grid,
        levels=config.levels, tol=config.tol, me_floor=config.me_floor,
    )
    header = (
        ["param_value"]
        + [f"E_{k}" for k in range(config.levels)]
        + ["omega01", "alpha_r", "me_charge_01", "me_flux_01"]
    )
    rows = [
        [float(result.grid[k])]
        + [float(e) for e in result.energies[k]]
        + [float(result.omega01[k]), float(result.alpha_r[k]),
           float(result.me_charge_01[k]), float(result.me_flux_01[k])]
        for k in range(result.n_points)
    ]
    path = write_table(outdir, "sweep", header, rows, config.output.format)
    extras = _workspace_extras(ws)
    extras["sweep_cutoff"] = result.cutoff
    _manifest(config, outdir, extras, [path])


def _run_phase_diagram(config: RunConfig, outdir: str) -> None:
    d = config.diagram
    beta = np.linspace(d.beta_start, d.beta_stop, d.beta_points)
    eta = np.linspace(d.eta_start, d.eta_stop, d.eta_points)
    circuit = config.circuit
    diagram = phase_diagram(
        circuit.n_arm, circuit.m_arm, circuit.kappa, beta, eta,
        phi_ext=circuit.phi_ext, ng=circuit.ng,
        levels=config.levels, tol=config.tol, me_floor=config.me_floor,
    )
    header = ["beta", "eta", "alpha_r", "me_charge_01", "me_flux_01",
              "omega01_over_ec", "i1", "i2", "converged"]
    rows = []
    for i, b in enumerate(beta):
        for j, e in enumerate(eta):
            rows.append([
                float(b), float(e), float(diagram.alpha_r[i, j]),
                float(diagram.me_charge_01[i, j]), float(diagram.me_flux_01[i, j]),
                float(diagram.omega01_over_ec[i, j]),
                int(diagram.i1[i, j]), int(diagram.i2[i, j]),
                bool(diagram.converged[i, j]),
            ])
    path = write_table(outdir, "phase_diagram", header, rows, config.output.format)
    cut_lo = initial_cutoff(circuit.replace(ej_n=float(beta.min()), ej_m=float(eta.min()), ec=1.0))
    cut_hi = initial_cutoff(circuit.replace(ej_n=float(beta.max()), ej_m=float(eta.max()), ec=1.0))
    extras = {
        "circuit_solved": asdict(circuit),
        "initial_cutoff_range": [cut_lo, cut_hi],
        "workers": int(os.environ.get(WORKERS_ENV, "1")),
    }
    _manifest(config, outdir, extras, [path])


def _run_matrix_elements(config: RunConfig, outdir: str) -> None:
    ws = _solve(config)
    if ws.code is None:
        raise RuntimeError(
            "code-space selection starved; matrix-element table has no qubit reference"
        )
    normalize = config.matrix_elements.normalize
    rows = []
    for table in (
        matrix_element_table(ws.charge, ws.code, normalize=normalize),
        matrix_element_table(ws.flux, ws.code, normalize=normalize),
    ):
        size = table.values.shape[0]
        for i in range(size):
            for j in range(size):
                rows.append([table.channel, i, j, float(table.values[i, j]), normalize])
    path = write_table(outdir, "me_table",
                       ["channel", "i", "j", "abs_value", "normalized"],
                       rows, config.output.format)
    _manifest(config, outdir, _workspace_extras(ws), [path])


def _run_rabi(config: RunConfig, outdir: str) -> None:
    ws = _solve(config)
    r = config.rabi
    frequency = r.frequency if r.frequency is not None else ws.omega01
    protocol = DriveProtocol(
        amplitude=r.amplitude, frequency=frequency, duration=r.duration,
        phase=r.phase, envelope=r.envelope, ramp_ns=r.ramp_ns,
    )
    traj = simulate_drive(
        ws.spec, ws.sol, ws.flux, protocol,
        initial=r.initial_level, levels=config.levels, step=r.step,
    )
    levels = traj.populations.shape[1]
    header = ["t_ns"] + [f"pop_{k}" for k in range(levels)] + ["norm"]
    norms = traj.norms
    rows = [
        [float(traj.times[k])] + [float(p) for p in traj.populations[k]] + [float(norms[k])]
        for k in range(len(traj.times))
    ]
    path = write_table(outdir, "trajectory", header, rows, config.output.format)
    extras = _workspace_extras(ws)
    extras["drive"] = {
        "amplitude": r.amplitude, "frequency": frequency, "duration": r.duration,
        "phase": r.phase, "envelope": r.envelope, "ramp_ns": r.ramp_ns,
        "initial_level": r.initial_level,
        "step": float(traj.times[1] - traj.times[0]),
        "max_norm_drift": traj.max_norm_drift,
    }
    _manifest(config, outdir, extras, [path])


def _run_kappa_null(config: RunConfig, outdir: str) -> None:
    ws = _solve(config)
    kappa_star = find_kappa_null(config.circuit, levels=config.levels, tol=config.tol)

    def objective(kappa: float) -> float:
        flux_op = build_d_flux(config.circuit.replace(kappa=kappa), ws.sol.cutoff)
        element = ws.sol.states[:, 0].conj() @ (flux_op.entries @ ws.sol.states[:, ws.i1])
        return abs(complex(element)) / ws.omega01

    rows = [[float(kappa_star), objective(float(kappa_star)), objective(0.5)]]
    path = write_table(outdir, "kappa_null",
                       ["kappa_star", "me_flux_01_at_star", "me_flux_01_at_half"],
                       rows, config.output.format)
    _manifest(config, outdir, _workspace_extras(ws), [path])


def _run_threshold(config: RunConfig, outdir: str) -> None:
    ws = _solve(config)
    t = config.threshold
    frequency = t.frequency if t.frequency is not None else ws.omega01
    horizon = t.horizon
    if horizon is None:
        horizon = default_inversion_horizon(ws.sol, ws.flux, frequency, config.levels)
    amplitude = inversion_threshold(
        ws.spec, ws.sol, ws.flux, frequency=frequency,
        horizon=horizon, target_pop=t.target_pop, levels=config.levels,
    )
    rows = [[float(amplitude), float(frequency), float(horizon), float(t.target_pop)]]
    path = write_table(outdir, "threshold",
                       ["amplitude", "frequency_ghz", "horizon_ns", "target_pop"],
                       rows, config.output.format)
    _manifest(config, outdir, _workspace_extras(ws), [path])


_RUNNERS = {
    "spectrum": _run_spectrum,
    "sweep": _run_sweep,
    "phase-diagram": _run_phase_diagram,
    "matrix-elements": _run_matrix_elements,
    "rabi": _run_rabi,
    "kappa-null": _run_kappa_null,
    "threshold": _run_threshold,
}


def run(config: RunConfig) -> str:
    """Execute a validated run configuration; returns the output directory."""
    outdir = config.output.directory
    os.makedirs(outdir, exist_ok=True)
    _RUNNERS[config.task](config, outdir)
    return outdir


def _error_record(exc: Exception, exit_code: int) -> dict:
    return {
        "error": type(exc).__name__,
        "message": str(exc),
        "exit_code": exit_code,
    }


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="nmon",
        description="Charge-basis toolkit for two-arm junction-array qubits.",
    )
    parser.add_argument("--version", action="version", version=f"nmon {__version__}")
    sub = parser.add_subparsers(dest="task", required=True)
    for task in TASKS:
        p = sub.add_parser(task, help=f"run the {task} task")
        p.add_argument("--config", required=True, help="configuration file (.conf or manifest.json)")
        p.add_argument("--out", help="output directory (overrides output.directory)")
        p.add_argument("--format", choices=("csv", "json"), help="output format override")
        p.add_argument(
            "--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
            help="override a config value (repeatable; flags win over the file)",
        )
    args = parser.parse_args(argv)

    overrides = list(args.set)
    if args.out:
        overrides.append(f"output.directory={args.out}")
    if args.format:
        overrides.append(f"output.format={args.format}")

    try:
        config = load_config_file(args.config, task=args.task, overrides=overrides)
    except (ConfigError, OSError, json.JSONDecodeError) as exc:
        print(json.dumps(_error_record(exc, 1)), file=sys.stderr)
        return 1

    try:
        outdir = run(config)
    except Exception as exc:  # numerical failures carry exit code 2
        record = _error_record(exc, 2)
        print(json.dumps(record), file=sys.stderr)
        try:
            if os.path.isdir(config.output.directory):
                with open(os.path.join(config.output.directory, "error.json"), "w",
                          encoding="utf-8") as handle:
                    json.dump(record, handle, indent=1)
        except OSError:
            pass
        return 2

    print(outdir)
    return 0


if __name__ == "__main__":
    sys.exit(main())
