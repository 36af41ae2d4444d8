"""Parameter-space exploration: 1D sweeps, phase diagrams, flux-null search.

All diagrams run in dimensionless mode (charging energy fixed to 1);
physical frequencies are recovered at reporting time by rescaling.  A 1D
sweep converges the charge cutoff once at the first grid point and reuses
it everywhere: the swept parameters (offset charge, flux, capacitance
ratio) do not change the Josephson-to-charging ratios that set the
required cutoff, and a common basis keeps tiny dispersion measurements
free of truncation jumps.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .circuit import CircuitSpec, build_d_flux, build_d_ng, build_hamiltonian
from .metrics import (
    DEFAULT_L_MAX,
    DEFAULT_ME_FLOOR,
    matrix_element_table,
    select_code_space,
    select_i1,
)
from .spectral import EigenSolution, converged_solution, diagonalize, to_eigenbasis

__all__ = [
    "SweepResult",
    "PhaseDiagram",
    "sweep_parameter",
    "charge_dispersion",
    "phase_diagram",
    "find_kappa_null",
    "flux_null_kappa",
    "null_line_eta_intercept",
]

SWEEPABLE = ("ng", "phi_ext", "kappa")

WORKERS_ENV = "NMON_WORKERS"


@dataclass(frozen=True)
class SweepResult:
    """Per-grid-point spectra and qubit metrics along one parameter axis.

    Metric entries are NaN (with index -1) where the code-space selection
    has no coupled leakage candidate, e.g. in the free-charge limit.
    """

    param: str
    grid: np.ndarray
    energies: np.ndarray
    omega01: np.ndarray
    alpha_r: np.ndarray
    me_charge_01: np.ndarray
    me_flux_01: np.ndarray
    me_charge_12: np.ndarray
    me_flux_12: np.ndarray
    i1: np.ndarray
    i2: np.ndarray
    cutoff: int

    @property
    def n_points(self) -> int:
        return len(self.grid)


@dataclass(frozen=True)
class PhaseDiagram:
    """Qubit metrics on a (beta, eta) grid at fixed geometry and flux."""

    n_arm: int
    m_arm: int
    kappa: float
    beta_grid: np.ndarray
    eta_grid: np.ndarray
    alpha_r: np.ndarray
    me_charge_01: np.ndarray
    me_flux_01: np.ndarray
    omega01_over_ec: np.ndarray
    omega12_over_ec: np.ndarray
    i1: np.ndarray
    i2: np.ndarray
    converged: np.ndarray


def _validate_grid(grid: np.ndarray, name: str) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError(f"{name} must be a nonempty 1D grid")
    if grid.size > 1:
        steps = np.diff(grid)
        if not (np.all(steps > 0) or np.all(steps < 0)):
            raise ValueError(f"{name} must be strictly monotone")
    return grid


@dataclass(frozen=True)
class _PointMetrics:
    omega01: float
    omega12: float
    alpha_r: float
    me_charge_01: float
    me_flux_01: float
    me_charge_12: float
    me_flux_12: float
    i1: int
    i2: int


def _point_metrics(
    spec: CircuitSpec,
    sol: EigenSolution,
    levels: int,
    me_floor: float,
) -> _PointMetrics:
    """Code-space metrics for one solved point; NaNs where selection starves."""
    charge = to_eigenbasis(build_d_ng(spec, sol.cutoff), sol, levels, channel="charge")
    flux = to_eigenbasis(build_d_flux(spec, sol.cutoff), sol, levels, channel="flux")
    i1 = select_i1(sol, charge, l_max=levels)
    omega01 = float(sol.energies[i1] - sol.energies[0])
    try:
        code = select_code_space(sol, charge, l_max=levels, me_floor=me_floor)
    except ValueError:
        return _PointMetrics(
            omega01, np.nan, np.nan, np.nan, np.nan, np.nan, np.nan, i1, -1
        )
    mc = matrix_element_table(charge, code, normalize=True)
    mf = matrix_element_table(flux, code, normalize=True)
    omega12 = float(sol.energies[code.i2] - sol.energies[code.i1])
    return _PointMetrics(
        omega01=code.omega01,
        omega12=omega12,
        alpha_r=code.alpha_r,
        me_charge_01=float(mc.values[0, code.i1]),
        me_flux_01=float(mf.values[0, code.i1]),
        me_charge_12=float(mc.values[code.i1, code.i2]),
        me_flux_12=float(mf.values[code.i1, code.i2]),
        i1=code.i1,
        i2=code.i2,
    )


def sweep_parameter(
    spec: CircuitSpec,
    param: str,
    grid,
    levels: int = DEFAULT_L_MAX,
    tol: float = 1e-10,
    me_floor: float = DEFAULT_ME_FLOOR,
) -> SweepResult:
    """Converged spectra and metrics as one circuit parameter varies."""
    if param not in SWEEPABLE:
        raise ValueError(f"param must be one of {SWEEPABLE}, got {param!r}")
    grid = _validate_grid(grid, "grid")

    first = spec.replace(**{param: float(grid[0])})
    base = converged_solution(first, levels, tol=tol)
    cutoff = base.cutoff

    n = grid.size
    energies = np.empty((n, levels))
    omega01 = np.empty(n)
    alpha_r = np.empty(n)
    me_c01 = np.empty(n)
    me_f01 = np.empty(n)
    me_c12 = np.empty(n)
    me_f12 = np.empty(n)
    i1 = np.empty(n, dtype=int)
    i2 = np.empty(n, dtype=int)

    for k, value in enumerate(grid):
        point = spec.replace(**{param: float(value)})
        sol = base if k == 0 else diagonalize(build_hamiltonian(point, cutoff), levels)
        energies[k] = sol.energies
        m = _point_metrics(point, sol, levels, me_floor)
        omega01[k], alpha_r[k] = m.omega01, m.alpha_r
        me_c01[k], me_f01[k] = m.me_charge_01, m.me_flux_01
        me_c12[k], me_f12[k] = m.me_charge_12, m.me_flux_12
        i1[k], i2[k] = m.i1, m.i2

    return SweepResult(
        param=param, grid=grid, energies=energies, omega01=omega01,
        alpha_r=alpha_r, me_charge_01=me_c01, me_flux_01=me_f01,
        me_charge_12=me_c12, me_flux_12=me_f12, i1=i1, i2=i2, cutoff=cutoff,
    )


def charge_dispersion(spec: CircuitSpec, points: int = 41, levels: int = DEFAULT_L_MAX) -> float:
    """Peak-to-peak qubit-frequency variation over one offset-charge period,
    relative to the mean qubit frequency."""
    grid = spec.ng + np.linspace(0.0, 1.0, points)
    base = converged_solution(spec.replace(ng=float(grid[0])), levels)
    cutoff = base.cutoff
    w01 = np.empty(points)
    for k, value in enumerate(grid):
        point = spec.replace(ng=float(value))
        sol = base if k == 0 else diagonalize(build_hamiltonian(point, cutoff), levels)
        charge = to_eigenbasis(build_d_ng(point, cutoff), sol, levels, channel="charge")
        i1 = select_i1(sol, charge, l_max=levels)
        w01[k] = sol.energies[i1] - sol.energies[0]
    return float((w01.max() - w01.min()) / w01.mean())


def _diagram_cell(args) -> tuple:
    n_arm, m_arm, kappa, beta, eta, phi_ext, ng, levels, tol, me_floor = args
    spec = CircuitSpec(n_arm, m_arm, beta, eta, 1.0, kappa=kappa, ng=ng, phi_ext=phi_ext)
    try:
        sol = converged_solution(spec, levels, tol=tol)
        m = _point_metrics(spec, sol, levels, me_floor)
    except Exception:
        return (np.nan, np.nan, np.nan, np.nan, np.nan, -1, -1, False)
    ok = bool(sol.converged) and m.i2 >= 0
    return (
        m.alpha_r, m.me_charge_01, m.me_flux_01, m.omega01, m.omega12,
        m.i1, m.i2, ok,
    )


def phase_diagram(
    n_arm: int,
    m_arm: int,
    kappa: float,
    beta_grid,
    eta_grid,
    *,
    phi_ext: float = 0.0,
    ng: float = 0.0,
    levels: int = DEFAULT_L_MAX,
    tol: float = 1e-10,
    me_floor: float = DEFAULT_ME_FLOOR,
    workers: int | None = None,
) -> PhaseDiagram:
    """Qubit metrics over a dimensionless (beta, eta) grid.

    Cells are independent; ``workers`` (default: the NMON_WORKERS
    environment variable, else serial) fans them out over processes.
    Failed or unconverged cells carry NaN metrics and a cleared flag
    rather than aborting the sweep.
    """
    beta_grid = _validate_grid(beta_grid, "beta_grid")
    eta_grid = _validate_grid(eta_grid, "eta_grid")
    for name, grid in (("beta_grid", beta_grid), ("eta_grid", eta_grid)):
        if grid.min() < 0 or grid.max() > 500:
            raise ValueError(f"{name} must lie within [0, 500]")

    if workers is None:
        workers = int(os.environ.get(WORKERS_ENV, "1"))

    jobs = [
        (n_arm, m_arm, kappa, float(beta), float(eta), phi_ext, ng, levels, tol, me_floor)
        for beta in beta_grid
        for eta in eta_grid
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_diagram_cell, jobs, chunksize=8))
    else:
        results = [_diagram_cell(job) for job in jobs]

    shape = (beta_grid.size, eta_grid.size)
    cols = list(zip(*results))
    alpha_r = np.array(cols[0]).reshape(shape)
    me_c01 = np.array(cols[1]).reshape(shape)
    me_f01 = np.array(cols[2]).reshape(shape)
    w01 = np.array(cols[3]).reshape(shape)
    w12 = np.array(cols[4]).reshape(shape)
    i1 = np.array(cols[5], dtype=int).reshape(shape)
    i2 = np.array(cols[6], dtype=int).reshape(shape)
    converged = np.array(cols[7], dtype=bool).reshape(shape)
    return PhaseDiagram(
        n_arm=n_arm, m_arm=m_arm, kappa=kappa,
        beta_grid=beta_grid, eta_grid=eta_grid,
        alpha_r=alpha_r, me_charge_01=me_c01, me_flux_01=me_f01,
        omega01_over_ec=w01, omega12_over_ec=w12,
        i1=i1, i2=i2, converged=converged,
    )


def _normalized_flux_element(spec: CircuitSpec, levels: int, tol: float) -> float:
    sol = converged_solution(spec, levels, tol=tol)
    charge = to_eigenbasis(build_d_ng(spec, sol.cutoff), sol, levels, channel="charge")
    flux = to_eigenbasis(build_d_flux(spec, sol.cutoff), sol, levels, channel="flux")
    i1 = select_i1(sol, charge, l_max=levels)
    omega01 = float(sol.energies[i1] - sol.energies[0])
    return float(abs(flux.entries[0, i1])) / omega01


_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


def find_kappa_null(
    spec: CircuitSpec,
    levels: int = DEFAULT_L_MAX,
    tol: float = 1e-10,
    kappa_tol: float = 1e-4,
) -> float:
    """Capacitance ratio minimizing the normalized flux element to level i1.

    At zero external flux the eigenstates do not depend on kappa and the
    flux-derivative operator is exactly linear in it, so the minimizer of
    the element over [0, 1] follows in closed form.  Away from zero flux
    an 11-point scan over [0, 1] locates a unimodal bracket which is then
    narrowed by golden-section search; if the scan minimum sits on the
    boundary, the boundary value is returned.
    """
    if spec.phi_ext == 0.0:
        sol = converged_solution(spec, levels, tol=tol)
        charge = to_eigenbasis(build_d_ng(spec, sol.cutoff), sol, levels, channel="charge")
        i1 = select_i1(sol, charge, l_max=levels)
        v0, v1 = sol.states[:, 0], sol.states[:, i1]
        ends = [
            complex(v0.conj() @ (build_d_flux(spec.replace(kappa=k), sol.cutoff).entries @ v1)).imag
            for k in (0.0, 1.0)
        ]
        a0, a1 = ends
        if a0 == a1:
            return 0.5
        return float(min(1.0, max(0.0, a0 / (a0 - a1))))

    def objective(kappa: float) -> float:
        return _normalized_flux_element(spec.replace(kappa=kappa), levels, tol)

    scan = np.linspace(0.0, 1.0, 11)
    values = [objective(float(k)) for k in scan]
    best = int(np.argmin(values))
    if best in (0, len(scan) - 1):
        return float(scan[best])

    lo, hi = float(scan[best - 1]), float(scan[best + 1])
    x1 = hi - _GOLDEN * (hi - lo)
    x2 = lo + _GOLDEN * (hi - lo)
    f1, f2 = objective(x1), objective(x2)
    while hi - lo > kappa_tol:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _GOLDEN * (hi - lo)
            f1 = objective(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _GOLDEN * (hi - lo)
            f2 = objective(x2)
    return float((lo + hi) / 2.0)


def flux_null_kappa(
    n_arm: int,
    m_arm: int,
    beta: float,
    eta: float,
    *,
    levels: int = DEFAULT_L_MAX,
    tol: float = 1e-10,
) -> float:
    """Exact capacitance ratio where the 0 -> i1 flux element vanishes at zero flux.

    With no external flux the eigenstates do not depend on kappa and the
    flux-derivative operator is linear in it, so the null follows from the
    elements of the two arm contributions alone.  Returns NaN when the two
    contributions cannot cancel.
    """
    spec = CircuitSpec(n_arm, m_arm, beta, eta, 1.0, kappa=0.5, ng=0.0, phi_ext=0.0)
    sol = converged_solution(spec, levels, tol=tol)
    charge = to_eigenbasis(build_d_ng(spec, sol.cutoff), sol, levels, channel="charge")
    i1 = select_i1(sol, charge, l_max=levels)
    v0, v1 = sol.states[:, 0], sol.states[:, i1]
    e0 = complex(v0.conj() @ (build_d_flux(spec.replace(kappa=0.0), sol.cutoff).entries @ v1))
    e1 = complex(v0.conj() @ (build_d_flux(spec.replace(kappa=1.0), sol.cutoff).entries @ v1))
    # element(kappa) = (1 - kappa) e0 + kappa e1, purely imaginary at zero flux
    a0, a1 = e0.imag, e1.imag
    if a0 == a1:
        return np.nan
    return float(a0 / (a0 - a1))


def null_line_eta_intercept(
    n_arm: int,
    m_arm: int,
    beta: float,
    kappa: float,
    eta_grid,
    *,
    levels: int = DEFAULT_L_MAX,
    tol: float = 1e-10,
) -> float:
    """Second-arm energy ratio at which the flux-element null line crosses
    the given capacitance ratio, at fixed beta and zero flux.

    Scans the grid for a sign change of ``flux_null_kappa - kappa`` and
    interpolates linearly; raises if the null line does not cross inside
    the grid.
    """
    eta_grid = _validate_grid(eta_grid, "eta_grid")
    nulls = np.array(
        [flux_null_kappa(n_arm, m_arm, beta, float(eta), levels=levels, tol=tol)
         for eta in eta_grid]
    )
    offset = nulls - kappa
    for k in range(len(eta_grid) - 1):
        if np.isnan(offset[k]) or np.isnan(offset[k + 1]):
            continue
        if offset[k] == 0.0:
            return float(eta_grid[k])
        if offset[k] * offset[k + 1] < 0:
            frac = offset[k] / (offset[k] - offset[k + 1])
            return float(eta_grid[k] + frac * (eta_grid[k + 1] - eta_grid[k]))
    raise ValueError(
        f"flux-element null line does not cross kappa={kappa} for eta in "
        f"[{eta_grid[0]}, {eta_grid[-1]}] at beta={beta}"
    )
