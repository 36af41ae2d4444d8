"""Code-space selection, anharmonicity, noise matrix elements, rates.

The computational code space is picked from the tracked spectrum: the
ground state is always level 0, level ``i1`` is the low-lying excited
state with the strongest charge-channel coupling to the ground state, and
the leakage level ``i2`` is the state whose transition frequency from
``i1`` is closest to the qubit frequency, skipping states whose coupling
to ``i1`` falls below a configurable floor (those are unreachable by the
drive and irrelevant for leakage).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .circuit import CircuitSpec
from .spectral import CHANNELS, EigenSolution, EigenbasisOperator

__all__ = [
    "CodeSpace",
    "MatrixElementTable",
    "select_code_space",
    "code_space_from_indices",
    "relative_anharmonicity",
    "matrix_element_table",
    "transition_rate",
    "rescale_to_frequency",
    "RATE_PREFACTOR",
]

DEFAULT_L_MAX = 8
DEFAULT_ME_FLOOR = 1e-6

# Golden-rule prefactor for energies stored as frequencies (GHz) and a
# two-sided spectral density in (parameter units)^2 * ns evaluated at
# angular frequency in rad/ns: rate [1/ns] = (2*pi)^2 * me^2 * S(omega).
RATE_PREFACTOR = (2.0 * np.pi) ** 2


@dataclass(frozen=True)
class CodeSpace:
    """Selected computational levels and derived qubit figures of merit."""

    i0: int
    i1: int
    i2: int
    omega01: float
    alpha_r: float


@dataclass(frozen=True)
class MatrixElementTable:
    """Absolute transition matrix elements per noise channel.

    ``values[u, v] = |<u| dH/dlambda |v>|`` over the tracked levels,
    divided by the qubit frequency when ``normalized`` is true.  Diagonal
    entries are the energy-level slopes with respect to the parameter.
    """

    channel: str
    values: np.ndarray
    normalized: bool

    def __post_init__(self) -> None:
        if self.channel not in CHANNELS:
            raise ValueError(f"channel must be one of {CHANNELS}, got {self.channel!r}")


def select_i1(sol: EigenSolution, table: EigenbasisOperator, l_max: int = DEFAULT_L_MAX) -> int:
    """Excited level with the largest coupling to the ground state.

    Ties (including the all-zero coupling row) resolve to the lowest index.
    """
    n_levels = min(l_max, sol.n_levels, table.n_levels)
    if n_levels < 2:
        raise ValueError("need at least two tracked levels to pick a qubit level")
    row = np.abs(table.entries[0, 1:n_levels])
    return int(np.argmax(row)) + 1


def code_space_from_indices(sol: EigenSolution, i1: int, i2: int) -> CodeSpace:
    """Build a code space from explicit level indices."""
    if not 0 < i1 < sol.n_levels:
        raise ValueError(f"i1 must be within [1, {sol.n_levels - 1}], got {i1}")
    if i2 in (0, i1) or not 0 <= i2 < sol.n_levels:
        raise ValueError(f"i2 must be a tracked level distinct from 0 and {i1}, got {i2}")
    energies = sol.energies
    omega01 = float(energies[i1] - energies[0])
    if omega01 <= 0.0:
        raise ValueError(f"qubit frequency must be positive, got {omega01}")
    omega12 = float(energies[i2] - energies[i1])
    return CodeSpace(
        i0=0, i1=i1, i2=i2, omega01=omega01, alpha_r=(omega12 - omega01) / omega01
    )


def select_code_space(
    sol: EigenSolution,
    table: EigenbasisOperator,
    l_max: int = DEFAULT_L_MAX,
    me_floor: float = DEFAULT_ME_FLOOR,
) -> CodeSpace:
    """Pick the computational levels (0, i1, i2) from the tracked spectrum.

    ``table`` is the charge-channel operator by default; passing the flux
    operator switches the selection channel.  ``me_floor`` is in units of
    the qubit frequency: leakage candidates whose coupling to ``i1`` falls
    below ``me_floor * omega01`` are skipped.
    """
    n_levels = min(l_max, sol.n_levels, table.n_levels)
    i1 = select_i1(sol, table, l_max=n_levels)
    energies = sol.energies
    omega01 = float(energies[i1] - energies[0])
    if omega01 <= 0.0:
        raise ValueError(f"qubit frequency must be positive, got {omega01}")

    floor = me_floor * omega01
    candidates = []
    for n in range(n_levels):
        if n in (0, i1):
            continue
        coupling = abs(table.entries[i1, n])
        if coupling <= floor:
            continue
        distance = abs(abs(float(energies[n] - energies[i1])) - omega01)
        candidates.append((distance, coupling, n))
    if not candidates:
        raise ValueError(
            f"code-space selection starved: no leakage candidate couples to "
            f"level {i1} above {me_floor:g} * omega01 in the {table.channel} channel"
        )

    best = min(candidates, key=lambda c: c[0])
    tie_tol = 1e-9 * omega01
    tied = [c for c in candidates if c[0] - best[0] <= tie_tol]
    # Equidistant candidates: prefer the more strongly coupled, then the lower level.
    tied.sort(key=lambda c: (-c[1], c[2]))
    i2 = tied[0][2]
    return code_space_from_indices(sol, i1, i2)


def relative_anharmonicity(sol: EigenSolution, code: CodeSpace) -> float:
    """Fractional detuning of the i1 -> i2 transition from the qubit frequency."""
    energies = sol.energies
    omega01 = float(energies[code.i1] - energies[code.i0])
    if omega01 == 0.0:
        raise ValueError("qubit frequency is zero; anharmonicity undefined")
    omega12 = float(energies[code.i2] - energies[code.i1])
    return (omega12 - omega01) / omega01


def matrix_element_table(
    op: EigenbasisOperator,
    code: CodeSpace,
    normalize: bool = True,
) -> MatrixElementTable:
    """Absolute-value table of the projected operator, optionally per qubit frequency."""
    values = np.abs(op.entries)
    if normalize:
        if code.omega01 <= 0.0:
            raise ValueError("cannot normalize by a nonpositive qubit frequency")
        values = values / code.omega01
    return MatrixElementTable(channel=op.channel, values=values, normalized=normalize)


def transition_rate(
    me: float,
    spectral_density: Callable[[float], float],
    omega: float,
) -> float:
    """Golden-rule transition rate in 1/ns.

    ``me`` is the raw matrix element in GHz, ``spectral_density`` the
    two-sided noise spectral density in (parameter units)^2 * ns as a
    function of angular frequency in rad/ns, and ``omega`` the angular
    transition frequency (2*pi times the transition frequency in GHz).
    """
    if me < 0.0:
        raise ValueError(f"matrix element must be nonnegative, got {me}")
    density = float(spectral_density(omega))
    if density < 0.0:
        raise ValueError(f"spectral density must be nonnegative, got {density} at {omega}")
    return RATE_PREFACTOR * me * me * density


def rescale_to_frequency(
    spec: CircuitSpec,
    sol: EigenSolution,
    code: CodeSpace,
    target: float,
) -> CircuitSpec:
    """Scale all circuit energies so the qubit frequency equals ``target`` GHz.

    Leaves the energy ratios, the code-space indices, the relative
    anharmonicity and all normalized matrix elements unchanged.
    """
    if target <= 0.0:
        raise ValueError(f"target frequency must be positive, got {target}")
    omega01 = float(sol.energies[code.i1] - sol.energies[code.i0])
    if omega01 <= 0.0:
        raise ValueError(f"qubit frequency must be positive, got {omega01}")
    scale = target / omega01
    return spec.replace(
        ej_n=spec.ej_n * scale, ej_m=spec.ej_m * scale, ec=spec.ec * scale
    )
