"""Toolkit for two-arm Josephson-junction-array qubit circuits.

Models a family of superconducting circuits made of two parallel
junction arrays via exact diagonalization in the charge basis and
computes the figures of merit used in qubit design: relative
anharmonicity, charge- and flux-noise matrix elements, parameter
dispersion, and flux-driven population dynamics.
"""

from .circuit import (
    ChargeOperator,
    CircuitSpec,
    build_d_flux,
    build_d_ng,
    build_hamiltonian,
    fluxonium,
    nmon,
    preset,
    split_transmon,
    transmon,
)
from .spectral import (
    EigenSolution,
    EigenbasisOperator,
    converged_solution,
    diagonalize,
    to_eigenbasis,
)
from .metrics import (
    CodeSpace,
    MatrixElementTable,
    code_space_from_indices,
    matrix_element_table,
    relative_anharmonicity,
    rescale_to_frequency,
    select_code_space,
    transition_rate,
)

__version__ = "0.1.0"

__all__ = [
    "ChargeOperator",
    "CircuitSpec",
    "CodeSpace",
    "EigenSolution",
    "EigenbasisOperator",
    "MatrixElementTable",
    "build_d_flux",
    "build_d_ng",
    "build_hamiltonian",
    "code_space_from_indices",
    "converged_solution",
    "diagonalize",
    "fluxonium",
    "matrix_element_table",
    "nmon",
    "preset",
    "relative_anharmonicity",
    "rescale_to_frequency",
    "select_code_space",
    "split_transmon",
    "to_eigenbasis",
    "transition_rate",
    "transmon",
    "__version__",
]
