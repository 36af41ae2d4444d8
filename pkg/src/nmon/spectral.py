"""Dense diagonalization with truncation control and eigenbasis transforms.

The solver applies a fixed phase convention (largest-magnitude component
of each eigenvector real and positive) and a deterministic tie-break for
degenerate levels so that downstream matrix-element tables are bit-stable
across runs.  For charge-parity-symmetric Hamiltonians (zero flux phases
and zero offset charge) the matrix is diagonalized in the even and odd
parity sectors separately, which keeps degenerate well doublets exactly
parity-pure instead of arbitrarily mixed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .circuit import ChargeOperator, CircuitSpec, build_hamiltonian

__all__ = [
    "EigenSolution",
    "EigenbasisOperator",
    "diagonalize",
    "converged_solution",
    "to_eigenbasis",
]

CHANNELS = ("charge", "flux")

# Energies closer than this (relative to the spectral scale) are treated
# as degenerate for ordering purposes.
_TIE_RTOL = 1e-13

_MAX_DOUBLINGS = 6


@dataclass(frozen=True)
class EigenSolution:
    """Lowest eigenpairs of a charge-basis operator.

    ``energies`` are ascending, in the same units as the operator.
    ``states`` holds the eigenvectors as columns in the charge basis.
    ``parity`` is the charge-reflection expectation ``<v|P|v>`` per level
    (exactly +/-1 when the operator commutes with parity).
    """

    energies: np.ndarray
    states: np.ndarray
    cutoff: int
    converged: bool
    parity: np.ndarray

    @property
    def n_levels(self) -> int:
        return len(self.energies)


@dataclass(frozen=True)
class EigenbasisOperator:
    """Derivative operator projected onto the lowest eigenstates."""

    entries: np.ndarray
    channel: str

    def __post_init__(self) -> None:
        if self.channel not in CHANNELS:
            raise ValueError(f"channel must be one of {CHANNELS}, got {self.channel!r}")
        dev = float(np.max(np.abs(self.entries - self.entries.conj().T)))
        scale = max(1.0, float(np.max(np.abs(self.entries))))
        if dev > 1e-10 * scale:
            raise ValueError(
                f"eigenbasis operator not Hermitian: deviation {dev:.3e}"
            )

    @property
    def n_levels(self) -> int:
        return self.entries.shape[0]


def _is_parity_symmetric(h: np.ndarray) -> bool:
    """True when the matrix commutes with charge reflection n -> -n."""
    if np.any(h.imag != 0.0):
        return False
    hr = h.real
    return np.array_equal(hr, hr[::-1, ::-1])


_GAUGE_PHASE_TOL = 1e-13


def _real_gauge_angle(h: np.ndarray) -> float | None:
    """Angle theta such that diag(e^{-i theta k}) h diag(e^{i theta k}) is real.

    Covers banded matrices whose off-diagonal phases are constant within
    each band, which includes every operator built by this package.
    Returns 0.0 for already-real matrices and None when no such gauge
    rotation exists.
    """
    if not np.any(h.imag != 0.0):
        return 0.0
    dim = h.shape[0]
    bands: list[tuple[int, float]] = []
    for k in range(1, dim):
        diag = np.diagonal(h, k)
        nonzero = diag[diag != 0.0]
        if nonzero.size == 0:
            continue
        phases = np.angle(nonzero)
        ref = phases[0]
        if np.max(np.abs(np.sin(phases - ref))) > _GAUGE_PHASE_TOL:
            return None
        bands.append((k, ref))
    if not bands:
        return None
    k0, ref0 = bands[0]
    for j in range(2 * k0):
        theta = (-ref0 + j * math.pi) / k0
        if all(
            abs(math.sin(k * theta + ref)) <= _GAUGE_PHASE_TOL for k, ref in bands
        ):
            return theta
    return None


def _eigh_parity_sectors(h: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Eigendecomposition of a parity-symmetric real matrix, sector by sector.

    Returns (energies, states, parity) over the full spectrum, unsorted
    across sectors.  Eigenvectors are exactly symmetric/antisymmetric
    under index reflection.
    """
    hr = h.real
    dim = hr.shape[0]
    k = (dim - 1) // 2
    plus = hr[k:, k:]
    minus = hr[k:, :k + 1][:, ::-1]

    h_even = plus + minus
    h_even[0, 1:] /= math.sqrt(2.0)
    h_even[1:, 0] /= math.sqrt(2.0)
    h_even[0, 0] = hr[k, k]
    h_odd = (plus - minus)[1:, 1:]

    evals_e, vecs_e = np.linalg.eigh(h_even)
    evals_o, vecs_o = np.linalg.eigh(h_odd)

    states_e = np.zeros((dim, k + 1))
    states_e[k, :] = vecs_e[0, :]
    states_e[k + 1:, :] = vecs_e[1:, :] / math.sqrt(2.0)
    states_e[:k, :] = states_e[k + 1:, :][::-1, :]

    states_o = np.zeros((dim, k))
    states_o[k + 1:, :] = vecs_o / math.sqrt(2.0)
    states_o[:k, :] = -states_o[k + 1:, :][::-1, :]

    energies = np.concatenate([evals_e, evals_o])
    states = np.concatenate([states_e, states_o], axis=1)
    parity = np.concatenate([np.ones(k + 1), -np.ones(k)])
    return energies, states, parity


def _order_with_ties(energies: np.ndarray, states: np.ndarray) -> np.ndarray:
    """Ascending order; exact near-ties broken by the index of the largest
    charge-basis component of each eigenvector."""
    order = np.argsort(energies, kind="stable")
    energies = energies[order]
    scale = max(1.0, float(np.max(np.abs(energies))))
    tie_tol = _TIE_RTOL * scale

    final = list(order)
    start = 0
    while start < len(energies):
        stop = start + 1
        while stop < len(energies) and energies[stop] - energies[stop - 1] <= tie_tol:
            stop += 1
        if stop - start > 1:
            group = final[start:stop]
            group.sort(key=lambda col: int(np.argmax(np.abs(states[:, col]))))
            final[start:stop] = group
        start = stop
    return np.asarray(final)


def _fix_phases(states: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude component of each column real and positive."""
    fixed = states.copy()
    for j in range(fixed.shape[1]):
        col = fixed[:, j]
        idx = int(np.argmax(np.abs(col)))
        pivot = col[idx]
        mag = abs(pivot)
        if mag > 0.0:
            fixed[:, j] = col * (np.conj(pivot) / mag)
    return fixed


def _parity_expectation(states: np.ndarray) -> np.ndarray:
    flipped = states[::-1, :]
    return np.real(np.sum(np.conj(flipped) * states, axis=0))


def diagonalize(op: ChargeOperator, n_levels: int) -> EigenSolution:
    """Full dense Hermitian eigendecomposition, keeping the lowest levels.

    Raises ``ValueError`` for invalid level counts and lets eigensolver
    failures surface as ``numpy.linalg.LinAlgError``.
    """
    dim = op.dim
    if not 1 <= n_levels <= dim:
        raise ValueError(f"n_levels must be within [1, {dim}], got {n_levels}")

    h = op.entries
    theta = _real_gauge_angle(h)
    sector_parity = None
    if theta is None:
        energies, states = np.linalg.eigh(h)
    else:
        if theta != 0.0:
            u = np.exp(-1j * theta * np.arange(dim))
            h_work = (h * np.outer(u, np.conj(u))).real
        else:
            h_work = h.real if np.iscomplexobj(h) else h
        if _is_parity_symmetric(h_work):
            energies, states, sector_parity = _eigh_parity_sectors(h_work)
        else:
            energies, states = np.linalg.eigh(h_work)
        if theta != 0.0:
            states = states.astype(complex) * np.exp(
                1j * theta * np.arange(dim)
            )[:, None]
            sector_parity = None

    order = _order_with_ties(energies, states)
    energies = energies[order][:n_levels]
    states = _fix_phases(states[:, order][:, :n_levels])
    if sector_parity is not None:
        parity = sector_parity[order][:n_levels]
    else:
        parity = _parity_expectation(states)

    return EigenSolution(
        energies=energies,
        states=states,
        cutoff=op.cutoff,
        converged=True,
        parity=parity,
    )


def initial_cutoff(spec: CircuitSpec) -> int:
    """Starting charge cutoff for truncation convergence.

    Scales with the junction counts (band offsets) and with the fourth
    root of the dominant Josephson-to-charging ratio; the charge support
    of the low-lying states grows like that fourth root, and the offset
    leaves room for the exponential tails.  The doubling loop in
    :func:`converged_solution` guards against underestimates.
    """
    ratio = max(spec.beta, spec.eta, 1.0)
    return max(spec.n_arm, spec.m_arm) * math.ceil(6.0 * ratio**0.25 + 10.0)


def converged_solution(
    spec: CircuitSpec,
    n_levels: int = 8,
    tol: float = 1e-10,
) -> EigenSolution:
    """Diagonalize with automatic cutoff doubling until the tracked levels settle.

    The cutoff starts at :func:`initial_cutoff` and doubles until the
    lowest ``n_levels`` energies move by less than ``tol`` times the
    tracked spectral span between successive cutoffs.  Non-convergence
    after 6 doublings is reported through ``converged=False`` rather than
    raised.
    """
    if tol <= 0.0:
        raise ValueError(f"tol must be positive, got {tol}")
    cutoff = initial_cutoff(spec)
    previous = diagonalize(build_hamiltonian(spec, cutoff), n_levels)
    current = previous
    for _ in range(_MAX_DOUBLINGS):
        cutoff *= 2
        current = diagonalize(build_hamiltonian(spec, cutoff), n_levels)
        span = float(current.energies[-1] - current.energies[0])
        scale = span if span > 0.0 else max(abs(float(current.energies[0])), 1.0)
        drift = float(np.max(np.abs(current.energies - previous.energies)))
        if drift <= tol * scale:
            # The smaller cutoff already agrees with its doubling; return it.
            return previous
        previous = current
    return EigenSolution(
        energies=current.energies,
        states=current.states,
        cutoff=current.cutoff,
        converged=False,
        parity=current.parity,
    )


def to_eigenbasis(
    d_op: ChargeOperator,
    sol: EigenSolution,
    n_levels: int | None = None,
    channel: str = "charge",
) -> EigenbasisOperator:
    """Project a charge-basis derivative operator onto the lowest eigenstates."""
    if d_op.cutoff != sol.cutoff:
        raise ValueError(
            f"cutoff mismatch: operator has {d_op.cutoff}, solution has {sol.cutoff}"
        )
    available = sol.states.shape[1]
    if n_levels is None:
        n_levels = available
    if not 1 <= n_levels <= available:
        raise ValueError(f"n_levels must be within [1, {available}], got {n_levels}")
    basis = sol.states[:, :n_levels]
    entries = basis.conj().T @ (d_op.entries @ basis)
    return EigenbasisOperator(entries=entries, channel=channel)
