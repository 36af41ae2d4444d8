"""Eigensolver contracts: ordering, phase convention, convergence, transforms."""

import numpy as np
import pytest

from nmon import (
    ChargeOperator,
    build_d_ng,
    build_hamiltonian,
    converged_solution,
    diagonalize,
    nmon,
    to_eigenbasis,
    transmon,
)


def random_hermitian(dim, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (a + a.conj().T) / 2.0


def test_diagonal_matrix_sorted_with_deterministic_ties():
    op = ChargeOperator(2, np.diag([0.96, 0.24, 0.0, 0.24, 0.96]).astype(complex))
    sol = diagonalize(op, 5)
    np.testing.assert_allclose(sol.energies, [0.0, 0.24, 0.24, 0.96, 0.96], atol=1e-15)
    # degenerate doublets resolve into parity-pure states, even before odd
    np.testing.assert_allclose(sol.parity, [1, 1, -1, 1, -1], atol=1e-14)
    again = diagonalize(op, 5)
    np.testing.assert_array_equal(sol.states, again.states)


def test_eigendecomposition_reconstruction_oracle():
    h = random_hermitian(7, seed=11)
    # symmetrize the random matrix into a valid charge operator (7 = 2*3+1)
    op = ChargeOperator(3, h)
    sol = diagonalize(op, 7)
    for i in range(7):
        residual = h @ sol.states[:, i] - sol.energies[i] * sol.states[:, i]
        assert np.linalg.norm(residual) < 1e-10 * np.linalg.norm(h)
    gram = sol.states.conj().T @ sol.states
    assert np.max(np.abs(gram - np.eye(7))) < 1e-10
    rebuilt = sol.states @ np.diag(sol.energies) @ sol.states.conj().T
    np.testing.assert_allclose(rebuilt, h, atol=1e-10)


def test_phase_convention_largest_component_real_positive():
    for seed in range(5):
        op = ChargeOperator(3, random_hermitian(7, seed=seed))
        sol = diagonalize(op, 7)
        for i in range(7):
            pivot = sol.states[np.argmax(np.abs(sol.states[:, i])), i]
            assert pivot.imag == pytest.approx(0.0, abs=1e-14)
            assert pivot.real > 0


def test_transmon_anharmonicity_anchor():
    sol = converged_solution(transmon(113.0, 1.0), 4)
    e = sol.energies
    alpha_r = ((e[2] - e[1]) - (e[1] - e[0])) / (e[1] - e[0])
    assert alpha_r == pytest.approx(-0.04, abs=0.005)


def test_physical_units_qubit_frequency():
    # the (2,3) circuit at 4.5/0.9/0.06 GHz has its qubit transition near 6.08 GHz
    sol = converged_solution(nmon(2, 3, 4.5, 0.9, 0.06, kappa=0.5), 4)
    assert sol.energies[3] - sol.energies[0] == pytest.approx(6.08, abs=0.05)


def test_free_charge_converges_immediately():
    spec = nmon(2, 3, 0.0, 0.0, 1.0)
    sol = converged_solution(spec, 8)
    assert sol.converged
    n = np.arange(-sol.cutoff, sol.cutoff + 1)
    expected = np.sort(4.0 * n.astype(float) ** 2)[:8]
    np.testing.assert_allclose(sol.energies, expected, atol=1e-12)


def test_convergence_self_consistency():
    spec = nmon(2, 3, 75.0, 15.0, 1.0)
    sol = converged_solution(spec, 8, tol=1e-10)
    assert sol.converged
    bigger = diagonalize(build_hamiltonian(spec, 2 * sol.cutoff), 8)
    span = sol.energies[-1] - sol.energies[0]
    assert np.max(np.abs(bigger.energies - sol.energies)) < 1e-10 * span


def test_parity_labels_at_symmetric_point():
    spec = nmon(2, 3, 20.0, 5.0, 1.0, ng=0.0, phi_ext=0.0)
    sol = converged_solution(spec, 8)
    assert np.all(np.abs(np.abs(sol.parity) - 1.0) < 1e-12)
    # states are exactly symmetric/antisymmetric in the charge index
    for i in range(8):
        v = sol.states[:, i]
        np.testing.assert_allclose(v, sol.parity[i] * v[::-1], atol=1e-14)


def test_to_eigenbasis_identity_and_hamiltonian():
    spec = nmon(2, 3, 10.0, 4.0, 1.0, ng=0.1, phi_ext=0.5)
    h = build_hamiltonian(spec, 20)
    sol = diagonalize(h, 6)
    ident = ChargeOperator(20, np.eye(41, dtype=complex))
    block = to_eigenbasis(ident, sol, 6)
    np.testing.assert_allclose(block.entries, np.eye(6), atol=1e-12)
    h_block = to_eigenbasis(h, sol, 6)
    np.testing.assert_allclose(h_block.entries, np.diag(sol.energies), atol=1e-10)


def test_to_eigenbasis_cutoff_mismatch():
    spec = nmon(1, 1, 5.0, 0.0, 1.0)
    sol = diagonalize(build_hamiltonian(spec, 10), 4)
    with pytest.raises(ValueError, match="cutoff"):
        to_eigenbasis(build_d_ng(spec, 11), sol, 4)


def test_dominant_ground_state_coupling_fig2_structure():
    spec = nmon(2, 3, 75.0, 15.0, 1.0)
    sol = converged_solution(spec, 8)
    table = to_eigenbasis(build_d_ng(spec, sol.cutoff), sol, 8, channel="charge")
    row = np.abs(table.entries[0, 1:])
    dominant = row[2]  # level 3
    others = np.delete(row, 2)
    # dominant by roughly three orders of magnitude (measured ratio ~9e2)
    assert dominant > 5e2 * np.max(others)


def test_n_levels_validation():
    op = ChargeOperator(2, np.eye(5, dtype=complex))
    with pytest.raises(ValueError, match="n_levels"):
        diagonalize(op, 6)
    with pytest.raises(ValueError, match="n_levels"):
        diagonalize(op, 0)
