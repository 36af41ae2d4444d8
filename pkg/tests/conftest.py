"""Shared solved systems for the expensive acceptance anchors."""

from dataclasses import dataclass

import numpy as np
import pytest

from nmon import (
    CodeSpace,
    build_d_flux,
    build_d_ng,
    converged_solution,
    fluxonium,
    nmon,
    rescale_to_frequency,
    select_code_space,
    to_eigenbasis,
    transmon,
)
from nmon.spectral import EigenSolution, EigenbasisOperator


@dataclass(frozen=True)
class SolvedSystem:
    spec: object
    sol: EigenSolution
    charge: EigenbasisOperator
    flux: EigenbasisOperator
    code: CodeSpace


def solve_system(spec, levels=8, code_indices=None):
    sol = converged_solution(spec, levels)
    charge = to_eigenbasis(build_d_ng(spec, sol.cutoff), sol, levels, channel="charge")
    flux = to_eigenbasis(build_d_flux(spec, sol.cutoff), sol, levels, channel="flux")
    if code_indices is None:
        code = select_code_space(sol, charge)
    else:
        from nmon import code_space_from_indices

        code = code_space_from_indices(sol, *code_indices)
    return SolvedSystem(spec=spec, sol=sol, charge=charge, flux=flux, code=code)


@pytest.fixture(scope="session")
def fig2_system():
    return solve_system(nmon(2, 3, 75.0, 15.0, 1.0, kappa=0.5))


@pytest.fixture(scope="session")
def fig6_system():
    return solve_system(nmon(13, 2, 140.0, 55.0, 1.0, kappa=1.0))


@pytest.fixture(scope="session")
def fig8_system(fig6_system):
    spec = rescale_to_frequency(
        fig6_system.spec, fig6_system.sol, fig6_system.code, 5.39
    )
    return solve_system(spec)


@pytest.fixture(scope="session")
def transmon113_system():
    return solve_system(transmon(113.0, 1.0), levels=4)


@pytest.fixture(scope="session")
def fluxonium_system():
    # junction-gauge ratios beta=75, eta=15 at half flux; levels 0 and 1 are
    # the double-well pair of interest
    return solve_system(
        fluxonium(75.0, 15.0, 1.0, phi_ext=np.pi), code_indices=(1, 2)
    )
