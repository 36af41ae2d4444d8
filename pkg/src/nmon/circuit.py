"""Circuit parameterization and charge-basis operator construction.

The circuits modeled here consist of two parallel arms of Josephson
junctions (``n_arm`` junctions in one arm, ``m_arm`` in the other), each
arm shunted by a large capacitance, threaded by an external flux.  In the
charge basis the Hamiltonian is a dense Hermitian matrix: a diagonal
charging term plus one banded cosine term per arm.  Everything in this
module is pure construction; diagonalization lives in :mod:`nmon.spectral`.

Unit conventions used throughout the package:

* all energies are frequencies in GHz (E/h),
* phases and external flux are in radians,
* time is in ns, so a level at E GHz accumulates phase ``2*pi*E*t``.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "CircuitSpec",
    "ChargeOperator",
    "nmon",
    "transmon",
    "split_transmon",
    "fluxonium",
    "preset",
    "build_hamiltonian",
    "build_d_ng",
    "build_d_flux",
]

HERMITICITY_RTOL = 1e-12


@dataclass(frozen=True)
class CircuitSpec:
    """Full parameterization of a two-arm junction-array circuit.

    Parameters
    ----------
    n_arm, m_arm:
        Number of junctions in each arm (N and M).  Junctions within an
        arm are assumed identical.
    ej_n, ej_m:
        Per-junction Josephson energy of each arm, in GHz.
    ec:
        Effective charging energy in GHz.
    kappa:
        Shunt-capacitance ratio in [0, 1].  Controls how the external
        flux is allocated between the two cosine terms; the spectrum does
        not depend on it, but flux-noise matrix elements do.  The
        endpoints are accepted as limits of extreme capacitance ratios.
    ng:
        Dimensionless offset charge.
    phi_ext:
        External flux through the circuit loop, in radians.
    """

    n_arm: int
    m_arm: int
    ej_n: float
    ej_m: float
    ec: float
    kappa: float = 0.5
    ng: float = 0.0
    phi_ext: float = 0.0

    def __post_init__(self) -> None:
        if int(self.n_arm) != self.n_arm or self.n_arm < 1:
            raise ValueError(f"n_arm must be a positive integer, got {self.n_arm}")
        if int(self.m_arm) != self.m_arm or self.m_arm < 1:
            raise ValueError(f"m_arm must be a positive integer, got {self.m_arm}")
        if not (self.ej_n >= 0.0 and math.isfinite(self.ej_n)):
            raise ValueError(f"ej_n must be finite and nonnegative, got {self.ej_n}")
        if not (self.ej_m >= 0.0 and math.isfinite(self.ej_m)):
            raise ValueError(f"ej_m must be finite and nonnegative, got {self.ej_m}")
        if not (self.ec > 0.0 and math.isfinite(self.ec)):
            raise ValueError(f"ec must be finite and positive, got {self.ec}")
        if not (0.0 <= self.kappa <= 1.0):
            raise ValueError(f"kappa must be within [0, 1], got {self.kappa}")
        if not math.isfinite(self.ng):
            raise ValueError(f"ng must be finite, got {self.ng}")
        if not math.isfinite(self.phi_ext):
            raise ValueError(f"phi_ext must be finite, got {self.phi_ext}")

    @property
    def beta(self) -> float:
        """First-arm Josephson-to-charging energy ratio ej_n/ec."""
        return self.ej_n / self.ec

    @property
    def eta(self) -> float:
        """Second-arm Josephson-to-charging energy ratio ej_m/ec."""
        return self.ej_m / self.ec

    def replace(self, **changes) -> "CircuitSpec":
        """Return a copy with the given fields replaced."""
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class ChargeOperator:
    """Dense Hermitian operator over the truncated charge basis.

    Row/column index ``i`` corresponds to charge ``n = i - cutoff``; the
    basis spans integer charges in ``[-cutoff, +cutoff]``.
    """

    cutoff: int
    entries: np.ndarray

    def __post_init__(self) -> None:
        if self.cutoff < 1:
            raise ValueError(f"cutoff must be a positive integer, got {self.cutoff}")
        dim = 2 * self.cutoff + 1
        if self.entries.shape != (dim, dim):
            raise ValueError(
                f"entries must be {dim}x{dim} for cutoff {self.cutoff}, "
                f"got shape {self.entries.shape}"
            )
        scale = max(1.0, float(np.max(np.abs(self.entries))))
        dev = float(np.max(np.abs(self.entries - self.entries.conj().T)))
        if dev > HERMITICITY_RTOL * scale:
            raise ValueError(
                f"entries are not Hermitian: max deviation {dev:.3e} "
                f"exceeds {HERMITICITY_RTOL:.0e} relative"
            )

    @property
    def dim(self) -> int:
        return 2 * self.cutoff + 1

    @property
    def charges(self) -> np.ndarray:
        """Integer charge value for each basis index."""
        return np.arange(-self.cutoff, self.cutoff + 1)


def nmon(
    n: int,
    m: int,
    ej_n: float,
    ej_m: float,
    ec: float,
    *,
    kappa: float = 0.5,
    ng: float = 0.0,
    phi_ext: float = 0.0,
) -> CircuitSpec:
    """Generic two-arm circuit with explicit junction counts and energies."""
    return CircuitSpec(n, m, ej_n, ej_m, ec, kappa=kappa, ng=ng, phi_ext=phi_ext)


def transmon(ej: float, ec: float, *, ng: float = 0.0) -> CircuitSpec:
    """Single-junction circuit: one arm with one junction, second arm absent.

    Without a loop there is no flux degree of freedom, so ``kappa`` is set
    to 0 to make the flux-derivative operator vanish identically.
    """
    return CircuitSpec(1, 1, ej, 0.0, ec, kappa=0.0, ng=ng, phi_ext=0.0)


def split_transmon(
    e_sum: float,
    d: float,
    ec: float,
    *,
    ng: float = 0.0,
    phi_ext: float = 0.0,
) -> CircuitSpec:
    """Two-junction loop with total Josephson energy ``e_sum`` and asymmetry ``d``.

    The junction energies are ``(e_sum + d)/2`` and ``(e_sum - d)/2``; equal
    shunt capacitances fix ``kappa = 1/2``.
    """
    if abs(d) > e_sum:
        raise ValueError(
            f"asymmetry |d|={abs(d)} exceeds total Josephson energy e_sum={e_sum}"
        )
    return CircuitSpec(
        1, 1, (e_sum + d) / 2.0, (e_sum - d) / 2.0, ec,
        kappa=0.5, ng=ng, phi_ext=phi_ext,
    )


def fluxonium(
    ej_n: float,
    ej_m: float,
    ec: float,
    *,
    ng: float = 0.0,
    phi_ext: float = 0.0,
) -> CircuitSpec:
    """Junction shunted by a 10-junction array: fixed N=10, M=1, kappa=1.

    ``ec`` and ``ng`` are quoted in the junction-phase convention
    customary for these devices (charging energy and offset charge of the
    small-junction island).  The charge basis here works with the array
    phase, where the same circuit has charging energy ``ec / N**2`` and
    offset charge ``N * ng``; the conversion is applied internally.  This
    is what makes the half-flux double well and its large anharmonicity
    appear at the usual parameter values.
    """
    n = 10
    return CircuitSpec(
        n, 1, ej_n, ej_m, ec / n**2, kappa=1.0, ng=n * ng, phi_ext=phi_ext
    )


_PRESETS = {
    "nmon": nmon,
    "transmon": transmon,
    "split_transmon": split_transmon,
    "fluxonium": fluxonium,
}


def preset(kind: str, **params) -> CircuitSpec:
    """Build a :class:`CircuitSpec` from a named circuit family.

    ``kind`` is one of ``nmon``, ``transmon``, ``split_transmon``,
    ``fluxonium``; ``params`` are forwarded to the matching constructor.
    """
    try:
        factory = _PRESETS[kind]
    except KeyError:
        raise ValueError(
            f"unknown preset kind {kind!r}; expected one of {sorted(_PRESETS)}"
        ) from None
    return factory(**params)


def _band_terms(spec: CircuitSpec) -> list[tuple[int, float, float, float]]:
    """Cosine terms of the potential as (band offset k, strength, phase, dphase/dphi_ext).

    Each term ``-E cos(k*phi + c)`` couples charges n and n+k.  The first
    arm contributes at offset ``m_arm`` with strength ``n_arm * ej_n`` and
    phase ``-kappa * phi_ext / n_arm``; the second arm at offset ``n_arm``
    with strength ``m_arm * ej_m`` and phase ``+(1 - kappa) * phi_ext / m_arm``.
    """
    n, m = spec.n_arm, spec.m_arm
    return [
        (m, n * spec.ej_n, -spec.kappa * spec.phi_ext / n, -spec.kappa / n),
        (n, m * spec.ej_m, (1.0 - spec.kappa) * spec.phi_ext / m, (1.0 - spec.kappa) / m),
    ]


def _check_cutoff(spec: CircuitSpec, cutoff: int) -> None:
    if cutoff < 1:
        raise ValueError(f"cutoff must be a positive integer, got {cutoff}")
    # only bands that are actually present need to fit
    k_max = max(
        [1]
        + [spec.m_arm if spec.ej_n != 0.0 else 1]
        + [spec.n_arm if spec.ej_m != 0.0 else 1]
    )
    if cutoff < k_max:
        raise ValueError(
            f"cutoff {cutoff} too small to host both cosine bands "
            f"(need at least {k_max})"
        )


def _add_band(entries: np.ndarray, k: int, value: complex) -> None:
    dim = entries.shape[0]
    rows = np.arange(dim - k)
    entries[rows, rows + k] += value
    entries[rows + k, rows] += np.conj(value)


def build_hamiltonian(spec: CircuitSpec, cutoff: int) -> ChargeOperator:
    """Hamiltonian matrix in the truncated charge basis.

    The diagonal holds the charging energy ``4*ec*(n + ng)**2``; each
    cosine term ``-E cos(k*phi + c)`` places ``-(E/2)*exp(i*c)`` on the
    k-th superdiagonal and its conjugate on the k-th subdiagonal.
    """
    _check_cutoff(spec, cutoff)
    dim = 2 * cutoff + 1
    n = np.arange(-cutoff, cutoff + 1, dtype=float)
    entries = np.zeros((dim, dim), dtype=complex)
    entries[np.diag_indices(dim)] = 4.0 * spec.ec * (n + spec.ng) ** 2
    for k, strength, phase, _ in _band_terms(spec):
        if strength != 0.0:
            _add_band(entries, k, -(strength / 2.0) * np.exp(1j * phase))
    return ChargeOperator(cutoff, entries)


def build_d_ng(spec: CircuitSpec, cutoff: int) -> ChargeOperator:
    """Derivative of the Hamiltonian with respect to the offset charge.

    Diagonal with entries ``8*ec*(n + ng)``; the cosine bands do not
    depend on ``ng``.
    """
    _check_cutoff(spec, cutoff)
    n = np.arange(-cutoff, cutoff + 1, dtype=float)
    entries = np.diag(8.0 * spec.ec * (n + spec.ng)).astype(complex)
    return ChargeOperator(cutoff, entries)


def build_d_flux(spec: CircuitSpec, cutoff: int) -> ChargeOperator:
    """Derivative of the Hamiltonian with respect to the external flux (per radian).

    Each band entry ``-(E/2)*exp(i*c)`` is multiplied by ``i * dc/dphi_ext``,
    with ``dc/dphi_ext = -kappa/n_arm`` for the first arm and
    ``+(1 - kappa)/m_arm`` for the second.
    """
    _check_cutoff(spec, cutoff)
    dim = 2 * cutoff + 1
    entries = np.zeros((dim, dim), dtype=complex)
    for k, strength, phase, dphase in _band_terms(spec):
        if strength != 0.0 and dphase != 0.0:
            _add_band(entries, k, -(strength / 2.0) * np.exp(1j * phase) * 1j * dphase)
    return ChargeOperator(cutoff, entries)
