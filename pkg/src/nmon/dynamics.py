"""Time-dependent Schrodinger dynamics under a flux drive.

The state is expanded over the lowest eigenstates and propagated in the
interaction picture,

    dc_n/dt = -2*pi*i * g(t) * sum_m W_nm exp(2*pi*i*(E_n - E_m)*t) c_m,

with energies in GHz, time in ns, ``W`` the flux-derivative operator in
the eigenbasis (GHz per radian) and ``g(t)`` the drive waveform in
radians.  A classic fixed-step fourth-order Runge-Kutta integrator keeps
the evolution deterministic; the norm is never renormalized, so norm
drift is a direct integration diagnostic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .circuit import CircuitSpec
from .spectral import EigenSolution, EigenbasisOperator

__all__ = [
    "DriveProtocol",
    "Trajectory",
    "RabiMetrics",
    "simulate_drive",
    "rabi_metrics",
    "inversion_threshold",
    "default_inversion_horizon",
    "integrate_coefficients",
]

ENVELOPES = ("constant", "ramped")

# steps per period of the fastest interaction phase
_STEP_RESOLUTION = 20.0

NORM_ABORT = 1e-4

# Default bisection horizon: 1.5 inversion (pi-pulse) times at the
# reference amplitude, i.e. enough time to complete one full population
# transfer at amplitude 0.3 with a 50% margin.
_REFERENCE_AMPLITUDE = 0.3
_HORIZON_PI_TIMES = 1.5


@dataclass(frozen=True)
class DriveProtocol:
    """Sinusoidal flux drive: amplitude * env(t) * sin(2*pi*f*t + phase)."""

    amplitude: float
    frequency: float
    duration: float
    phase: float = 0.0
    envelope: str = "constant"
    ramp_ns: float = 0.0

    def __post_init__(self) -> None:
        if self.amplitude < 0.0:
            raise ValueError(f"amplitude must be nonnegative, got {self.amplitude}")
        if self.duration <= 0.0:
            raise ValueError(f"duration must be positive, got {self.duration}")
        if self.envelope not in ENVELOPES:
            raise ValueError(f"envelope must be one of {ENVELOPES}, got {self.envelope!r}")
        if self.envelope == "ramped" and self.ramp_ns <= 0.0:
            raise ValueError("ramped envelope needs ramp_ns > 0")

    def waveform(self, t: np.ndarray | float):
        value = self.amplitude * np.sin(2.0 * np.pi * self.frequency * t + self.phase)
        if self.envelope == "ramped":
            value = value * np.minimum(1.0, np.asarray(t) / self.ramp_ns)
        return value


@dataclass(frozen=True)
class Trajectory:
    """Interaction-picture coefficients and populations on a time grid."""

    times: np.ndarray
    amplitudes: np.ndarray
    populations: np.ndarray

    @property
    def norms(self) -> np.ndarray:
        return self.populations.sum(axis=1)

    @property
    def max_norm_drift(self) -> float:
        return float(np.max(np.abs(self.norms - 1.0)))


@dataclass(frozen=True)
class RabiMetrics:
    peak_population: float
    time_to_peak: float
    rabi_frequency_estimate: float


def integrate_coefficients(
    energies: np.ndarray,
    coupling: np.ndarray,
    drive: Callable[[float], float],
    duration: float,
    step: float,
    initial: np.ndarray,
    norm_abort: float | None = NORM_ABORT,
    stop_when: Callable[[np.ndarray], bool] | None = None,
) -> Trajectory:
    """Fixed-step RK4 integration of the interaction-picture equation.

    ``drive`` maps time in ns to the instantaneous drive value (radians).
    ``stop_when`` receives the populations after each step and ends the
    integration early when it returns True.
    """
    energies = np.asarray(energies, dtype=float)
    n_steps = max(1, math.ceil(duration / step))
    h = duration / n_steps
    omega = 2.0j * np.pi * (energies[:, None] - energies[None, :])

    def rhs(t: float, c: np.ndarray) -> np.ndarray:
        return (-2.0j * np.pi * drive(t)) * ((coupling * np.exp(omega * t)) @ c)

    c = initial.astype(complex).copy()
    coeffs = np.empty((n_steps + 1, len(c)), dtype=complex)
    coeffs[0] = c
    t = 0.0
    stored = n_steps + 1
    for k in range(n_steps):
        k1 = rhs(t, c)
        k2 = rhs(t + h / 2.0, c + (h / 2.0) * k1)
        k3 = rhs(t + h / 2.0, c + (h / 2.0) * k2)
        k4 = rhs(t + h, c + h * k3)
        c = c + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t = (k + 1) * h
        coeffs[k + 1] = c
        pops = np.abs(c) ** 2
        if norm_abort is not None and abs(pops.sum() - 1.0) > norm_abort:
            raise RuntimeError(
                f"norm drift {abs(pops.sum() - 1.0):.3e} exceeded {norm_abort:.0e} "
                f"at t={t:.4f} ns; reduce the step"
            )
        if stop_when is not None and stop_when(pops):
            stored = k + 2
            break

    times = np.arange(stored) * h
    coeffs = coeffs[:stored]
    return Trajectory(
        times=times, amplitudes=coeffs, populations=np.abs(coeffs) ** 2
    )


def _initial_vector(initial: int | Sequence[complex], levels: int) -> np.ndarray:
    if isinstance(initial, (int, np.integer)):
        if not 0 <= initial < levels:
            raise ValueError(f"initial level must be within [0, {levels - 1}], got {initial}")
        vec = np.zeros(levels, dtype=complex)
        vec[initial] = 1.0
        return vec
    vec = np.asarray(initial, dtype=complex)
    if vec.shape != (levels,):
        raise ValueError(f"initial amplitudes must have length {levels}")
    norm = float(np.sum(np.abs(vec) ** 2))
    if abs(norm - 1.0) > 1e-6:
        raise ValueError(f"initial amplitudes must be normalized, got |c|^2 = {norm}")
    return vec


def _max_step(energies: np.ndarray) -> float:
    spread = float(energies[-1] - energies[0])
    if spread <= 0.0:
        return np.inf
    return 1.0 / (_STEP_RESOLUTION * spread)


def simulate_drive(
    spec: CircuitSpec,
    sol: EigenSolution,
    flux_op: EigenbasisOperator,
    protocol: DriveProtocol,
    initial: int | Sequence[complex] = 0,
    levels: int = 8,
    step: float | None = None,
) -> Trajectory:
    """Propagate the system under the flux drive protocol.

    The step must resolve the fastest interaction phase; ``None`` picks
    the largest admissible step.  Norm drift beyond ``NORM_ABORT`` aborts
    with a diagnostic rather than silently renormalizing.
    """
    levels = min(levels, sol.n_levels, flux_op.n_levels)
    energies = sol.energies[:levels]
    coupling = flux_op.entries[:levels, :levels]
    bound = _max_step(energies)
    if step is None:
        step = min(bound, protocol.duration / 10.0)
    elif step > bound * (1.0 + 1e-12):
        raise ValueError(
            f"step {step} ns does not resolve the fastest phase; need <= {bound:.3e} ns"
        )
    initial_vec = _initial_vector(initial, levels)
    return integrate_coefficients(
        energies, coupling, protocol.waveform, protocol.duration, step, initial_vec
    )


def rabi_metrics(traj: Trajectory, target: int) -> RabiMetrics:
    """Peak population and oscillation frequency of one level's population.

    The frequency comes from the dominant nonzero peak of the discrete
    spectrum of the population trace, refined by parabolic interpolation;
    a flat trace reports zero frequency.
    """
    pops = traj.populations[:, target]
    peak_idx = int(np.argmax(pops))
    peak = float(pops[peak_idx])
    t_peak = float(traj.times[peak_idx])

    if float(pops.max() - pops.min()) < 1e-9:
        return RabiMetrics(peak, t_peak, 0.0)

    dt = float(traj.times[1] - traj.times[0])
    window = np.hanning(len(pops))
    spectrum = np.abs(np.fft.rfft((pops - pops.mean()) * window))
    if len(spectrum) < 3:
        raise ValueError("trajectory too short for frequency estimation")
    k = int(np.argmax(spectrum[1:])) + 1
    if 1 <= k < len(spectrum) - 1:
        left, mid, right = spectrum[k - 1], spectrum[k], spectrum[k + 1]
        denom = left - 2.0 * mid + right
        shift = 0.5 * (left - right) / denom if denom != 0.0 else 0.0
    else:
        shift = 0.0
    freq = (k + shift) / (len(pops) * dt)

    duration = float(traj.times[-1])
    if duration * freq < 1.5:
        raise ValueError(
            f"trajectory too short: covers only {duration * freq:.2f} oscillation "
            "periods; need at least 1.5 for a frequency estimate"
        )
    return RabiMetrics(peak, t_peak, float(freq))


def _resonant_level(energies: np.ndarray, frequency: float) -> int:
    gaps = np.abs((energies[1:] - energies[0]) - frequency)
    return int(np.argmin(gaps)) + 1


def default_inversion_horizon(
    sol: EigenSolution,
    flux_op: EigenbasisOperator,
    frequency: float,
    levels: int = 8,
) -> float:
    """Default threshold-search horizon: 1.5 inversion times at amplitude 0.3.

    The inversion (pi-pulse) time comes from the two-level oscillation
    rate of the level resonant with the drive frequency.
    """
    levels = min(levels, sol.n_levels, flux_op.n_levels)
    energies = sol.energies[:levels]
    target = _resonant_level(energies, frequency)
    rate = abs(complex(flux_op.entries[0, target]))
    if rate == 0.0:
        raise ValueError(
            f"level {target} does not couple to the ground state through the flux "
            "drive; target population unreachable"
        )
    pi_time = 1.0 / (2.0 * _REFERENCE_AMPLITUDE * rate)
    return _HORIZON_PI_TIMES * pi_time


def inversion_threshold(
    spec: CircuitSpec,
    sol: EigenSolution,
    flux_op: EigenbasisOperator,
    frequency: float,
    horizon: float | None = None,
    target_pop: float = 0.95,
    levels: int = 8,
    step: float | None = None,
    amplitude_tol: float = 0.01,
) -> float:
    """Smallest drive amplitude that reaches the target population in time.

    The driven level is the one resonant with ``frequency``.  When no
    horizon is given it defaults to 1.5 inversion times at the reference
    amplitude 0.3, estimated from the two-level oscillation rate.  Raises
    when even a full-radian drive cannot reach the target.
    """
    if not 0.0 <= target_pop < 1.0:
        raise ValueError(f"target_pop must be within [0, 1), got {target_pop}")
    if target_pop == 0.0:
        return 0.0

    levels = min(levels, sol.n_levels, flux_op.n_levels)
    energies = sol.energies[:levels]
    coupling = flux_op.entries[:levels, :levels]
    target = _resonant_level(energies, frequency)
    if abs(complex(coupling[0, target])) == 0.0:
        raise ValueError(
            f"level {target} does not couple to the ground state through the flux "
            "drive; target population unreachable"
        )
    if horizon is None:
        horizon = default_inversion_horizon(sol, flux_op, frequency, levels)
    if step is None:
        step = _max_step(energies)

    initial = np.zeros(levels, dtype=complex)
    initial[0] = 1.0

    def reaches(amplitude: float) -> bool:
        if amplitude == 0.0:
            return False
        protocol = DriveProtocol(
            amplitude=amplitude, frequency=frequency, duration=horizon
        )
        traj = integrate_coefficients(
            energies, coupling, protocol.waveform, horizon, step, initial,
            stop_when=lambda pops: pops[target] >= target_pop,
        )
        return bool(np.max(traj.populations[:, target]) >= target_pop)

    # The reach curve need not stay above target at strong drive (leakage
    # grows with amplitude), so bracket the lowest crossing with an
    # ascending coarse scan before bisecting.
    coarse = np.linspace(0.0, 1.0, 21)
    hi = None
    lo = 0.0
    for value in coarse[1:]:
        if reaches(float(value)):
            hi = float(value)
            break
        lo = float(value)
    if hi is None:
        raise ValueError(
            f"target population {target_pop} unreachable at any amplitude up to "
            f"1.0 within horizon {horizon:.1f} ns"
        )
    while hi - lo > amplitude_tol:
        mid = (lo + hi) / 2.0
        if reaches(mid):
            hi = mid
        else:
            lo = mid
    return hi
