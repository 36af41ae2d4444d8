"""Drive protocols, the interaction-picture integrator, and Rabi metrics."""

import numpy as np
import pytest

from nmon.dynamics import (
    DriveProtocol,
    inversion_threshold,
    integrate_coefficients,
    rabi_metrics,
    simulate_drive,
)
from nmon.metrics import RATE_PREFACTOR, transition_rate
from nmon.spectral import EigenbasisOperator, EigenSolution


def two_level(w01=1.0, w=0.1, cutoff=5):
    energies = np.array([0.0, w01])
    coupling = np.array([[0.0, w], [w, 0.0]], dtype=complex)
    dim = 2 * cutoff + 1
    states = np.zeros((dim, 2), dtype=complex)
    states[0, 0] = states[1, 1] = 1.0
    sol = EigenSolution(
        energies=energies, states=states, cutoff=cutoff,
        converged=True, parity=np.ones(2),
    )
    op = EigenbasisOperator(entries=coupling, channel="flux")
    return sol, op


def test_protocol_validation():
    with pytest.raises(ValueError, match="amplitude"):
        DriveProtocol(amplitude=-0.1, frequency=1.0, duration=1.0)
    with pytest.raises(ValueError, match="duration"):
        DriveProtocol(amplitude=0.1, frequency=1.0, duration=0.0)
    with pytest.raises(ValueError, match="envelope"):
        DriveProtocol(amplitude=0.1, frequency=1.0, duration=1.0, envelope="square")
    with pytest.raises(ValueError, match="ramp_ns"):
        DriveProtocol(amplitude=0.1, frequency=1.0, duration=1.0, envelope="ramped")


def test_zero_drive_populations_frozen():
    sol, op = two_level()
    from nmon.circuit import CircuitSpec

    spec = CircuitSpec(1, 1, 1.0, 0.0, 1.0)
    proto = DriveProtocol(amplitude=0.0, frequency=1.0, duration=20.0)
    traj = simulate_drive(spec, sol, op, proto, initial=[1 / np.sqrt(2), 1j / np.sqrt(2)])
    np.testing.assert_allclose(traj.populations, 0.5, atol=1e-12)
    metrics = rabi_metrics(traj, 1)
    assert metrics.rabi_frequency_estimate == 0.0


def test_two_level_resonant_rabi_oracle():
    # resonant weak drive: population oscillates at amplitude * coupling (GHz)
    w01, w, amp = 1.0, 0.1, 0.25
    sol, op = two_level(w01, w)
    f_pop = amp * w
    proto = DriveProtocol(amplitude=amp, frequency=w01, duration=10.0 / f_pop)
    traj = integrate_coefficients(
        sol.energies, op.entries, proto.waveform, proto.duration,
        1.0 / (20.0 * w01), np.array([1.0, 0.0], dtype=complex),
    )
    metrics = rabi_metrics(traj, 1)
    assert metrics.peak_population > 0.999
    assert metrics.rabi_frequency_estimate == pytest.approx(f_pop, rel=0.02)
    # populations follow sin^2(pi f t) up to the counter-rotating wobble
    expected = np.sin(np.pi * f_pop * traj.times) ** 2
    assert np.max(np.abs(traj.populations[:, 1] - expected)) < 2e-2


def test_norm_drift_fourth_order_convergence():
    w01, w, amp = 1.0, 0.1, 0.25
    sol, op = two_level(w01, w)
    proto = DriveProtocol(amplitude=amp, frequency=w01, duration=400.0)
    init = np.array([1.0, 0.0], dtype=complex)
    step = 1.0 / (20.0 * w01)
    coarse = integrate_coefficients(
        sol.energies, op.entries, proto.waveform, proto.duration, step, init
    )
    fine = integrate_coefficients(
        sol.energies, op.entries, proto.waveform, proto.duration, step / 2, init
    )
    assert coarse.max_norm_drift > 1e-7  # measurable
    assert coarse.max_norm_drift / fine.max_norm_drift >= 8.0


def test_energy_shift_invariance():
    # only energy differences enter the interaction picture
    w01, w, amp = 1.0, 0.1, 0.3
    sol, op = two_level(w01, w)
    proto = DriveProtocol(amplitude=amp, frequency=w01, duration=50.0)
    init = np.array([1.0, 0.0], dtype=complex)
    step = 1.0 / (20.0 * w01)
    base = integrate_coefficients(
        sol.energies, op.entries, proto.waveform, proto.duration, step, init
    )
    shifted = integrate_coefficients(
        sol.energies + 17.3, op.entries, proto.waveform, proto.duration, step, init
    )
    assert np.max(np.abs(base.populations - shifted.populations)) < 1e-8


def test_step_validation_and_default():
    sol, op = two_level(2.0, 0.1)
    from nmon.circuit import CircuitSpec

    spec = CircuitSpec(1, 1, 1.0, 0.0, 1.0)
    proto = DriveProtocol(amplitude=0.1, frequency=2.0, duration=5.0)
    with pytest.raises(ValueError, match="step"):
        simulate_drive(spec, sol, op, proto, step=1.0)
    traj = simulate_drive(spec, sol, op, proto)
    assert traj.times[1] - traj.times[0] <= 1.0 / (20.0 * 2.0) + 1e-12


def test_norm_abort_diagnostic():
    sol, op = two_level(1.0, 0.5)
    proto = DriveProtocol(amplitude=1.0, frequency=1.0, duration=2000.0)
    # step far too coarse for this strong drive accumulates norm error
    with pytest.raises(RuntimeError, match="norm drift"):
        integrate_coefficients(
            sol.energies, op.entries, proto.waveform, proto.duration,
            1.0 / 20.0, np.array([1.0, 0.0], dtype=complex), norm_abort=1e-6,
        )


def test_ramped_envelope_waveform():
    proto = DriveProtocol(
        amplitude=0.5, frequency=0.25, duration=10.0, envelope="ramped", ramp_ns=2.0
    )
    t = np.array([0.0, 1.0, 2.0, 4.0])
    ramp = np.minimum(1.0, t / 2.0)
    np.testing.assert_allclose(
        proto.waveform(t), 0.5 * ramp * np.sin(2 * np.pi * 0.25 * t), atol=1e-15
    )


def test_threshold_trivial_and_monotone_horizon():
    sol, op = two_level(1.0, 0.1)
    from nmon.circuit import CircuitSpec

    spec = CircuitSpec(1, 1, 1.0, 0.0, 1.0)
    assert inversion_threshold(spec, sol, op, frequency=1.0, target_pop=0.0) == 0.0
    t1 = inversion_threshold(spec, sol, op, frequency=1.0, horizon=60.0)
    t2 = inversion_threshold(spec, sol, op, frequency=1.0, horizon=120.0)
    assert t2 <= t1
    # two-level closed form: reach sin^2(pi w A t) = 0.95 within the horizon
    expected = np.arcsin(np.sqrt(0.95)) / (np.pi * 0.1 * 60.0)
    assert t1 == pytest.approx(expected, abs=0.015)


def test_threshold_unreachable():
    sol, op = two_level(1.0, 0.0)
    from nmon.circuit import CircuitSpec

    spec = CircuitSpec(1, 1, 1.0, 0.0, 1.0)
    with pytest.raises(ValueError, match="unreachable|couple"):
        inversion_threshold(spec, sol, op, frequency=1.0, horizon=10.0)


def test_rabi_frequency_increases_with_amplitude(fig8_system):
    spec, sol, flux = fig8_system.spec, fig8_system.sol, fig8_system.flux
    w01 = fig8_system.code.omega01
    rate = abs(complex(flux.entries[0, fig8_system.code.i1]))
    estimates = []
    for amp in (0.3, 0.45):
        proto = DriveProtocol(amplitude=amp, frequency=w01, duration=3.2 / (amp * rate))
        traj = simulate_drive(spec, sol, flux, proto)
        estimates.append(rabi_metrics(traj, fig8_system.code.i1).rabi_frequency_estimate)
    assert estimates[1] > estimates[0]


def test_rabi_metrics_too_short():
    sol, op = two_level(1.0, 0.1)
    proto = DriveProtocol(amplitude=0.2, frequency=1.0, duration=20.0)
    traj = integrate_coefficients(
        sol.energies, op.entries, proto.waveform, proto.duration,
        1.0 / 20.0, np.array([1.0, 0.0], dtype=complex),
    )
    # 20 ns covers only 0.4 periods of the 0.02 GHz population oscillation
    with pytest.raises(ValueError, match="too short"):
        rabi_metrics(traj, 1)


def test_transition_rate_matches_broadband_golden_rule():
    """Ensemble golden-rule oracle for the rate formula's 2*pi bookkeeping.

    The drive is a comb of cosines with a flat two-sided spectral density
    over a band covering the transition.  Averaging trajectories over DFT
    phase configurations cancels all cross terms exactly, so the mean
    population grows at the golden-rule rate without Monte-Carlo noise.
    """
    w01, w, s0 = 0.25, 0.05, 2e-4
    gamma = transition_rate(w, lambda omega: s0, 2 * np.pi * w01)
    assert gamma == pytest.approx(RATE_PREFACTOR * w**2 * s0)

    energies = np.array([0.0, w01])
    coupling = np.array([[0.0, w], [w, 0.0]], dtype=complex)
    n_comp, n_conf, duration, step = 200, 40, 150.0, 0.05
    freqs = np.linspace(0.15, 0.35, n_comp)
    omegas = 2 * np.pi * freqs
    amp = np.sqrt(2 * s0 * (omegas[1] - omegas[0]) / np.pi)

    # the integrator samples only the half-step grid, so the waveform can
    # be precomputed exactly on that grid
    n_steps = int(np.ceil(duration / step))
    stage_times = np.arange(2 * n_steps + 1) * (duration / n_steps / 2.0)

    mean_pop = None
    init = np.array([1.0, 0.0], dtype=complex)
    for conf in range(n_conf):
        thetas = 2 * np.pi * np.arange(n_comp) * conf / n_conf
        samples = amp * np.sum(
            np.cos(np.outer(omegas, stage_times) + thetas[:, None]), axis=0
        )
        scale = 2.0 / (duration / n_steps)

        def drive(t, table=samples, s=scale):
            return table[int(round(t * s))]

        traj = integrate_coefficients(
            energies, coupling, drive, duration, step, init, norm_abort=None
        )
        pop = traj.populations[:, 1]
        mean_pop = pop if mean_pop is None else mean_pop + pop
    mean_pop /= n_conf

    times = traj.times
    window = times >= 30.0
    slope = np.polyfit(times[window], mean_pop[window], 1)[0]
    assert slope == pytest.approx(gamma, rel=0.05)
