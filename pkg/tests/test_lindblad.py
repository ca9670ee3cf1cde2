"""Open-system engine: master-equation integrator, noise channels, guards."""

import math

import numpy as np
import pytest

from plet_sim.lindblad import (
    FockCutoffError,
    NoiseModelQubit,
    NoiseModelQutrit,
    TraceDriftError,
    integrate_master,
    lindblad_rhs,
    mode_collapse,
    ms_segment,
    qutrit_collapse,
    simulate_qubit_noisy,
    simulate_qutrit_noisy,
    total_ms_duration,
)
from plet_sim.model import (
    PletModel,
    h2_shifted,
    initial_superposition,
    pauli_decompose,
    qubit_embed,
)
from plet_sim.trotter import (
    build_plan,
    compile_qubit,
    compile_qutrit,
    simulate_circuit_ideal,
    simulate_schedule_ideal,
)

FIG3 = PletModel()
RABI_01 = 2 * math.pi * 17300.0
RABI_02 = 2 * math.pi * 17490.0
DEC = pauli_decompose(qubit_embed(h2_shifted(FIG3)))
DT_FS = 32.91 / 70


def random_density(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


class TestNoiseModels:
    def test_rejects_nonpositive_times(self):
        with pytest.raises(ValueError):
            NoiseModelQutrit(tau1=0.0)
        with pytest.raises(ValueError):
            NoiseModelQubit(tau_m=-1.0)
        with pytest.raises(ValueError):
            NoiseModelQubit(gamma_oop=-1.0)
        with pytest.raises(ValueError):
            NoiseModelQubit(n_max=1)


class TestLindbladRhs:
    def test_traceless_and_hermiticity_preserving(self):
        rng = np.random.default_rng(3)
        rho = random_density(rng, 3)
        ops = qutrit_collapse(NoiseModelQutrit()).operators
        h = rng.normal(size=(3, 3))
        h = (h + h.T) / 2
        out = lindblad_rhs(rho, h.astype(complex), ops)
        assert abs(np.trace(out)) < 1e-12
        assert np.abs(out - out.conj().T).max() < 1e-12

    def test_no_hamiltonian_means_pure_dissipation(self):
        rho = np.eye(3, dtype=complex) / 3
        out = lindblad_rhs(rho, None, qutrit_collapse(NoiseModelQutrit()).operators)
        # Maximally mixed state is stationary under pure dephasing.
        assert np.abs(out).max() < 1e-12


class TestQutritDephasing:
    def test_analytic_coherence_decay(self):
        # L_k = sqrt(1/tau_k)(|0><0| - |k><k|) gives rho_01 decay at
        # 2/tau1 + 1/(2 tau2) and rho_02 decay at 1/(2 tau1) + 2/tau2.
        noise = NoiseModelQutrit(tau1=0.3, tau2=0.075)
        psi = np.array([1, 1, 1], dtype=complex) / math.sqrt(3)
        rho0 = np.outer(psi, psi.conj())
        t = 0.02
        rho, _ = integrate_master(
            [(None, t)], rho0, qutrit_collapse(noise).operators, t / 400
        )
        r01 = 2 / noise.tau1 + 0.5 / noise.tau2
        r02 = 0.5 / noise.tau1 + 2 / noise.tau2
        r12 = 0.5 / noise.tau1 + 0.5 / noise.tau2
        assert abs(rho[0, 1]) == pytest.approx(math.exp(-r01 * t) / 3, rel=1e-6)
        assert abs(rho[0, 2]) == pytest.approx(math.exp(-r02 * t) / 3, rel=1e-6)
        assert abs(rho[1, 2]) == pytest.approx(math.exp(-r12 * t) / 3, rel=1e-6)
        assert np.abs(np.diag(rho).real - 1 / 3).max() < 1e-9


class TestModeHeating:
    def test_mean_occupation_grows_linearly(self):
        gamma, t = 10.0, 1e-3  # Gamma t = 0.01
        collapse = mode_collapse(1e9, gamma, 6)
        rho0 = np.zeros((6, 6), dtype=complex)
        rho0[0, 0] = 1.0
        rho, _ = integrate_master([(None, t)], rho0, collapse, t / 200)
        n_mean = float(np.arange(6) @ np.diag(rho).real)
        assert n_mean == pytest.approx(gamma * t, rel=0.02)

    def test_dephasing_preserves_populations(self):
        collapse = mode_collapse(1e-3, 0.0, 4)
        rng = np.random.default_rng(5)
        rho0 = random_density(rng, 4)
        rho, _ = integrate_master([(None, 1e-3)], rho0, collapse, 1e-5)
        assert np.abs(np.diag(rho) - np.diag(rho0)).max() < 1e-9


class TestIntegrateMaster:
    def test_boundaries_physical(self):
        noise = NoiseModelQutrit()
        ops = qutrit_collapse(noise).operators
        psi = initial_superposition(0.7).amplitudes
        rho0 = np.outer(psi, psi.conj())
        h = np.array([[0, 1e3, 0], [1e3, 0, 0], [0, 0, 0]], dtype=complex)
        _, bounds = integrate_master(
            [(h, 1e-4), (None, 1e-4), (h, 1e-4)], rho0, ops, 1e-6
        )
        assert len(bounds) == 3
        for rho in bounds:
            assert abs(np.trace(rho).real - 1.0) < 1e-9
            assert np.abs(rho - rho.conj().T).max() < 1e-9
            assert np.linalg.eigvalsh(rho).min() > -1e-7

    def test_trace_guard_trips_on_coarse_step(self):
        rho0 = np.diag([1.0, 0, 0]).astype(complex)
        h = 1e7 * np.array([[0, 1, 0], [1, 0, 0], [0, 0, 0]], dtype=complex)
        with pytest.raises(TraceDriftError):
            integrate_master([(h, 1.0)], rho0,
                             qutrit_collapse(NoiseModelQutrit()).operators, 0.5)


class TestMsSegment:
    def test_closed_loop_realizes_xx(self):
        # Noise-free MS segment equals exp(-i chi XX) on the qubits with the
        # mode returning to vacuum.
        chi = math.pi / 8
        n = 8
        h, tau_g = ms_segment(chi, 2 * math.pi * 4475.0, n)
        psi4 = np.zeros(4, dtype=complex)
        psi4[0] = math.sqrt(0.3)
        psi4[1] = math.sqrt(0.2) * 1j
        psi4[2] = math.sqrt(0.5)
        vac = np.zeros((n, n), dtype=complex)
        vac[0, 0] = 1.0
        rho, _ = integrate_master(
            [(h, tau_g)], np.kron(np.outer(psi4, psi4.conj()), vac), [], tau_g / 400
        )
        sx = np.array([[0, 1], [1, 0]], dtype=complex)
        xx = np.kron(sx, sx)
        from scipy.linalg import expm

        target = expm(-1j * chi * xx) @ psi4
        rho4 = rho.reshape(4, n, 4, n).trace(axis1=1, axis2=3)
        assert np.abs(rho4 - np.outer(target, target.conj())).max() < 1e-6

    def test_duration_scales_as_sqrt_chi(self):
        omega = 2 * math.pi * 4475.0
        taus = [ms_segment(c, omega, 2)[1] for c in (math.pi / 64, math.pi / 16, math.pi / 4)]
        assert taus[1] / taus[0] == pytest.approx(2.0, rel=1e-12)
        assert taus[2] / taus[1] == pytest.approx(2.0, rel=1e-12)
        assert taus[2] == pytest.approx(2 * math.sqrt(math.pi * math.pi / 4) / omega)

    def test_zero_angle_takes_no_time(self):
        _, tau_g = ms_segment(0.0, 2 * math.pi * 4475.0, 3)
        assert tau_g == 0.0


class TestZeroNoiseLimits:
    def test_qutrit_matches_ideal_playback(self):
        plan = build_plan(FIG3, "electron_transfer", DT_FS * 10, 10)
        sched = compile_qutrit(plan, RABI_01, RABI_02)
        psi0 = initial_superposition(math.pi / 2)
        ideal = simulate_schedule_ideal(sched, psi0)
        quiet = simulate_qutrit_noisy(sched, NoiseModelQutrit(1e9, 1e9), psi0)
        assert np.abs(quiet.populations - ideal.populations).max() < 1e-6

    def test_qubit_matches_ideal_circuit(self):
        circuit = compile_qubit([DEC] * 4, DT_FS, 1)
        psi0 = initial_superposition(math.pi / 2)
        ideal = simulate_circuit_ideal(circuit, psi0)
        quiet = simulate_qubit_noisy(
            circuit,
            NoiseModelQubit(tau_m=1e9, gamma_oop=0.0, gamma_ip=0.0, n_max=8,
                            n_max_ip=2),
            psi0,
        )
        assert np.abs(quiet.populations - ideal.populations).max() < 1e-6


class TestNoiseMonotonicity:
    def test_stronger_dephasing_larger_deviation(self):
        plan = build_plan(FIG3, "electron_transfer", DT_FS * 15, 15)
        sched = compile_qutrit(plan, RABI_01, RABI_02)
        psi0 = initial_superposition(math.pi / 2)
        ideal = simulate_schedule_ideal(sched, psi0).populations
        base = simulate_qutrit_noisy(sched, NoiseModelQutrit(0.3, 0.075), psi0)
        strong = simulate_qutrit_noisy(sched, NoiseModelQutrit(0.03, 0.0075), psi0)
        dev_base = np.abs(base.populations - ideal).max()
        dev_strong = np.abs(strong.populations - ideal).max()
        assert dev_strong > 3 * dev_base > 0


class TestQubitGuards:
    def test_fock_cutoff_error_on_tiny_mode(self):
        circuit = compile_qubit([DEC] * 8, DT_FS, 1)
        noise = NoiseModelQubit(n_max=2, n_max_ip=2)
        with pytest.raises(FockCutoffError):
            simulate_qubit_noisy(circuit, noise, initial_superposition(0.0))

    def test_cutoff_convergence_on_short_circuit(self):
        # Raising the out-of-phase cutoff leaves populations unchanged at
        # the reporting precision (guard-safe truncated circuit).
        circuit = compile_qubit([DEC] * 5, DT_FS, 1)
        psi0 = initial_superposition(math.pi / 2)
        finals = []
        for n in (5, 7):
            noise = NoiseModelQubit(n_max=n, n_max_ip=12)
            finals.append(simulate_qubit_noisy(circuit, noise, psi0).populations[-1])
        assert np.abs(finals[0] - finals[1]).max() < 1e-4

    def test_total_ms_duration_counts_only_xx(self):
        circuit = compile_qubit([DEC] * 70, DT_FS, 1)
        total = total_ms_duration(circuit, NoiseModelQubit().sideband_rabi)
        assert total * 1e3 == pytest.approx(11.498, abs=0.01)
