"""Open-system predictions: Lindblad integration of compiled programs.

The qutrit path integrates the 3-level density matrix under the dephasing
operators of the two encoded excited levels while each compiled pulse plays
back.  The qubit path integrates the two qubits jointly with the
out-of-phase motional mode during each Molmer-Sorensen segment; the
in-phase mode is never coupled by the drive, so its (noisy, drive-free)
evolution factorizes exactly and is carried separately for fidelity
accounting.

All lab-frame integration uses seconds and angular frequencies (rad/s); the
hbar = 1 convention applies in those units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .model import ET_LABELS
from .oracle import Trajectory
from .qcore import HilbertSpace, Operator, QuantumState
from .trotter import PulseSchedule, QubitCircuit, Rotation, XXGate, gate_unitary4, pulse_generator

TRACE_GUARD = 1e-6
TOP_FOCK_GUARD = 1e-4


class LindbladError(RuntimeError):
    pass


class TraceDriftError(LindbladError):
    """Integration step too large: trace drifted beyond the guard."""


class FockCutoffError(LindbladError):
    """Top Fock level of a mode became populated; raise n_max."""


@dataclass(frozen=True)
class NoiseModelQutrit:
    """Dephasing coherence times (s) of the two encoded excited levels."""

    tau1: float = 300e-3
    tau2: float = 75e-3

    def __post_init__(self):
        if self.tau1 <= 0 or self.tau2 <= 0:
            raise ValueError("coherence times must be positive")


@dataclass(frozen=True)
class NoiseModelQubit:
    """Motional dephasing/heating parameters of the two-qubit platform."""

    tau_m: float = 8e-3
    gamma_oop: float = 10.0
    gamma_ip: float = 200.0
    n_max: int = 5
    # The in-phase mode is never driven, only heated (much faster than the
    # out-of-phase mode), so it carries its own, larger cutoff.
    n_max_ip: int = 40
    sideband_rabi: float = 2.0 * math.pi * 4475.0  # mean of the two quoted values

    def __post_init__(self):
        if self.tau_m <= 0:
            raise ValueError("tau_m must be positive")
        if self.gamma_oop < 0 or self.gamma_ip < 0:
            raise ValueError("heating rates must be nonnegative")
        if self.n_max < 2 or self.n_max_ip < 2:
            raise ValueError("n_max must be >= 2")


@dataclass(frozen=True)
class CollapseSet:
    """Collapse operators with their rates folded into the normalization."""

    space: HilbertSpace | None
    operators: tuple[np.ndarray, ...]


def qutrit_collapse(
    noise: NoiseModelQutrit, space: HilbertSpace | None = None
) -> CollapseSet:
    """L_k = sqrt(1/tau_k) (|0><0| - |k><k|) for k = 1, 2."""
    ops = []
    for level, tau in ((1, noise.tau1), (2, noise.tau2)):
        l = np.zeros((3, 3), dtype=complex)
        l[0, 0] = 1.0
        l[level, level] = -1.0
        ops.append(math.sqrt(1.0 / tau) * l)
    return CollapseSet(space, tuple(ops))


def mode_collapse(tau_m: float, gamma: float, n_max: int) -> list[np.ndarray]:
    """Dephasing sqrt(2/tau_m) a^dag a plus heating sqrt(G) a^dag, sqrt(G) a."""
    a = np.diag(np.sqrt(np.arange(1, n_max, dtype=float)), k=1).astype(complex)
    ops = [math.sqrt(2.0 / tau_m) * (a.conj().T @ a)]
    if gamma > 0:
        ops.append(math.sqrt(gamma) * a.conj().T)
        ops.append(math.sqrt(gamma) * a)
    return ops


def lindblad_rhs(
    rho: np.ndarray, h: np.ndarray | None, collapse: Sequence[np.ndarray]
) -> np.ndarray:
    """-i[H, rho] + sum_k (L rho L^dag - 1/2 {L^dag L, rho})."""
    if h is None:
        out = np.zeros_like(rho)
    else:
        hr = h @ rho
        out = -1j * (hr - hr.conj().T)
    for l in collapse:
        ld = l.conj().T
        ldl = ld @ l
        out += l @ rho @ ld - 0.5 * (ldl @ rho + rho @ ldl)
    return out


def integrate_master(
    segments: Sequence[tuple[np.ndarray | Callable[[float], np.ndarray], float]],
    rho0: np.ndarray,
    collapse: Sequence[np.ndarray],
    dt_max: float | Callable[[float], float],
) -> tuple[np.ndarray, list[np.ndarray]]:
    """Fixed-step RK4 over piecewise-defined Hamiltonian segments.

    Each segment is (H, duration) where H is a constant matrix or a callable
    of segment-local time.  Returns the final density matrix and the state
    after each segment boundary.  Trace drift beyond 1e-6 raises.
    """
    rho = np.array(rho0, dtype=complex)
    boundaries = []
    for h, duration in segments:
        if duration < 0:
            raise LindbladError("segment duration must be nonnegative")
        if duration > 0:
            step_cap = dt_max(duration) if callable(dt_max) else dt_max
            n = max(1, int(math.ceil(duration / step_cap)))
            dt = duration / n
            time_dependent = callable(h)
            for k in range(n):
                t = k * dt
                if time_dependent:
                    h1 = h(t)
                    h2 = h(t + 0.5 * dt)
                    h3 = h(t + dt)
                else:
                    h1 = h2 = h3 = h  # constant matrix or None (free decay)
                k1 = lindblad_rhs(rho, h1, collapse)
                k2 = lindblad_rhs(rho + 0.5 * dt * k1, h2, collapse)
                k3 = lindblad_rhs(rho + 0.5 * dt * k2, h2, collapse)
                k4 = lindblad_rhs(rho + dt * k3, h3, collapse)
                rho = rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            drift = abs(np.trace(rho).real - 1.0)
            if drift > TRACE_GUARD:
                raise TraceDriftError(
                    f"trace drift {drift:.3e} exceeds {TRACE_GUARD}; reduce dt_max"
                )
        boundaries.append(rho.copy())
    return rho, boundaries


def simulate_qutrit_noisy(
    schedule: PulseSchedule, noise: NoiseModelQutrit, psi0: QuantumState
) -> Trajectory:
    """P_pred of the qutrit platform: pulses under always-on dephasing.

    Each pulse applies the fixed-Rabi two-level Hamiltonian whose rotation
    equals the exact compiled sub-exponential, for the pulse's lab-frame
    duration, with zero idle time between pulses.
    """
    collapse = qutrit_collapse(noise, None).operators
    rho = np.outer(psi0.amplitudes, psi0.amplitudes.conj())
    pops = [np.diag(rho).real.copy()]
    by_step: dict[int, list] = {}
    for p in schedule.pulses:
        by_step.setdefault(p.step_index, []).append(p)
    for j in range(1, schedule.n_steps + 1):
        segs = []
        for p in by_step.get(j, ()):
            if p.duration == 0.0:
                continue
            theta = schedule.generator_angle(p)
            omega_eff = 2.0 * theta / p.duration  # rad/s
            h = 0.5 * omega_eff * pulse_generator(p)
            segs.append((h, p.duration))
        if segs:
            rho, _ = integrate_master(segs, rho, collapse, lambda d: d / 100.0)
        pops.append(np.diag(rho).real.copy())
    times = np.arange(schedule.n_steps + 1) * schedule.step_sim_dt_fs
    pops = np.clip(np.array(pops), 0.0, None)
    return Trajectory(
        times, schedule.labels, pops, "noisy_pred", closed_system=False
    )


def ms_segment(
    chi: float, sideband_rabi: float, n_max: int
) -> tuple[Callable[[float], np.ndarray], float]:
    """Single-loop Molmer-Sorensen segment realizing exp(-i chi XX).

    Returns the bichromatic interaction-picture Hamiltonian on the
    qubits (x) oop-mode space as a callable of segment-local time (s), and
    the loop-closure duration tau_g = 2 pi / |delta| with the detuning
    chosen so the accumulated geometric phase yields the XX angle chi.
    """
    if sideband_rabi <= 0:
        raise LindbladError("sideband Rabi frequency must be positive")
    if chi == 0.0:
        return (lambda t: np.zeros((4 * n_max, 4 * n_max), dtype=complex)), 0.0
    # The loop's geometric phase accumulates with the sign of 1/delta, so
    # the detuning sign follows chi to realize exp(-i chi XX).
    delta = math.copysign(1.0, chi) * sideband_rabi * math.sqrt(math.pi / abs(chi))
    tau_g = 2.0 * math.pi / abs(delta)
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    s_x = np.kron(sx, np.eye(2)) + np.kron(np.eye(2), sx)
    a = np.diag(np.sqrt(np.arange(1, n_max, dtype=float)), k=1).astype(complex)
    sxa = np.kron(s_x, a)
    sxad = np.kron(s_x, a.conj().T)

    def h(t: float) -> np.ndarray:
        return 0.5 * sideband_rabi * (np.exp(1j * delta * t) * sxa
                                      + np.exp(-1j * delta * t) * sxad)

    return h, tau_g


def _top_fock_population(rho: np.ndarray, n_qubit_dims: int, n_max: int) -> float:
    p = np.diag(rho).real.reshape(n_qubit_dims, n_max)
    return float(p[:, -1].sum())


def simulate_qubit_noisy(
    circuit: QubitCircuit,
    noise: NoiseModelQubit,
    psi0_3: QuantumState,
    dt_divisor: int = 200,
) -> Trajectory:
    """P_pred of the two-qubit platform.

    Single-qubit gates are instantaneous perfect unitaries; each XX gate is
    a Molmer-Sorensen segment on the out-of-phase mode integrated under
    motional dephasing and heating.  The in-phase mode evolves under its own
    noise only (it is never driven), which factorizes exactly from the
    qubit (x) oop state.  Qubit populations come from the partial trace;
    the |11> leakage is reported as a fourth column.
    """
    n = noise.n_max
    psi4 = np.zeros(4, dtype=complex)
    psi4[:3] = psi0_3.amplitudes
    mode_vac = np.zeros((n, n), dtype=complex)
    mode_vac[0, 0] = 1.0
    rho = np.kron(np.outer(psi4, psi4.conj()), mode_vac)  # qubits (x) oop
    rho_ip = np.zeros((noise.n_max_ip, noise.n_max_ip), dtype=complex)
    rho_ip[0, 0] = 1.0
    collapse_oop = [np.kron(np.eye(4), l)
                    for l in mode_collapse(noise.tau_m, noise.gamma_oop, n)]
    collapse_ip = mode_collapse(noise.tau_m, noise.gamma_ip, noise.n_max_ip)

    def qubit_pops(r: np.ndarray) -> np.ndarray:
        return np.diag(r).real.reshape(4, n).sum(axis=1)

    pops = [qubit_pops(rho)]
    by_step: dict[int, list] = {}
    for g in circuit.gates:
        by_step.setdefault(g.step_index, []).append(g)
    for j in range(1, circuit.n_steps + 1):
        for g in by_step.get(j, ()):
            if isinstance(g, Rotation):
                u = np.kron(gate_unitary4(g), np.eye(n))
                rho = u @ rho @ u.conj().T
            elif isinstance(g, XXGate):
                h, tau_g = ms_segment(g.chi, noise.sideband_rabi, n)
                if tau_g == 0.0:
                    continue
                rho, _ = integrate_master(
                    [(h, tau_g)], rho, collapse_oop, tau_g / dt_divisor
                )
                rho_ip, _ = integrate_master(
                    [(None, tau_g)], rho_ip,
                    collapse_ip, tau_g / dt_divisor,
                )
                top = _top_fock_population(rho, 4, n) + rho_ip[-1, -1].real
                if top > TOP_FOCK_GUARD:
                    raise FockCutoffError(
                        f"top Fock level population {top:.3e} exceeds "
                        f"{TOP_FOCK_GUARD}; raise n_max"
                    )
            else:
                raise LindbladError(f"unknown gate {type(g)!r}")
        pops.append(qubit_pops(rho))
    times = np.arange(circuit.n_steps + 1) * circuit.step_sim_dt_fs
    labels = ET_LABELS + ("leak11",)
    pops = np.clip(np.array(pops), 0.0, None)
    return Trajectory(times, labels, pops, "noisy_pred", closed_system=False)


def total_ms_duration(circuit: QubitCircuit, sideband_rabi: float) -> float:
    """Summed lab-frame duration (s) of all MS segments in a circuit."""
    total = 0.0
    for g in circuit.gates:
        if isinstance(g, XXGate) and g.chi != 0.0:
            _, tau_g = ms_segment(g.chi, sideband_rabi, 2)
            total += tau_g
    return total
