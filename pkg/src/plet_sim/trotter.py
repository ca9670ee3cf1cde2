"""Second-order Trotterization and compilation to pulse schedules / circuits.

A plan splits each step at midpoint time t_j = (j - 1/2) T/N into the
symmetric sub-sequence [term1, T/2N], [term2, T/N], [term1, T/2N].  Qutrit
compilation maps each sub-evolution onto a fixed-Rabi pulse; qubit
compilation maps the Pauli-decomposed 4x4 Hamiltonian onto single-qubit
rotations and Hadamard-conjugated XX interactions.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .constants import HBAR_EV_FS
from .model import (
    ET_LABELS,
    ET_SPACE,
    PHOTO_LABELS,
    PHOTO_SPACE,
    InteractionTerm,
    PauliDecomposition,
    PletModel,
    interaction_terms_h1,
    interaction_terms_h2,
)
from .oracle import Trajectory
from .qcore import Operator, QuantumState, expm_hermitian

TRANSITIONS = ("01", "02")


class TrotterError(ValueError):
    pass


@dataclass(frozen=True)
class TrotterPlan:
    """Discretized evolution window with its two interaction terms."""

    step: str  # "photoexcitation" | "electron_transfer"
    labels: tuple[str, str, str]
    T: float  # fs
    N: int
    terms: tuple[InteractionTerm, InteractionTerm]

    def __post_init__(self):
        if self.N < 1:
            raise TrotterError(f"N must be >= 1, got {self.N}")
        if self.T <= 0:
            raise TrotterError(f"T must be positive, got {self.T}")

    @property
    def dt(self) -> float:
        return self.T / self.N

    def midpoint(self, j: int) -> float:
        """t_j = (j - 1/2) T/N for step j in 1..N."""
        if not 1 <= j <= self.N:
            raise TrotterError(f"step index {j} outside 1..{self.N}")
        return (j - 0.5) * self.dt

    def segments(self, j: int) -> tuple[tuple[int, float], ...]:
        """Ordered (term index, duration fraction of T/N) for step j."""
        self.midpoint(j)  # bounds check
        return ((0, 0.5 * self.dt), (1, self.dt), (0, 0.5 * self.dt))

    @property
    def space(self):
        return PHOTO_SPACE if self.step == "photoexcitation" else ET_SPACE

    @property
    def boundary_times(self) -> np.ndarray:
        return np.linspace(0.0, self.T, self.N + 1)


def build_plan(model: PletModel, step: str, T: float, N: int) -> TrotterPlan:
    if step == "photoexcitation":
        return TrotterPlan(step, PHOTO_LABELS, T, N, interaction_terms_h1(model))
    if step == "electron_transfer":
        return TrotterPlan(step, ET_LABELS, T, N, interaction_terms_h2(model))
    raise TrotterError(f"unknown step {step!r}")


def _sub_generator(term: InteractionTerm, t: float, dim: int = 3) -> np.ndarray:
    """A(t) e^{i phase(t)} |0><level| + h.c. as a dense hermitian matrix."""
    m = np.zeros((dim, dim), dtype=complex)
    v = term.value(t)
    m[0, term.level] = v
    m[term.level, 0] = np.conj(v)
    return m


def step_unitary(plan: TrotterPlan, j: int, hbar: float = HBAR_EV_FS) -> Operator:
    """Product of the three exact sub-exponentials at midpoint t_j."""
    t_j = plan.midpoint(j)
    u = np.eye(3, dtype=complex)
    for term_idx, dur in plan.segments(j):
        g = _sub_generator(plan.terms[term_idx], t_j)
        u = expm_hermitian(g, -dur / hbar) @ u
    return Operator(plan.space, u)


def trotter_trajectory(
    plan: TrotterPlan, psi0: QuantumState, hbar: float = HBAR_EV_FS
) -> Trajectory:
    """Populations after each prefix product U_j ... U_1 (P_Tro)."""
    psi = psi0.amplitudes
    pops = [np.abs(psi) ** 2]
    for j in range(1, plan.N + 1):
        psi = step_unitary(plan, j, hbar).matrix @ psi
        pops.append(np.abs(psi) ** 2)
    return Trajectory(plan.boundary_times, plan.labels, np.array(pops), "trotter_ideal")


@dataclass(frozen=True)
class Pulse:
    """One fixed-Rabi pulse: transition, phase, lab-frame duration."""

    transition: str  # "01" | "02"
    rabi: float  # rad/s
    phase: float  # rad
    duration: float  # s
    step_index: int
    term_id: int

    def __post_init__(self):
        if self.transition not in TRANSITIONS:
            raise TrotterError(f"unknown transition {self.transition!r}")
        if self.duration < 0:
            raise TrotterError("pulse duration must be nonnegative")

    @property
    def rotation_angle(self) -> float:
        return self.rabi * self.duration


@dataclass(frozen=True)
class PulseSchedule:
    """Ordered pulse sequence compiled from a Trotter plan."""

    pulses: tuple[Pulse, ...]
    convention: str  # "half" | "full"
    labels: tuple[str, str, str]
    n_steps: int
    step_sim_dt_fs: float

    @property
    def total_duration(self) -> float:
        return float(sum(p.duration for p in self.pulses))

    def generator_angle(self, pulse: Pulse) -> float:
        """Rotation angle of the exact sub-exponential this pulse realizes."""
        return pulse.rotation_angle if self.convention == "half" else 0.5 * pulse.rotation_angle

    def to_json(self) -> str:
        return json.dumps(
            {
                "convention": self.convention,
                "labels": list(self.labels),
                "n_steps": self.n_steps,
                "step_sim_dt_fs": self.step_sim_dt_fs,
                "total_duration_s": self.total_duration,
                "pulses": [
                    {
                        "transition": p.transition,
                        "rabi_rad_per_s": p.rabi,
                        "phase_rad": p.phase,
                        "duration_s": p.duration,
                        "step_index": p.step_index,
                        "term_id": p.term_id,
                    }
                    for p in self.pulses
                ],
            },
            indent=2,
        )

    @staticmethod
    def from_json(text: str) -> "PulseSchedule":
        d = json.loads(text)
        pulses = tuple(
            Pulse(
                transition=p["transition"],
                rabi=p["rabi_rad_per_s"],
                phase=p["phase_rad"],
                duration=p["duration_s"],
                step_index=p["step_index"],
                term_id=p["term_id"],
            )
            for p in d["pulses"]
        )
        return PulseSchedule(
            pulses, d["convention"], tuple(d["labels"]), d["n_steps"], d["step_sim_dt_fs"]
        )


def compile_qutrit(
    plan: TrotterPlan,
    rabi_01: float,
    rabi_02: float,
    convention: str = "half",
    hbar: float = HBAR_EV_FS,
) -> PulseSchedule:
    """Map a plan onto fixed-Rabi pulses (three per step).

    Negative sampled amplitudes fold into an extra pi on the pulse phase so
    durations stay nonnegative.  Under the `half` convention the pulse's
    Rabi angle equals A*dt/hbar (the paper's duration accounting); under
    `full` it equals 2*A*dt/hbar, the literal reading of the fixed-Rabi
    two-level Hamiltonian.  Playback always applies the exact
    sub-exponential, so only duration bookkeeping differs.
    """
    if rabi_01 <= 0 or rabi_02 <= 0:
        raise TrotterError("Rabi frequencies must be positive")
    if convention not in ("half", "full"):
        raise TrotterError(f"unknown convention {convention!r}")
    rabis = {1: rabi_01, 2: rabi_02}
    pulses = []
    for j in range(1, plan.N + 1):
        t_j = plan.midpoint(j)
        for term_idx, dur in plan.segments(j):
            term = plan.terms[term_idx]
            amp = term.amplitude(t_j)
            phase = term.phase(t_j)
            if amp < 0:
                amp, phase = -amp, phase + math.pi
            phase = math.fmod(phase, 2.0 * math.pi)
            if phase < 0:
                phase += 2.0 * math.pi
            theta_gen = amp * dur / hbar
            rabi_angle = theta_gen if convention == "half" else 2.0 * theta_gen
            rabi = rabis[term.level]
            pulses.append(
                Pulse(
                    transition=f"0{term.level}",
                    rabi=rabi,
                    phase=phase,
                    duration=rabi_angle / rabi,
                    step_index=j,
                    term_id=term_idx,
                )
            )
    return PulseSchedule(tuple(pulses), convention, plan.labels, plan.N, plan.dt)


def pulse_generator(pulse: Pulse, dim: int = 3) -> np.ndarray:
    """Unit-amplitude generator e^{i phi}|0><a| + h.c. of a pulse."""
    level = int(pulse.transition[1])
    m = np.zeros((dim, dim), dtype=complex)
    m[0, level] = np.exp(1j * pulse.phase)
    m[level, 0] = np.exp(-1j * pulse.phase)
    return m


def simulate_schedule_ideal(schedule: PulseSchedule, psi0: QuantumState) -> Trajectory:
    """Noise-free playback, populations sampled at step boundaries."""
    psi = psi0.amplitudes
    pops = [np.abs(psi) ** 2]
    by_step: dict[int, list[Pulse]] = {}
    for p in schedule.pulses:
        by_step.setdefault(p.step_index, []).append(p)
    for j in range(1, schedule.n_steps + 1):
        for p in by_step.get(j, ()):
            theta = schedule.generator_angle(p)
            if theta != 0.0:
                psi = expm_hermitian(pulse_generator(p), -theta) @ psi
        pops.append(np.abs(psi) ** 2)
    times = np.arange(schedule.n_steps + 1) * schedule.step_sim_dt_fs
    return Trajectory(times, schedule.labels, np.array(pops), "trotter_ideal")


# --- Two-qubit gate compilation -------------------------------------------

_SX = np.array([[0, 1], [1, 0]], dtype=complex)
_SZ = np.array([[1, 0], [0, -1]], dtype=complex)
_ID2 = np.eye(2, dtype=complex)


@dataclass(frozen=True)
class Rotation:
    """Single-qubit rotation exp(-i angle/2 * sigma_axis) on `target`."""

    target: int  # 0 | 1
    axis: str  # "x" | "z"
    angle: float
    step_index: int
    role: str = "single"  # "single" | "had_pre" | "had_post"

    def unitary2(self) -> np.ndarray:
        s = _SX if self.axis == "x" else _SZ
        return math.cos(self.angle / 2) * _ID2 - 1j * math.sin(self.angle / 2) * s


@dataclass(frozen=True)
class XXGate:
    """Two-qubit interaction exp(-i chi sigma_x x sigma_x)."""

    chi: float
    step_index: int
    term_id: str = ""  # which Pauli term this realizes ("xz"|"zx"|"zz")

    def unitary4(self) -> np.ndarray:
        xx = np.kron(_SX, _SX)
        return math.cos(self.chi) * np.eye(4) - 1j * math.sin(self.chi) * xx


@dataclass(frozen=True)
class QubitCircuit:
    gates: tuple[object, ...]
    n_steps: int
    step_sim_dt_fs: float


def _euler_zxz(u: np.ndarray) -> tuple[float, float, float]:
    """ZXZ angles (a, b, c) with Rz(a) Rx(b) Rz(c) = u, for u = exp(-i(hx*sx+hz*sz)t).

    Such unitaries are symmetric, so a = c.
    """
    # u = [[cos(b/2) e^{-i a}, -i sin(b/2)], [-i sin(b/2), cos(b/2) e^{i a}]]
    s = (1j * u[0, 1]).real
    b = 2.0 * math.asin(max(-1.0, min(1.0, s)))
    c00 = u[0, 0]
    if abs(c00) < 1e-15:
        a = 0.0
    else:
        a = -math.atan2(c00.imag, c00.real)
    return (a, b, a)


_HADAMARD_ANGLES = (math.pi / 2, math.pi / 2, math.pi / 2)  # Rz Rx Rz ~ H


def _hadamard_gates(target: int, step: int, role: str) -> list[Rotation]:
    a, b, c = _HADAMARD_ANGLES
    return [
        Rotation(target, "z", a, step, role),
        Rotation(target, "x", b, step, role),
        Rotation(target, "z", c, step, role),
    ]


def compile_qubit(
    decompositions: Sequence[PauliDecomposition],
    dt_fs: float,
    substeps: int = 1,
    hbar: float = HBAR_EV_FS,
) -> QubitCircuit:
    """Compile per-step Pauli decompositions into a two-qubit circuit.

    Within each (sub)step of simulated length d, the grouping is the
    symmetric split S(d/2) XZ(d/2) ZX(d/2) ZZ(d) ZX(d/2) XZ(d/2) S(d/2),
    where S is the exact exponential of all four single-Pauli terms (the
    per-qubit parts commute across qubits) emitted as ZXZ Euler rotations,
    and each two-qubit term is an XX gate conjugated with Hadamards mapping
    sigma_z factors onto sigma_x.
    """
    if substeps < 1:
        raise TrotterError("substeps must be >= 1")
    gates: list[object] = []
    d = dt_fs / substeps

    def emit_single(dec: PauliDecomposition, dur: float, step: int):
        # qubit 0 carries (xi, zi), qubit 1 carries (ix, iz); exact exponential.
        for target, (cx, cz) in ((0, (dec.xi, dec.zi)), (1, (dec.ix, dec.iz))):
            if cx == 0.0 and cz == 0.0:
                continue
            u = expm_hermitian(cx * _SX + cz * _SZ, -dur / hbar)
            a, b, c = _euler_zxz(u)
            for axis, ang in (("z", a), ("x", b), ("z", c)):
                if ang != 0.0:
                    gates.append(Rotation(target, axis, ang, step))

    def emit_xx_term(name: str, coeff: float, dur: float, step: int):
        if coeff == 0.0:
            return
        chi = coeff * dur / hbar
        # Hadamard-conjugate every sigma_z factor onto sigma_x.
        targets = [i for i, ch in enumerate(name) if ch == "z"]
        for tgt in targets:
            gates.extend(_hadamard_gates(tgt, step, "had_pre"))
        gates.append(XXGate(chi, step, term_id=name))
        for tgt in targets:
            gates.extend(_hadamard_gates(tgt, step, "had_post"))

    for j, dec in enumerate(decompositions, start=1):
        for _ in range(substeps):
            emit_single(dec, d / 2, j)
            emit_xx_term("xz", dec.xz, d / 2, j)
            emit_xx_term("zx", dec.zx, d / 2, j)
            emit_xx_term("zz", dec.zz, d, j)
            emit_xx_term("zx", dec.zx, d / 2, j)
            emit_xx_term("xz", dec.xz, d / 2, j)
            emit_single(dec, d / 2, j)
    return QubitCircuit(tuple(gates), len(decompositions), dt_fs)


def gate_unitary4(gate) -> np.ndarray:
    if isinstance(gate, Rotation):
        u2 = gate.unitary2()
        return np.kron(u2, _ID2) if gate.target == 0 else np.kron(_ID2, u2)
    if isinstance(gate, XXGate):
        return gate.unitary4()
    raise TrotterError(f"unknown gate type {type(gate)!r}")


def circuit_step_unitaries(circuit: QubitCircuit) -> list[np.ndarray]:
    """The 4x4 unitary of each Trotter step of an ideal playback."""
    by_step: dict[int, list] = {}
    for g in circuit.gates:
        by_step.setdefault(g.step_index, []).append(g)
    out = []
    for j in range(1, circuit.n_steps + 1):
        u = np.eye(4, dtype=complex)
        for g in by_step.get(j, ()):
            u = gate_unitary4(g) @ u
        out.append(u)
    return out


def simulate_circuit_ideal(circuit: QubitCircuit, psi0_3: QuantumState) -> Trajectory:
    """Noise-free playback on the embedded 4-state space.

    The initial 3-level state occupies the (00, 01, 10) subspace; the |11>
    population is reported as a leak column.
    """
    psi = np.zeros(4, dtype=complex)
    psi[:3] = psi0_3.amplitudes
    pops = [np.abs(psi) ** 2]
    for u in circuit_step_unitaries(circuit):
        psi = u @ psi
        pops.append(np.abs(psi) ** 2)
    times = np.arange(circuit.n_steps + 1) * circuit.step_sim_dt_fs
    labels = ET_LABELS + ("leak11",)
    return Trajectory(times, labels, np.array(pops), "trotter_ideal")
