"""PLET model construction: Hamiltonians, drive field, initial states,
interaction-picture terms, and the two-qubit embedding.

Two three-level bases are used: (G, D1, D2) for the photo-excitation step
and (A, D1, D2) for the electron-transfer step.  In both, level 0 is the
state coupled to the two donors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .constants import HBAR_EV_FS, dipole_field_coupling_ev
from .qcore import HilbertSpace, Operator, QuantumState, QcoreError, single_space

PHOTO_LABELS = ("G", "D1", "D2")
ET_LABELS = ("A", "D1", "D2")

PHOTO_SPACE = single_space("qutrit_photo", 3)
ET_SPACE = single_space("qutrit_et", 3)
QUBIT_SPACE = HilbertSpace((("q1", 2), ("q2", 2)))


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class PletModel:
    """Molecular and drive parameters.

    Energies in eV, dipoles in e*a0, field amplitude in V/m, polarization
    angle in radians, laser angular frequency in rad/fs (None selects
    resonance with the G -> D1 transition).
    """

    omega_G: float = 0.0
    omega_D1: float = 3.89
    omega_D2: float = 3.89
    omega_A: float = 3.01
    mu1: float = 4.58
    mu2: float = 4.58
    V1: float = 0.25
    V2: float = 0.25
    E0: float = 2.2e9
    theta: float = 3.0 * math.pi / 4.0
    omega_L: float | None = None

    def __post_init__(self):
        for name in ("omega_G", "omega_D1", "omega_D2", "omega_A", "V1", "V2"):
            if not np.isfinite(getattr(self, name)):
                raise ModelError(f"{name} must be finite")
        if self.mu1 < 0 or self.mu2 < 0 or self.E0 < 0:
            raise ModelError("mu1, mu2 and E0 must be nonnegative")
        if not (0.0 <= self.theta < 2.0 * math.pi):
            raise ModelError(f"theta must lie in [0, 2pi), got {self.theta}")

    @property
    def omega_laser(self) -> float:
        """Laser angular frequency in rad/fs."""
        if self.omega_L is not None:
            return self.omega_L
        return (self.omega_D1 - self.omega_G) / HBAR_EV_FS


@dataclass(frozen=True)
class StateLabelMap:
    """Bijective mapping from molecular labels to device levels 0, 1, 2."""

    labels: tuple[str, str, str]

    def __post_init__(self):
        if len(set(self.labels)) != 3:
            raise ModelError(f"label map must be bijective, got {self.labels}")

    def level(self, label: str) -> int:
        return self.labels.index(label)


PHOTO_MAP = StateLabelMap(PHOTO_LABELS)
ET_MAP = StateLabelMap(ET_LABELS)


@dataclass(frozen=True)
class InteractionTerm:
    """One off-diagonal coupling in the interaction picture.

    Couples level 0 of the device to `level`; the hermitian-conjugate
    partner is implied.  `amplitude(t)` is the signed real coupling in eV
    and `phase(t)` the interaction-picture phase in radians (t in fs).
    """

    level: int
    amplitude: Callable[[float], float]
    phase: Callable[[float], float]

    def value(self, t: float) -> complex:
        return self.amplitude(t) * np.exp(1j * self.phase(t))


def field_at(model: PletModel, t: float) -> tuple[float, float]:
    """(Ex, Ey) in V/m at simulated time t (fs)."""
    s = math.sin(model.omega_laser * t)
    return (model.E0 * math.cos(model.theta) * s, model.E0 * math.sin(model.theta) * s)


def h1_lab(model: PletModel, t: float) -> Operator:
    """Photo-excitation Hamiltonian at time t, basis (G, D1, D2), eV."""
    ex, ey = field_at(model, t)
    c1 = dipole_field_coupling_ev(model.mu1, ex)
    c2 = dipole_field_coupling_ev(model.mu2, ey)
    m = np.array(
        [
            [model.omega_G, c1, c2],
            [c1, model.omega_D1, 0.0],
            [c2, 0.0, model.omega_D2],
        ],
        dtype=complex,
    )
    return Operator(PHOTO_SPACE, m, hermitian=True)


def h2_lab(model: PletModel) -> Operator:
    """Electron-transfer Hamiltonian, basis (A, D1, D2), raw energies, eV."""
    m = np.array(
        [
            [model.omega_A, model.V1, model.V2],
            [model.V1, model.omega_D1, 0.0],
            [model.V2, 0.0, model.omega_D2],
        ],
        dtype=complex,
    )
    return Operator(ET_SPACE, m, hermitian=True)


def shift_energies(model: PletModel) -> tuple[float, float, float]:
    """Zero-mean shifted energies (wt_A, wt_D1, wt_D2) for the ET step."""
    mean = (model.omega_A + model.omega_D1 + model.omega_D2) / 3.0
    return (model.omega_A - mean, model.omega_D1 - mean, model.omega_D2 - mean)


def h2_shifted(model: PletModel) -> Operator:
    """ET Hamiltonian with the zero-mean diagonal (identical dynamics)."""
    wa, w1, w2 = shift_energies(model)
    m = np.array(
        [
            [wa, model.V1, model.V2],
            [model.V1, w1, 0.0],
            [model.V2, 0.0, w2],
        ],
        dtype=complex,
    )
    return Operator(ET_SPACE, m, hermitian=True)


def interaction_terms_h1(model: PletModel) -> tuple[InteractionTerm, InteractionTerm]:
    """Interaction-picture couplings G<->D1 and G<->D2 of the drive."""
    conv = dipole_field_coupling_ev
    m = model

    def amp1(t: float) -> float:
        return conv(m.mu1, field_at(m, t)[0])

    def amp2(t: float) -> float:
        return conv(m.mu2, field_at(m, t)[1])

    def phase1(t: float) -> float:
        return (m.omega_G - m.omega_D1) * t / HBAR_EV_FS

    def phase2(t: float) -> float:
        return (m.omega_G - m.omega_D2) * t / HBAR_EV_FS

    return (InteractionTerm(1, amp1, phase1), InteractionTerm(2, amp2, phase2))


def interaction_terms_h2(model: PletModel) -> tuple[InteractionTerm, InteractionTerm]:
    """Interaction-picture couplings A<->D1 and A<->D2.

    Phases depend only on energy differences, so shifted and raw energies
    give identical terms.
    """
    m = model
    return (
        InteractionTerm(
            1, lambda t: m.V1, lambda t: (m.omega_A - m.omega_D1) * t / HBAR_EV_FS
        ),
        InteractionTerm(
            2, lambda t: m.V2, lambda t: (m.omega_A - m.omega_D2) * t / HBAR_EV_FS
        ),
    )


def initial_superposition(phi: float, space: HilbertSpace = ET_SPACE) -> QuantumState:
    """(|D1> + e^{i phi} |D2>)/sqrt(2), zero amplitude on level 0."""
    amps = np.array([0.0, 1.0, np.exp(1j * phi)], dtype=complex) / math.sqrt(2.0)
    return QuantumState(space, amps)


def qubit_embed(h2: Operator) -> Operator:
    """Embed the shifted 3x3 ET Hamiltonian in the two-qubit space.

    Maps A, D1, D2 to |00>, |01>, |10>; |11> is decoupled with zero energy,
    which requires a traceless (energy-shifted) input.
    """
    m3 = h2.matrix
    if abs(np.trace(m3)) > 1e-9:
        raise ModelError(
            "qubit_embed requires shifted (traceless) energies; "
            f"got trace {np.trace(m3).real:.3e}"
        )
    m4 = np.zeros((4, 4), dtype=complex)
    m4[:3, :3] = m3
    return Operator(QUBIT_SPACE, m4, hermitian=True)


_SX = np.array([[0, 1], [1, 0]], dtype=complex)
_SZ = np.array([[1, 0], [0, -1]], dtype=complex)
_ID = np.eye(2, dtype=complex)

# The seven Paulis spanning PLET-form Hamiltonians, in a fixed order.
PAULI_BASIS: tuple[tuple[str, np.ndarray], ...] = (
    ("xi", np.kron(_SX, _ID)),
    ("ix", np.kron(_ID, _SX)),
    ("zi", np.kron(_SZ, _ID)),
    ("iz", np.kron(_ID, _SZ)),
    ("xz", np.kron(_SX, _SZ)),
    ("zx", np.kron(_SZ, _SX)),
    ("zz", np.kron(_SZ, _SZ)),
)

_ALL_PAULIS_1Q = {"i": _ID, "x": _SX, "y": np.array([[0, -1j], [1j, 0]]), "z": _SZ}


@dataclass(frozen=True)
class PauliDecomposition:
    """Coefficients (eV) on {sx*I, I*sx, sz*I, I*sz, sx*sz, sz*sx, sz*sz}."""

    xi: float
    ix: float
    zi: float
    iz: float
    xz: float
    zx: float
    zz: float

    def coefficient(self, name: str) -> float:
        return getattr(self, name)

    def reconstruct(self) -> np.ndarray:
        m = np.zeros((4, 4), dtype=complex)
        for name, p in PAULI_BASIS:
            m += self.coefficient(name) * p
        return m


def pauli_decompose(h4: Operator) -> PauliDecomposition:
    """Hilbert-Schmidt projection of a PLET-form 4x4 Hamiltonian.

    Coefficients c_i = Tr(P_i H)/4 on the seven supported Paulis; a
    projection above 1e-9 onto any other two-qubit Pauli rejects the input.
    """
    m = h4.matrix
    if m.shape != (4, 4):
        raise ModelError("pauli_decompose expects a 4x4 operator")
    if abs(np.trace(m)) > 1e-9:
        raise ModelError("pauli_decompose expects a traceless operator")
    coeffs = {name: (np.trace(p @ m) / 4.0).real for name, p in PAULI_BASIS}
    supported = {name for name, _ in PAULI_BASIS}
    for n1, p1 in _ALL_PAULIS_1Q.items():
        for n2, p2 in _ALL_PAULIS_1Q.items():
            name = n1 + n2
            if name == "ii" or name in supported:
                continue
            c = np.trace(np.kron(p1, p2) @ m) / 4.0
            if abs(c) > 1e-9:
                raise ModelError(
                    f"input is not of PLET form: projection {abs(c):.3e} on {name}"
                )
    return PauliDecomposition(**coeffs)
