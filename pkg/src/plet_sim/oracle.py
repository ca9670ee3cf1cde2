"""Exact reference dynamics.

Static Hamiltonians are evolved in closed form through an eigendecomposition.
Time-dependent Hamiltonians are evolved by a time-ordered product of exact
sub-exponentials with adaptive substep doubling; each substep uses a
fourth-order commutator-free Magnus scheme (two Gauss-Legendre samples, two
exponentials), which keeps every substep exactly unitary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .constants import HBAR_EV_FS
from .qcore import Operator, QuantumState

POP_SUM_TOL = 1e-9

#: Provenance tags a trajectory may carry.
PROVENANCES = ("oracle", "trotter_ideal", "noisy_pred", "external")


class OracleError(ValueError):
    pass


class ConvergenceError(RuntimeError):
    """Adaptive refinement failed to reach the requested tolerance."""


@dataclass(frozen=True)
class Trajectory:
    """Populations over labeled states, sampled at increasing times (fs)."""

    times_fs: np.ndarray
    labels: tuple[str, ...]
    populations: np.ndarray  # shape (n_samples, n_states)
    provenance: str
    closed_system: bool = True

    def __post_init__(self):
        t = np.asarray(self.times_fs, dtype=float)
        p = np.asarray(self.populations, dtype=float)
        t.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "times_fs", t)
        object.__setattr__(self, "populations", p)
        if self.provenance not in PROVENANCES:
            raise OracleError(f"unknown provenance {self.provenance!r}")
        if p.ndim != 2 or p.shape != (t.size, len(self.labels)):
            raise OracleError(f"population array shape {p.shape} inconsistent")
        if t.size > 1 and not np.all(np.diff(t) > 0):
            raise OracleError("sample times must be strictly increasing")
        if np.any(p < -POP_SUM_TOL):
            raise OracleError("negative population")
        sums = p.sum(axis=1)
        if np.any(sums > 1.0 + POP_SUM_TOL):
            raise OracleError(f"population sum exceeds 1: max {sums.max()}")
        if self.closed_system and np.any(np.abs(sums - 1.0) > POP_SUM_TOL):
            raise OracleError("closed-system populations must sum to 1")

    def column(self, label: str) -> np.ndarray:
        return self.populations[:, self.labels.index(label)]


def evolve_static(
    h: Operator,
    psi0: QuantumState,
    times: Sequence[float],
    labels: tuple[str, ...],
    hbar: float = HBAR_EV_FS,
) -> Trajectory:
    """psi(t) = exp(-i h t / hbar) psi0 for a time-independent Hamiltonian."""
    times = np.asarray(times, dtype=float)
    evals, vecs = np.linalg.eigh(h.matrix)
    c0 = vecs.conj().T @ psi0.amplitudes
    phases = np.exp(-1j * np.outer(times, evals) / hbar)
    amps = (phases * c0) @ vecs.T  # rows: psi(t)
    return Trajectory(times, labels, np.abs(amps) ** 2, "oracle")


def final_state_static(
    h: Operator, psi0: QuantumState, t: float, hbar: float = HBAR_EV_FS
) -> np.ndarray:
    evals, vecs = np.linalg.eigh(h.matrix)
    return vecs @ (np.exp(-1j * evals * t / hbar) * (vecs.conj().T @ psi0.amplitudes))


# Gauss-Legendre nodes and the CF4 exponent weights (Blanes-Moan scheme).
_GL1 = 0.5 - math.sqrt(3.0) / 6.0
_GL2 = 0.5 + math.sqrt(3.0) / 6.0
_A1 = 0.25 + math.sqrt(3.0) / 6.0
_A2 = 0.25 - math.sqrt(3.0) / 6.0


def _propagate_amplitudes(
    h_of_t: Callable[[float], np.ndarray],
    psi0: np.ndarray,
    sample_times: np.ndarray,
    n_sub: int,
    hbar: float,
    scheme: str,
) -> np.ndarray:
    """Amplitudes at each sample time; n_sub substeps per sample interval."""
    dim = psi0.size
    edges = sample_times
    out = np.empty((edges.size, dim), dtype=complex)
    out[0] = psi0
    psi = psi0
    for i in range(edges.size - 1):
        t0, t1 = edges[i], edges[i + 1]
        dt = (t1 - t0) / n_sub
        starts = t0 + dt * np.arange(n_sub)
        if scheme == "midpoint":
            hs = np.stack([h_of_t(t + 0.5 * dt) for t in starts])
            gens = hs * (dt / hbar)
        elif scheme == "cf4":
            h_a = np.stack([h_of_t(t + _GL1 * dt) for t in starts])
            h_b = np.stack([h_of_t(t + _GL2 * dt) for t in starts])
            first = (_A1 * h_a + _A2 * h_b) * (dt / hbar)
            second = (_A2 * h_a + _A1 * h_b) * (dt / hbar)
            # Chronological order: apply `first` then `second`.
            gens = np.concatenate(
                [first[:, None], second[:, None]], axis=1
            ).reshape(-1, dim, dim)
        else:
            raise OracleError(f"unknown scheme {scheme!r}")
        evals, vecs = np.linalg.eigh(gens)
        phases = np.exp(-1j * evals)
        for k in range(gens.shape[0]):
            v = vecs[k]
            psi = v @ (phases[k] * (v.conj().T @ psi))
        out[i + 1] = psi
    return out


def evolve_timedep_amplitudes(
    h_of_t: Callable[[float], np.ndarray],
    psi0: QuantumState,
    T: float,
    n_samples: int,
    n_sub_init: int = 16,
    tol: float = 1e-8,
    max_doublings: int = 14,
    hbar: float = HBAR_EV_FS,
    scheme: str = "cf4",
) -> tuple[np.ndarray, np.ndarray]:
    """(sample_times, amplitudes) of a time-dependent hermitian Hamiltonian.

    Samples the state at the n_samples + 1 uniform boundaries of [0, T].
    The substep count per sample interval starts at n_sub_init and doubles
    until the largest population change between refinements is below tol.
    """
    sample_times = np.linspace(0.0, T, n_samples + 1)
    n_sub = max(1, n_sub_init)
    amps = _propagate_amplitudes(h_of_t, psi0.amplitudes, sample_times, n_sub, hbar, scheme)
    pops = np.abs(amps) ** 2
    for _ in range(max_doublings):
        n_sub *= 2
        amps = _propagate_amplitudes(
            h_of_t, psi0.amplitudes, sample_times, n_sub, hbar, scheme
        )
        new_pops = np.abs(amps) ** 2
        change = np.max(np.abs(new_pops - pops))
        pops = new_pops
        if change < tol:
            return sample_times, amps
    raise ConvergenceError(
        f"evolve_timedep did not converge below {tol} after {max_doublings} "
        f"doublings (last n_sub={n_sub}, last change={change:.3e})"
    )


def evolve_timedep(
    h_of_t: Callable[[float], np.ndarray],
    psi0: QuantumState,
    T: float,
    labels: tuple[str, ...],
    n_samples: int,
    n_sub_init: int = 16,
    tol: float = 1e-8,
    max_doublings: int = 14,
    hbar: float = HBAR_EV_FS,
    scheme: str = "cf4",
) -> Trajectory:
    """Population trajectory variant of evolve_timedep_amplitudes."""
    times, amps = evolve_timedep_amplitudes(
        h_of_t, psi0, T, n_samples, n_sub_init, tol, max_doublings, hbar, scheme
    )
    return Trajectory(times, labels, np.abs(amps) ** 2, "oracle")


def final_amplitudes_timedep(
    h_of_t: Callable[[float], np.ndarray],
    psi0: QuantumState,
    T: float,
    n_sub_total: int,
    hbar: float = HBAR_EV_FS,
    scheme: str = "cf4",
) -> np.ndarray:
    """End-of-window amplitudes with a fixed total substep count."""
    edges = np.array([0.0, T])
    return _propagate_amplitudes(
        h_of_t, psi0.amplitudes, edges, n_sub_total, hbar, scheme
    )[-1]


def sample_at_steps(traj: Trajectory, T: float, N: int) -> Trajectory:
    """Restrict a trajectory to the Trotter-step boundaries j*T/N, j=0..N."""
    targets = np.linspace(0.0, T, N + 1)
    idx = []
    for t in targets:
        j = int(np.argmin(np.abs(traj.times_fs - t)))
        if abs(traj.times_fs[j] - t) > 1e-9 * max(1.0, T):
            raise OracleError(f"step boundary {t} fs not present in trajectory")
        idx.append(j)
    return Trajectory(
        targets,
        traj.labels,
        traj.populations[idx],
        traj.provenance,
        closed_system=traj.closed_system,
    )
