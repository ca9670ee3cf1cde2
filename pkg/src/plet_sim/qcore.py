"""Dense complex linear algebra over small labeled composite Hilbert spaces.

Basis ordering is factor-major: the first factor is the most significant
digit of the composite index.  All types are immutable after construction
and all operations are pure.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .constants import HBAR_EV_FS

HERMITIAN_TOL = 1e-12
DM_HERMITIAN_TOL = 1e-10
DM_TRACE_TOL = 1e-9
DM_EIG_TOL = 1e-9
KET_NORM_TOL = 1e-12


class QcoreError(ValueError):
    """Contract violation in a qcore type or operation."""


@dataclass(frozen=True)
class HilbertSpace:
    """Ordered tensor product of labeled finite-dimensional factors."""

    factors: tuple[tuple[str, int], ...]

    def __post_init__(self):
        factors = tuple((str(l), int(d)) for l, d in self.factors)
        object.__setattr__(self, "factors", factors)
        labels = [l for l, _ in factors]
        if len(set(labels)) != len(labels):
            raise QcoreError(f"duplicate factor labels: {labels}")
        for l, d in factors:
            if d < 2:
                raise QcoreError(f"factor {l!r} has dimension {d} < 2")

    @property
    def dim(self) -> int:
        return int(np.prod([d for _, d in self.factors]))

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(l for l, _ in self.factors)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(d for _, d in self.factors)

    def axis(self, label: str) -> int:
        for i, (l, _) in enumerate(self.factors):
            if l == label:
                return i
        raise QcoreError(f"unknown factor label {label!r} in {self.labels}")


def single_space(label: str, dim: int) -> HilbertSpace:
    return HilbertSpace(((label, dim),))


def _as_matrix(m) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise QcoreError(f"expected a square matrix, got shape {m.shape}")
    m.setflags(write=False)
    return m


@dataclass(frozen=True)
class Operator:
    """A square matrix on a labeled space, optionally flagged hermitian."""

    space: HilbertSpace
    matrix: np.ndarray
    hermitian: bool = False

    def __post_init__(self):
        m = _as_matrix(self.matrix)
        object.__setattr__(self, "matrix", m)
        if m.shape[0] != self.space.dim:
            raise QcoreError(
                f"matrix dimension {m.shape[0]} != space dimension {self.space.dim}"
            )
        if self.hermitian:
            dev = np.max(np.abs(m - m.conj().T))
            if dev >= HERMITIAN_TOL:
                raise QcoreError(f"hermitian flag set but ||M - M^dag||_max = {dev:.3e}")


@dataclass(frozen=True)
class QuantumState:
    """Unit-norm complex state vector over a labeled space."""

    space: HilbertSpace
    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=complex).ravel()
        a.setflags(write=False)
        object.__setattr__(self, "amplitudes", a)
        if a.size != self.space.dim:
            raise QcoreError(f"amplitude length {a.size} != dimension {self.space.dim}")
        norm = np.linalg.norm(a)
        if abs(norm - 1.0) > KET_NORM_TOL:
            raise QcoreError(f"state norm {norm} deviates from 1 beyond {KET_NORM_TOL}")


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace, positive-semidefinite matrix over a labeled space."""

    space: HilbertSpace
    matrix: np.ndarray

    def __post_init__(self):
        m = _as_matrix(self.matrix)
        object.__setattr__(self, "matrix", m)
        if m.shape[0] != self.space.dim:
            raise QcoreError(
                f"matrix dimension {m.shape[0]} != space dimension {self.space.dim}"
            )
        herm = np.max(np.abs(m - m.conj().T))
        if herm > DM_HERMITIAN_TOL:
            raise QcoreError(f"density matrix not hermitian: {herm:.3e}")
        tr = np.trace(m).real
        if abs(tr - 1.0) > DM_TRACE_TOL:
            raise QcoreError(f"density matrix trace {tr} deviates from 1")
        evals = np.linalg.eigvalsh(m)
        if evals.min() < -DM_EIG_TOL:
            raise QcoreError(f"density matrix min eigenvalue {evals.min():.3e}")


def pure_density(state: QuantumState) -> DensityMatrix:
    a = state.amplitudes
    return DensityMatrix(state.space, np.outer(a, a.conj()))


def tensor(a: Operator, b: Operator) -> Operator:
    """Kronecker product on the concatenated space."""
    space = HilbertSpace(a.space.factors + b.space.factors)
    return Operator(space, np.kron(a.matrix, b.matrix), hermitian=a.hermitian and b.hermitian)


def matrix_exponential_step(h: Operator, dt: float, hbar: float = HBAR_EV_FS) -> Operator:
    """exp(-i h dt / hbar) for a hermitian generator, via eigendecomposition.

    dt carries the same time unit as hbar's denominator (fs for the default
    eV*fs constant).
    """
    if not h.hermitian:
        raise QcoreError("matrix_exponential_step requires a hermitian-flagged operator")
    if not np.isfinite(dt):
        raise QcoreError(f"dt must be finite, got {dt}")
    u = expm_hermitian(h.matrix, -dt / hbar)
    return Operator(h.space, u)


def expm_hermitian(h: np.ndarray, scale: float) -> np.ndarray:
    """exp(i * scale * h) for hermitian h (plain ndarray fast path)."""
    evals, vecs = np.linalg.eigh(h)
    phases = np.exp(1j * scale * evals)
    return (vecs * phases) @ vecs.conj().T


def partial_trace(rho: DensityMatrix, keep: Sequence[str]) -> DensityMatrix:
    """Reduced density matrix over the kept factors (original factor order)."""
    reduced, space = partial_trace_raw(rho.matrix, rho.space, keep)
    return DensityMatrix(space, reduced)


def partial_trace_raw(
    matrix: np.ndarray, space: HilbertSpace, keep: Sequence[str]
) -> tuple[np.ndarray, HilbertSpace]:
    """partial_trace on a raw ndarray; skips DensityMatrix validation."""
    keep_axes = sorted(space.axis(l) for l in keep)
    if len(set(keep_axes)) != len(keep):
        raise QcoreError(f"duplicate labels in keep={list(keep)}")
    dims = space.dims
    n = len(dims)
    t = np.asarray(matrix).reshape(dims + dims)
    # Trace out the complement, highest axis first so lower indices stay valid.
    for ax in sorted((i for i in range(n) if i not in keep_axes), reverse=True):
        t = np.trace(t, axis1=ax, axis2=ax + t.ndim // 2)
    kept = tuple(space.factors[i] for i in keep_axes)
    d = int(np.prod([dims[i] for i in keep_axes]))
    return t.reshape(d, d), HilbertSpace(kept)


def populations(obj, keep: Sequence[str] | None = None) -> np.ndarray:
    """Probability vector: |amplitude|^2 for kets, diagonal for density matrices.

    With `keep`, marginalizes onto the listed factors first.
    """
    if isinstance(obj, QuantumState):
        p = np.abs(obj.amplitudes) ** 2
        space = obj.space
    elif isinstance(obj, DensityMatrix):
        if keep is not None:
            obj = partial_trace(obj, keep)
            keep = None
        p = np.diag(obj.matrix).real
        space = obj.space
    else:
        raise QcoreError(f"unsupported input type {type(obj)!r}")
    if keep is not None:
        keep_axes = sorted(space.axis(l) for l in keep)
        t = p.reshape(space.dims)
        for ax in sorted((i for i in range(len(space.dims)) if i not in keep_axes), reverse=True):
            t = t.sum(axis=ax)
        p = t.ravel()
    return p
