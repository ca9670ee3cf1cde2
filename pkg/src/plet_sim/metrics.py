"""Scalar observables and error metrics.

Time averages and RMS distances run over Trotter steps 1..N; the prepared
state at step 0 is excluded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .oracle import Trajectory


class MetricError(ValueError):
    pass


@dataclass(frozen=True)
class ScanResult:
    """One scalar metric set per scan value, values strictly monotone."""

    variable: str
    values: np.ndarray
    metrics: dict[str, np.ndarray]

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        diffs = np.diff(v)
        if v.size > 1 and not (np.all(diffs > 0) or np.all(diffs < 0)):
            raise MetricError("scan values must be strictly monotone")
        for name, col in self.metrics.items():
            if np.asarray(col).shape != v.shape:
                raise MetricError(f"metric {name!r} length mismatch")


def normalized_population_difference(p_d1: float, p_d2: float) -> float:
    """(P(D1) - P(D2)) / (P(D1) + P(D2))."""
    s = p_d1 + p_d2
    if s <= 0:
        raise MetricError("normalized population difference undefined for zero donors")
    return (p_d1 - p_d2) / s


def relative_phase(beta1: complex, beta2: complex) -> float:
    """Phase phi in [0, 2pi) with e^{i phi} = (beta2/|beta2|)/(beta1/|beta1|)."""
    if abs(beta1) <= 1e-12 or abs(beta2) <= 1e-12:
        raise MetricError("relative phase undefined for vanishing amplitude")
    phi = math.fmod(np.angle(beta2) - np.angle(beta1), 2.0 * math.pi)
    return phi + 2.0 * math.pi if phi < 0 else phi


def donor_deviation(traj: Trajectory, state: str) -> float:
    """RMS deviation of a donor population from 0.5 over steps 1..N."""
    p = traj.column(state)[1:]
    if p.size < 1:
        raise MetricError("trajectory has no steps past the prepared state")
    return float(np.sqrt(np.mean((p - 0.5) ** 2)))


def mean_distance(traj_a: Trajectory, traj_b: Trajectory, state: str) -> float:
    """RMS pointwise distance between two step-aligned trajectories."""
    if traj_a.times_fs.shape != traj_b.times_fs.shape or not np.allclose(
        traj_a.times_fs, traj_b.times_fs, rtol=0, atol=1e-9
    ):
        raise MetricError("trajectories are not on the same sample grid")
    a = traj_a.column(state)[1:]
    b = traj_b.column(state)[1:]
    return float(np.sqrt(np.mean((a - b) ** 2)))


def time_averaged_population(traj: Trajectory, state: str) -> float:
    """Arithmetic mean of a population over steps 1..N."""
    p = traj.column(state)[1:]
    if p.size < 1:
        raise MetricError("trajectory has no steps past the prepared state")
    return float(np.mean(p))


def fwhm_of_feature(scan: ScanResult, metric: str, center: float | None = None) -> float:
    """Full width at half maximum of a single peak or dip.

    The baseline is the metric value at the feature center; the width is
    measured between the two half-maximum crossings of |metric - baseline|
    nearest the center, with linear interpolation.  The center defaults to
    whichever interior extremum deviates more from the scan-edge level.
    """
    x = scan.values
    y = np.asarray(scan.metrics[metric], dtype=float)
    if x.size < 3:
        raise MetricError("scan too short for FWHM extraction")
    if center is None:
        edge = 0.5 * (y[0] + y[-1])
        i_min, i_max = int(np.argmin(y)), int(np.argmax(y))
        i_c = i_min if abs(y[i_min] - edge) > abs(y[i_max] - edge) else i_max
    else:
        i_c = int(np.argmin(np.abs(x - center)))
    baseline = y[i_c]
    d = np.abs(y - baseline)
    half = 0.5 * d.max()
    if half <= 0:
        raise MetricError("feature has zero height")

    def cross(direction: int) -> float:
        i = i_c
        while 0 <= i + direction < x.size:
            j = i + direction
            if d[j] >= half:
                # Linear interpolation between i and j.
                frac = (half - d[i]) / (d[j] - d[i])
                return float(x[i] + frac * (x[j] - x[i]))
            i = j
        raise MetricError("half-maximum crossing not bracketed within scan range")

    lo = cross(-1)
    hi = cross(+1)
    return abs(hi - lo)
