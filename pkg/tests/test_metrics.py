"""Scan metrics: population ratios, phases, deviations, and feature widths."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from plet_sim.metrics import (
    MetricError,
    ScanResult,
    donor_deviation,
    fwhm_of_feature,
    mean_distance,
    normalized_population_difference,
    relative_phase,
    time_averaged_population,
)
from plet_sim.model import ET_LABELS
from plet_sim.oracle import Trajectory


def traj(columns: np.ndarray, closed: bool = False) -> Trajectory:
    columns = np.asarray(columns, dtype=float)
    return Trajectory(
        np.arange(len(columns), dtype=float),
        ET_LABELS,
        columns,
        "external",
        closed_system=closed,
    )


class TestScanResult:
    def test_rejects_non_monotone(self):
        with pytest.raises(MetricError):
            ScanResult("theta", np.array([0.0, 2.0, 1.0]), {})

    def test_rejects_length_mismatch(self):
        with pytest.raises(MetricError):
            ScanResult("theta", np.array([0.0, 1.0]), {"rho": np.array([1.0])})

    def test_descending_allowed(self):
        s = ScanResult("ratio", np.array([1.05, 1.0, 0.95]), {})
        assert s.values[0] == 1.05


class TestNormalizedPopulationDifference:
    def test_pure_d1(self):
        assert normalized_population_difference(0.3, 0.0) == 1.0

    def test_balanced(self):
        assert normalized_population_difference(0.21, 0.21) == 0.0

    def test_cos_two_theta_form(self):
        # With P(D1) ~ cos^2(theta), P(D2) ~ sin^2(theta) the difference
        # is cos(2 theta) regardless of overall excitation strength.
        for theta in (0.3, 1.0, 2.5):
            p1 = 0.07 * math.cos(theta) ** 2
            p2 = 0.07 * math.sin(theta) ** 2
            assert normalized_population_difference(p1, p2) == pytest.approx(
                math.cos(2 * theta), abs=1e-12
            )

    def test_zero_total_rejected(self):
        with pytest.raises(MetricError):
            normalized_population_difference(0.0, 0.0)


class TestRelativePhase:
    def test_quarter_turn(self):
        assert relative_phase(1.0, 1j) == pytest.approx(math.pi / 2)

    def test_antisymmetry_mod_two_pi(self):
        b1, b2 = 0.3 + 0.1j, -0.2 + 0.5j
        a = relative_phase(b1, b2)
        b = relative_phase(b2, b1)
        assert math.fmod(a + b, 2 * math.pi) == pytest.approx(0.0, abs=1e-12)

    def test_magnitude_invariant(self):
        assert relative_phase(2.0, 3j) == relative_phase(0.01, 0.05j)

    def test_vanishing_amplitude_rejected(self):
        with pytest.raises(MetricError):
            relative_phase(0.0, 1.0)

    @given(st.floats(-math.pi, math.pi, allow_nan=False))
    def test_recovers_constructed_phase(self, phi):
        got = relative_phase(1.0, np.exp(1j * phi))
        expect = phi + 2 * math.pi if phi < 0 else phi
        assert got == pytest.approx(expect, abs=1e-9) or got == pytest.approx(
            expect - 2 * math.pi, abs=1e-9
        )


class TestDonorDeviation:
    def test_constant_three_quarters(self):
        t = traj([[0, 0.5, 0.5]] + [[0, 0.75, 0.25]] * 10)
        assert donor_deviation(t, "D1") == pytest.approx(0.25)

    def test_ignores_prepared_state(self):
        t = traj([[1, 0, 0], [0, 0.5, 0.5]])
        assert donor_deviation(t, "D1") == 0.0

    def test_single_point_rejected(self):
        with pytest.raises(MetricError):
            donor_deviation(traj([[0, 0.5, 0.5]]), "D1")


class TestMeanDistance:
    def test_identity(self):
        t = traj(np.random.default_rng(0).dirichlet(np.ones(3), size=8))
        assert mean_distance(t, t, "A") == 0.0

    def test_symmetry_and_triangle(self):
        rng = np.random.default_rng(1)
        a, b, c = (traj(rng.dirichlet(np.ones(3), size=6)) for _ in range(3))
        assert mean_distance(a, b, "D1") == mean_distance(b, a, "D1")
        assert mean_distance(a, c, "D1") <= (
            mean_distance(a, b, "D1") + mean_distance(b, c, "D1") + 1e-12
        )

    def test_grid_mismatch_rejected(self):
        a = traj([[1, 0, 0], [0, 1, 0]])
        b = Trajectory(
            np.array([0.0, 2.0]), ET_LABELS,
            np.array([[1.0, 0, 0], [0, 1.0, 0]]), "external", closed_system=False,
        )
        with pytest.raises(MetricError):
            mean_distance(a, b, "A")


class TestTimeAveragedPopulation:
    def test_mean_excludes_initial(self):
        t = traj([[1, 0, 0], [0.2, 0.8, 0], [0.4, 0.6, 0]])
        assert time_averaged_population(t, "A") == pytest.approx(0.3)


class TestFwhm:
    def test_triangular_peak(self):
        x = np.linspace(-1, 1, 201)
        y = np.maximum(0.0, 1.0 - np.abs(x))
        s = ScanResult("ratio", x, {"m": y})
        assert fwhm_of_feature(s, "m", center=0.0) == pytest.approx(1.0, abs=1e-9)

    def test_rescaling_x_doubles_width(self):
        x = np.linspace(-1, 1, 401)
        y = np.exp(-(x ** 2) / 0.02)
        w1 = fwhm_of_feature(ScanResult("r", x, {"m": y}), "m", center=0.0)
        w2 = fwhm_of_feature(ScanResult("r", 2 * x, {"m": y}), "m", center=0.0)
        assert w2 == pytest.approx(2 * w1, rel=1e-9)

    def test_dip_from_center_baseline(self):
        x = np.linspace(0.9, 1.1, 201)
        y = 0.5 - 0.4 * np.exp(-((x - 1.0) ** 2) / (2 * 0.01 ** 2))
        w = fwhm_of_feature(ScanResult("r", x, {"m": y}), "m", center=1.0)
        assert w == pytest.approx(2 * math.sqrt(2 * math.log(2)) * 0.01, rel=1e-3)

    def test_flat_feature_rejected(self):
        s = ScanResult("r", np.linspace(0, 1, 11), {"m": np.ones(11)})
        with pytest.raises(MetricError):
            fwhm_of_feature(s, "m")

    def test_unbracketed_crossing_rejected(self):
        x = np.linspace(0, 1, 11)
        s = ScanResult("r", x, {"m": x})  # monotone ramp, no return to half-max
        with pytest.raises(MetricError):
            fwhm_of_feature(s, "m", center=1.0)
