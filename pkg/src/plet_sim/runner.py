"""Scenario orchestration: the five reference experiments as file pipelines.

Every scenario is deterministic (no randomness anywhere), so identical
configurations produce byte-identical CSV/JSON outputs.  Trajectory CSVs
use the schema ``step_index,sim_time_fs,P_G_or_A,P_D1,P_D2[,P_leak11]``
with 12 significant digits; summary JSON files carry the scalar metrics.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .config import ScenarioConfig
from .lindblad import simulate_qubit_noisy, simulate_qutrit_noisy, total_ms_duration
from .metrics import (
    MetricError,
    ScanResult,
    donor_deviation,
    fwhm_of_feature,
    mean_distance,
    normalized_population_difference,
    relative_phase,
    time_averaged_population,
)
from .model import (
    ET_LABELS,
    PHOTO_LABELS,
    PHOTO_SPACE,
    PletModel,
    h1_lab,
    h2_lab,
    h2_shifted,
    initial_superposition,
    pauli_decompose,
    qubit_embed,
)
from .oracle import (
    OracleError,
    Trajectory,
    evolve_static,
    evolve_timedep_amplitudes,
)
from .qcore import QuantumState
from .trotter import (
    build_plan,
    compile_qubit,
    compile_qutrit,
    simulate_circuit_ideal,
    simulate_schedule_ideal,
    trotter_trajectory,
)

ET_STATES = ("A", "D1", "D2")
FEATURED_DEGENERACY_RATIO = 0.974  # ratio at which the near-dark regime is inspected


class RunnerError(RuntimeError):
    pass


class ExternalDataError(ValueError):
    """Malformed external trajectory data; str(err) itemizes every problem."""

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__(
            "invalid external data:\n" + "\n".join(f"  - {p}" for p in problems)
        )


# --- Formatting and file I/O ------------------------------------------------


def _fmt(x: float) -> str:
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return f"{x:.12g}"


def trajectory_header(labels: tuple[str, ...]) -> str:
    base = "step_index,sim_time_fs,P_G_or_A,P_D1,P_D2"
    if labels[0] not in ("G", "A") or labels[1:3] != ("D1", "D2"):
        raise RunnerError(f"unsupported trajectory labels {labels}")
    if len(labels) == 3:
        return base
    if len(labels) == 4 and labels[3] == "leak11":
        return base + ",P_leak11"
    raise RunnerError(f"unsupported trajectory labels {labels}")


def write_trajectory_csv(path: Path, traj: Trajectory) -> Path:
    lines = [trajectory_header(traj.labels)]
    for j, (t, row) in enumerate(zip(traj.times_fs, traj.populations)):
        lines.append(",".join([str(j), _fmt(float(t))] + [_fmt(float(p)) for p in row]))
    path.write_text("\n".join(lines) + "\n")
    return path


def write_scan_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence[float]]) -> Path:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(float(v)) for v in row))
    path.write_text("\n".join(lines) + "\n")
    return path


def write_summary_json(path: Path, summary: dict) -> Path:
    path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return path


def ingest_external(path: str | Path, labels: tuple[str, ...] = ET_LABELS) -> Trajectory:
    """Parse and validate a measured-population CSV (provenance `external`)."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ExternalDataError([f"cannot read {path}: {e}"])
    lines = [ln for ln in text.splitlines() if ln.strip()]
    problems: list[str] = []
    expected_header = trajectory_header(labels)
    if not lines:
        raise ExternalDataError([f"{path}: empty file"])
    if lines[0].strip() != expected_header:
        problems.append(f"row 1: header {lines[0]!r} != {expected_header!r}")
    n_cols = 2 + len(labels)
    times, pops = [], []
    for i, line in enumerate(lines[1:], start=2):
        fields = line.split(",")
        if len(fields) != n_cols:
            problems.append(f"row {i}: expected {n_cols} columns, got {len(fields)}")
            continue
        try:
            step = int(fields[0])
            t = float(fields[1])
            p = [float(f) for f in fields[2:]]
        except ValueError as e:
            problems.append(f"row {i}: {e}")
            continue
        if step != len(times):
            problems.append(
                f"row {i}: step index {step} breaks the contiguous 0..N sequence"
            )
        bad = [v for v in p if not (0.0 <= v <= 1.0)]
        if bad:
            problems.append(f"row {i}: population {bad[0]} outside [0, 1]")
        times.append(t)
        pops.append(p)
    if problems:
        raise ExternalDataError([f"{path}:"] + problems)
    try:
        return Trajectory(
            np.array(times), labels, np.array(pops), "external", closed_system=False
        )
    except OracleError as e:
        raise ExternalDataError([f"{path}: {e}"])


def _map_points(fn: Callable, values: Sequence, threads: int) -> list:
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, values))
    return [fn(v) for v in values]


def _render(cfg: ScenarioConfig, fn_name: str, *args):
    if not cfg.figures:
        return []
    from . import report

    return getattr(report, fn_name)(*args)


# --- Shared per-point computations ------------------------------------------


def photo_pair(model: PletModel, T: float, N: int):
    """(theory, trotter, final oracle amplitudes) of the photo-excitation step."""
    plan = build_plan(model, "photoexcitation", T, N)
    psi0 = QuantumState(PHOTO_SPACE, np.array([1.0, 0.0, 0.0], dtype=complex))
    tro = trotter_trajectory(plan, psi0)

    def h(t: float) -> np.ndarray:
        return h1_lab(model, t).matrix

    times, amps = evolve_timedep_amplitudes(h, psi0, T, N)
    th = Trajectory(times, PHOTO_LABELS, np.abs(amps) ** 2, "oracle")
    return th, tro, amps[-1]


def et_pair(model: PletModel, phi: float, T: float, N: int):
    """(theory, trotter) of the electron-transfer step from (|D1>+e^{i phi}|D2>)/sqrt2."""
    plan = build_plan(model, "electron_transfer", T, N)
    psi0 = initial_superposition(phi)
    th = evolve_static(h2_lab(model), psi0, plan.boundary_times, ET_LABELS)
    tro = trotter_trajectory(plan, psi0)
    return th, tro


# --- Scenarios ---------------------------------------------------------------


def run_polar_scan(cfg: ScenarioConfig, threads: int = 1) -> dict:
    """Final-state polarization response of the photo-excitation step."""
    out = cfg.out_dir / "polar_scan"
    out.mkdir(parents=True, exist_ok=True)
    scan = cfg.scan
    thetas = np.linspace(scan.start, scan.stop, scan.points)
    T, N = cfg.trotter.photo.T_fs, cfg.trotter.photo.N

    def point(theta_deg: float) -> dict:
        model = replace(cfg.model, theta=math.radians(theta_deg % 360.0))
        th, tro, fin = photo_pair(model, T, N)
        p1, p2 = float(abs(fin[1]) ** 2), float(abs(fin[2]) ** 2)
        rho = normalized_population_difference(p1, p2) if p1 + p2 > 0 else math.nan
        try:
            phi = relative_phase(fin[1], fin[2])
        except MetricError:
            phi = math.nan
        return {
            "theta_deg": theta_deg,
            "rho": rho,
            "phi_rad": phi,
            "P_D1_final": p1,
            "P_D2_final": p2,
            "sigma_tro_D1": mean_distance(tro, th, "D1"),
            "sigma_tro_D2": mean_distance(tro, th, "D2"),
            "theory": th,
            "trotter": tro,
        }

    points = _map_points(point, thetas, threads)
    header = ["theta_deg", "rho", "phi_rad", "P_D1_final", "P_D2_final",
              "sigma_tro_D1", "sigma_tro_D2"]
    rows = [[p[k] for k in header] for p in points]
    paths = [write_scan_csv(out / "scan.csv", header, rows)]
    for p in points:
        tag = _fmt(p["theta_deg"]).replace(".", "p")
        paths.append(write_trajectory_csv(out / f"traj_theta_{tag}_theory.csv", p["theory"]))
        paths.append(write_trajectory_csv(out / f"traj_theta_{tag}_trotter.csv", p["trotter"]))
    summary = {
        "scenario": "polar_scan",
        "points": len(points),
        "T_fs": T,
        "n_steps": N,
        "sigma_tro_trial_mean": {
            "D1": float(np.mean([p["sigma_tro_D1"] for p in points])),
            "D2": float(np.mean([p["sigma_tro_D2"] for p in points])),
        },
    }
    paths.append(write_summary_json(out / "summary.json", summary))
    paths += _render(cfg, "render_polar_scan", out, points)
    return {"points": points, "summary": summary, "paths": paths}


def run_phase_scan(cfg: ScenarioConfig, threads: int = 1) -> dict:
    """Donor deviation and acceptor transfer vs initial relative phase."""
    out = cfg.out_dir / "phase_scan"
    out.mkdir(parents=True, exist_ok=True)
    scan = cfg.scan
    phis = np.linspace(scan.start, scan.stop, scan.points)
    T, N = cfg.trotter.et.T_fs, cfg.trotter.et.N

    def point(phi_deg: float) -> dict:
        th, tro = et_pair(cfg.model, math.radians(phi_deg), T, N)
        return {
            "phi_deg": phi_deg,
            "sigma1": donor_deviation(th, "D1"),
            "sigma2": donor_deviation(th, "D2"),
            "avg_A": time_averaged_population(th, "A"),
            "sigma_tro_A": mean_distance(tro, th, "A"),
            "sigma_tro_D1": mean_distance(tro, th, "D1"),
            "sigma_tro_D2": mean_distance(tro, th, "D2"),
            "theory": th,
            "trotter": tro,
        }

    points = _map_points(point, phis, threads)
    header = ["phi_deg", "sigma1", "sigma2", "avg_A",
              "sigma_tro_A", "sigma_tro_D1", "sigma_tro_D2"]
    rows = [[p[k] for k in header] for p in points]
    paths = [write_scan_csv(out / "scan.csv", header, rows)]
    featured = point(cfg.initial_phase_deg)
    paths.append(write_trajectory_csv(out / "et_theory.csv", featured["theory"]))
    paths.append(write_trajectory_csv(out / "et_trotter.csv", featured["trotter"]))
    summary = {
        "scenario": "phase_scan",
        "points": len(points),
        "T_fs": T,
        "n_steps": N,
        "featured_phi_deg": cfg.initial_phase_deg,
        "featured": {k: featured[k] for k in header[1:]},
        "sigma_tro_trial_mean": {
            s: float(np.mean([p[f"sigma_tro_{s}"] for p in points])) for s in ET_STATES
        },
    }
    paths.append(write_summary_json(out / "summary.json", summary))
    paths += _render(cfg, "render_phase_scan", out, points, featured)
    return {"points": points, "featured": featured, "summary": summary, "paths": paths}


def run_degeneracy_scan(cfg: ScenarioConfig, threads: int = 1) -> dict:
    """Interference-dip survival as the donor degeneracy is lifted."""
    out = cfg.out_dir / "degeneracy_scan"
    out.mkdir(parents=True, exist_ok=True)
    scan = cfg.scan
    T, N = cfg.trotter.et.T_fs, cfg.trotter.et.N
    phi = math.radians(cfg.initial_phase_deg)

    def point(ratio: float) -> dict:
        model = replace(cfg.model, omega_D2=ratio * cfg.model.omega_D1)
        th, tro = et_pair(model, phi, T, N)
        return {
            "ratio": ratio,
            "sigma1": donor_deviation(th, "D1"),
            "sigma2": donor_deviation(th, "D2"),
            "avg_A": time_averaged_population(th, "A"),
            "theory": th,
            "trotter": tro,
        }

    values = list(np.linspace(scan.start, scan.stop, scan.points))
    points = {v: p for v, p in zip(values, _map_points(point, values, threads))}
    # Bisection refinement around the half-maximum crossings of the dip.
    for _ in range(scan.refine_rounds):
        xs = sorted(points)
        y = np.array([points[x]["sigma1"] for x in xs])
        i_c = int(np.argmin(np.abs(np.array(xs) - 1.0)))
        d = np.abs(y - y[i_c])
        half = 0.5 * d.max()
        new = [0.5 * (xs[i] + xs[i + 1])
               for i in range(len(xs) - 1)
               if (d[i] - half) * (d[i + 1] - half) < 0]
        new = [x for x in new if x not in points]
        for x, p in zip(new, _map_points(point, new, threads)):
            points[x] = p
    xs = sorted(points)
    cols = {k: np.array([points[x][k] for x in xs]) for k in ("sigma1", "sigma2", "avg_A")}
    result = ScanResult("ratio", np.array(xs), cols)
    fwhm = fwhm_of_feature(result, "sigma1", center=1.0)
    featured_pt = point(FEATURED_DEGENERACY_RATIO)
    th_f, tro_f = featured_pt["theory"], featured_pt["trotter"]
    header = ["ratio", "sigma1", "sigma2", "avg_A"]
    rows = [[x, points[x]["sigma1"], points[x]["sigma2"], points[x]["avg_A"]] for x in xs]
    paths = [write_scan_csv(out / "scan.csv", header, rows)]
    paths.append(write_trajectory_csv(out / "featured_theory.csv", th_f))
    paths.append(write_trajectory_csv(out / "featured_trotter.csv", tro_f))
    summary = {
        "scenario": "degeneracy_scan",
        "points": len(xs),
        "T_fs": T,
        "n_steps": N,
        "phi_deg": cfg.initial_phase_deg,
        "fwhm_ratio": fwhm,
        "fwhm_percent": 100.0 * fwhm,
        "featured": {
            "ratio": FEATURED_DEGENERACY_RATIO,
            "max_acceptor": float(th_f.column("A").max()),
            "max_donor1_deviation": float(np.abs(th_f.column("D1") - 0.5).max()),
            "max_acceptor_trotter": float(tro_f.column("A").max()),
        },
    }
    paths.append(write_summary_json(out / "summary.json", summary))
    paths += _render(cfg, "render_degeneracy_scan", out, xs, cols, featured_pt)
    return {"scan": result, "summary": summary, "featured": featured_pt, "paths": paths}


def run_trotter_accuracy(
    cfg: ScenarioConfig,
    external_photo: Trajectory | None = None,
    external_et: Trajectory | None = None,
    threads: int = 1,
) -> dict:
    """Aligned theory/Trotter trajectories and the distance table for both steps.

    The per-state sigma_tro of the featured runs is reported alongside the
    trial-averaged value over the default polarization and phase grids (the
    tabulated convention averages over scan trials).
    """
    out = cfg.out_dir / "trotter_accuracy"
    out.mkdir(parents=True, exist_ok=True)
    tp, te = cfg.trotter.photo, cfg.trotter.et

    th_p, tro_p, _ = photo_pair(cfg.model, tp.T_fs, tp.N)
    th_e, tro_e = et_pair(cfg.model, math.radians(cfg.initial_phase_deg), te.T_fs, te.N)

    def trial_means_photo() -> dict:
        def one(theta_deg: float):
            model = replace(cfg.model, theta=math.radians(theta_deg % 360.0))
            th, tro, _ = photo_pair(model, tp.T_fs, tp.N)
            return [mean_distance(tro, th, s) for s in ("D1", "D2")]

        sig = np.array(_map_points(one, np.arange(0.0, 181.0, 5.0), threads))
        return {"D1": float(sig[:, 0].mean()), "D2": float(sig[:, 1].mean())}

    def trial_means_et() -> dict:
        def one(phi_deg: float):
            th, tro = et_pair(cfg.model, math.radians(phi_deg), te.T_fs, te.N)
            return [mean_distance(tro, th, s) for s in ET_STATES]

        sig = np.array(_map_points(one, np.arange(0.0, 361.0, 5.0), threads))
        return {s: float(sig[:, i].mean()) for i, s in enumerate(ET_STATES)}

    def sigma_exp(external: Trajectory | None, th: Trajectory, states) -> dict | None:
        if external is None:
            return None
        return {s: mean_distance(external, th, s) for s in states}

    summary = {
        "scenario": "trotter_accuracy",
        "photo": {
            "simulated_time_fs": tp.T_fs,
            "n_steps": tp.N,
            "sigma_tro": {s: mean_distance(tro_p, th_p, s) for s in ("D1", "D2")},
            "sigma_tro_trial_mean": trial_means_photo(),
            "sigma_exp": sigma_exp(external_photo, th_p, ("D1", "D2")),
        },
        "et": {
            "simulated_time_fs": te.T_fs,
            "n_steps": te.N,
            "sigma_tro": {s: mean_distance(tro_e, th_e, s) for s in ET_STATES},
            "sigma_tro_trial_mean": trial_means_et(),
            "sigma_exp": sigma_exp(external_et, th_e, ET_STATES),
        },
    }
    paths = [
        write_trajectory_csv(out / "photo_theory.csv", th_p),
        write_trajectory_csv(out / "photo_trotter.csv", tro_p),
        write_trajectory_csv(out / "et_theory.csv", th_e),
        write_trajectory_csv(out / "et_trotter.csv", tro_e),
        write_summary_json(out / "summary.json", summary),
    ]
    paths += _render(cfg, "render_trotter_accuracy", out,
                     (th_p, tro_p, external_photo), (th_e, tro_e, external_et))
    return {
        "photo": (th_p, tro_p),
        "et": (th_e, tro_e),
        "summary": summary,
        "paths": paths,
    }


def mean_absolute_deviation(pred: Trajectory, th: Trajectory, states=ET_STATES) -> float:
    """mean_{states, steps 1..N} |P_pred - P_th|."""
    if pred.times_fs.shape != th.times_fs.shape or not np.allclose(
        pred.times_fs, th.times_fs, rtol=0, atol=1e-9
    ):
        raise MetricError("trajectories are not on the same sample grid")
    devs = [np.abs(pred.column(s)[1:] - th.column(s)[1:]) for s in states]
    return float(np.mean(devs))


def run_noise_comparison(cfg: ScenarioConfig, threads: int = 1) -> dict:
    """Qutrit vs two-qubit platform predictions for the featured ET run."""
    out = cfg.out_dir / "noise_comparison"
    out.mkdir(parents=True, exist_ok=True)
    te = cfg.trotter.et
    model = cfg.model
    phi = math.radians(cfg.initial_phase_deg)
    plan = build_plan(model, "electron_transfer", te.T_fs, te.N)
    psi0 = initial_superposition(phi)
    th = evolve_static(h2_lab(model), psi0, plan.boundary_times, ET_LABELS)
    tro = trotter_trajectory(plan, psi0)

    schedule = compile_qutrit(
        plan,
        2.0 * math.pi * cfg.trotter.rabi_01_hz,
        2.0 * math.pi * cfg.trotter.rabi_02_hz,
        cfg.trotter.convention,
    )
    dec = pauli_decompose(qubit_embed(h2_shifted(model)))
    circuit = compile_qubit([dec] * te.N, plan.dt, cfg.trotter.qubit_substeps)

    if cfg.noise.enabled:
        qutrit_pred = simulate_qutrit_noisy(schedule, cfg.noise.qutrit, psi0)
        qubit_pred = simulate_qubit_noisy(circuit, cfg.noise.qubit, psi0)
    else:
        qutrit_pred = simulate_schedule_ideal(schedule, psi0)
        qubit_pred = simulate_circuit_ideal(circuit, psi0)

    summary = {
        "scenario": "noise_comparison",
        "T_fs": te.T_fs,
        "n_steps": te.N,
        "phi_deg": cfg.initial_phase_deg,
        "noise_enabled": cfg.noise.enabled,
        "qutrit": {
            "total_duration_ms": schedule.total_duration * 1e3,
            "pulse_count": len(schedule.pulses),
            "convention": schedule.convention,
            "mean_abs_deviation": mean_absolute_deviation(qutrit_pred, th),
        },
        "qubit": {
            "ms_total_duration_ms": total_ms_duration(
                circuit, cfg.noise.qubit.sideband_rabi
            ) * 1e3,
            "gate_count": len(circuit.gates),
            "mean_abs_deviation": mean_absolute_deviation(qubit_pred, th),
            "max_leak11": float(qubit_pred.column("leak11").max()),
        },
    }
    paths = [
        write_trajectory_csv(out / "theory.csv", th),
        write_trajectory_csv(out / "trotter.csv", tro),
        write_trajectory_csv(out / "qutrit_pred.csv", qutrit_pred),
        write_trajectory_csv(out / "qubit_pred.csv", qubit_pred),
        write_summary_json(out / "summary.json", summary),
    ]
    (out / "qutrit_schedule.json").write_text(schedule.to_json() + "\n")
    paths.append(out / "qutrit_schedule.json")
    paths += _render(cfg, "render_noise_comparison", out, th, qutrit_pred, qubit_pred)
    return {
        "theory": th,
        "trotter": tro,
        "qutrit_pred": qutrit_pred,
        "qubit_pred": qubit_pred,
        "schedule": schedule,
        "circuit": circuit,
        "summary": summary,
        "paths": paths,
    }


RUNNERS: dict[str, Callable] = {
    "polar_scan": run_polar_scan,
    "phase_scan": run_phase_scan,
    "degeneracy_scan": run_degeneracy_scan,
    "trotter_accuracy": run_trotter_accuracy,
    "noise_comparison": run_noise_comparison,
}
