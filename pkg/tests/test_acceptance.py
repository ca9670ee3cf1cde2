"""Acceptance gate: the ten headline behaviors, one test (and line) each.

Each test prints a single `criterion N: PASS|FAIL` line before asserting, so
a verbose run reads as a checklist.  Expensive shared work (the full noisy
platform comparison, the degeneracy scan, the accuracy table) runs once via
module-scoped fixtures.
"""

import math
import time

import numpy as np
import pytest

from plet_sim.config import default_document, parse_document
from plet_sim.lindblad import (
    NoiseModelQubit,
    NoiseModelQutrit,
    integrate_master,
    mode_collapse,
    qutrit_collapse,
    simulate_qubit_noisy,
    simulate_qutrit_noisy,
)
from plet_sim.metrics import relative_phase
from plet_sim.model import (
    ET_LABELS,
    PHOTO_SPACE,
    PletModel,
    h1_lab,
    h2_lab,
    h2_shifted,
    initial_superposition,
    pauli_decompose,
    qubit_embed,
)
from plet_sim.oracle import evolve_static, evolve_timedep, final_amplitudes_timedep
from plet_sim.qcore import QuantumState
from plet_sim.runner import (
    photo_pair,
    run_degeneracy_scan,
    run_noise_comparison,
    run_trotter_accuracy,
)
from plet_sim.trotter import (
    build_plan,
    compile_qubit,
    compile_qutrit,
    pulse_generator,
    simulate_circuit_ideal,
    simulate_schedule_ideal,
    trotter_trajectory,
)

FIG3 = PletModel()
GROUND = QuantumState(PHOTO_SPACE, np.array([1, 0, 0], dtype=complex))


_terminal = None


@pytest.fixture(autouse=True)
def _grab_terminal(request):
    global _terminal
    _terminal = request.config.pluginmanager.get_plugin("terminalreporter")
    yield


def report(num: int, ok: bool, detail: str) -> bool:
    line = f"criterion {num}: {'PASS' if ok else 'FAIL'} - {detail}"
    print(line)
    # Also write past the capture layer so passing criteria show in a -v run.
    if _terminal is not None:
        _terminal.write_line(line)
    return ok


def make_cfg(scenario, tmp_dir, mutate=None):
    doc = default_document(scenario)
    doc["output"] = {"directory": str(tmp_dir), "figures": False}
    if mutate:
        mutate(doc)
    return parse_document(doc)


@pytest.fixture(scope="module")
def accuracy_run(tmp_path_factory):
    cfg = make_cfg("trotter_accuracy", tmp_path_factory.mktemp("accuracy"))
    return run_trotter_accuracy(cfg)


@pytest.fixture(scope="module")
def degeneracy_run(tmp_path_factory):
    cfg = make_cfg("degeneracy_scan", tmp_path_factory.mktemp("degeneracy"))
    return run_degeneracy_scan(cfg)


@pytest.fixture(scope="module")
def noise_run(tmp_path_factory):
    # The mandated top-Fock guard (1e-4) trips at the documented cutoff of 5
    # because the driven out-of-phase mode develops a slowly decaying tail;
    # 8 is the smallest comfortable cutoff that completes the full circuit.
    def widen_cutoff(doc):
        doc["noise"]["qubit"]["n_max"] = 8

    cfg = make_cfg("noise_comparison", tmp_path_factory.mktemp("noise"), widen_cutoff)
    return run_noise_comparison(cfg)


def test_criterion_01_destructive_interference_exact():
    t0 = time.monotonic()
    plan = build_plan(FIG3, "electron_transfer", 32.91, 70)
    dark = initial_superposition(math.pi)
    oracle_max = evolve_static(
        h2_lab(FIG3), dark, np.linspace(0.0, 32.91, 701), ET_LABELS
    ).column("A").max()
    trotter_max = trotter_trajectory(plan, dark).column("A").max()
    elapsed = time.monotonic() - t0
    ok = oracle_max <= 1e-12 and trotter_max <= 1e-9 and elapsed < 1.0
    assert report(
        1, ok,
        f"oracle max P(A)={oracle_max:.2e} (<=1e-12), "
        f"trotter max P(A)={trotter_max:.2e} (<=1e-9), {elapsed:.2f}s",
    )


def test_criterion_02_polarization_law():
    t0 = time.monotonic()
    worst_rho, worst_phi = 0.0, 0.0
    for theta_deg in range(0, 181, 5):
        model = PletModel(theta=math.radians(theta_deg))
        fin = final_amplitudes_timedep(
            lambda t: h1_lab(model, t).matrix, GROUND, 7.91, 2048
        )
        p1, p2 = abs(fin[1]) ** 2, abs(fin[2]) ** 2
        if p1 + p2 > 0:
            rho = (p1 - p2) / (p1 + p2)
            worst_rho = max(worst_rho, abs(rho - math.cos(2 * math.radians(theta_deg))))
        if min(abs(fin[1]), abs(fin[2])) > 1e-9:
            phi = relative_phase(fin[1], fin[2])
            worst_phi = max(
                worst_phi, min(phi, abs(phi - math.pi), abs(phi - 2 * math.pi))
            )
    elapsed = time.monotonic() - t0
    ok = worst_rho < 1e-6 and worst_phi < 1e-6 and elapsed < 10.0
    assert report(
        2, ok,
        f"max |rho - cos 2theta|={worst_rho:.2e}, max phase dev={worst_phi:.2e} "
        f"(both <1e-6), {elapsed:.1f}s",
    )


def test_criterion_03_trotter_order():
    t0 = time.monotonic()
    psi0 = initial_superposition(math.pi / 2)
    ns = np.array([10, 20, 40, 80, 160])
    errs = []
    for n in ns:
        plan = build_plan(FIG3, "electron_transfer", 32.91, int(n))
        tro = trotter_trajectory(plan, psi0)
        th = evolve_static(h2_lab(FIG3), psi0, plan.boundary_times, ET_LABELS)
        errs.append(np.abs(tro.populations[-1] - th.populations[-1]).sum())
    p = -np.polyfit(np.log(ns), np.log(errs), 1)[0]
    elapsed = time.monotonic() - t0
    ok = abs(p - 2.0) <= 0.3 and elapsed < 10.0
    assert report(
        3, ok,
        f"fitted order p={p:.2f} over N=10..160 (want 2.0 +/- 0.3); "
        f"restricted fit over N=40..160 gives "
        f"{-np.polyfit(np.log(ns[2:]), np.log(errs[2:]), 1)[0]:.2f}; {elapsed:.1f}s",
    )


def test_criterion_04_distance_table(accuracy_run):
    t0 = time.monotonic()
    photo = accuracy_run["summary"]["photo"]["sigma_tro_trial_mean"]
    et = accuracy_run["summary"]["et"]["sigma_tro_trial_mean"]
    targets = {"D1": 0.024, "D2": 0.024, "A": 0.018}
    photo_ok = all(0.002 <= photo[s] <= 0.015 for s in ("D1", "D2"))
    et_ok = all(abs(et[s] - targets[s]) <= 0.5 * targets[s] for s in targets)
    elapsed = time.monotonic() - t0
    ok = photo_ok and et_ok and elapsed < 30.0
    assert report(
        4, ok,
        f"photo sigma_tro D1={photo['D1']:.4f} D2={photo['D2']:.4f} "
        f"(in [0.002,0.015]); et A={et['A']:.4f} D1={et['D1']:.4f} "
        f"D2={et['D2']:.4f} (within 50% of 0.018/0.024/0.024), {elapsed:.1f}s",
    )


def test_criterion_05_degeneracy_fwhm(degeneracy_run):
    pct = degeneracy_run["summary"]["fwhm_percent"]
    ok = 0.4 <= pct <= 1.1
    assert report(5, ok, f"FWHM={pct:.2f}% of the degenerate ratio (want 0.4..1.1%)")


def test_criterion_06_near_dark_regime(degeneracy_run):
    feat = degeneracy_run["summary"]["featured"]
    max_a = feat["max_acceptor"]
    donor_dev = feat["max_donor1_deviation"]
    ok = max_a < 0.01 and donor_dev > 0.1
    assert report(
        6, ok,
        f"ratio {feat['ratio']}: max P(A)={max_a:.4f} (<0.01), "
        f"max |P(D1)-0.5|={donor_dev:.3f} (>0.1)",
    )


def test_criterion_07_schedule_durations(noise_run):
    qutrit_ms = noise_run["summary"]["qutrit"]["total_duration_ms"]
    ms_ms = noise_run["summary"]["qubit"]["ms_total_duration_ms"]
    qutrit_ok = abs(qutrit_ms - 0.226) <= 0.05 * 0.226
    qubit_ok = 17.92 / 2 <= ms_ms <= 17.92 * 2
    ok = qutrit_ok and qubit_ok
    assert report(
        7, ok,
        f"qutrit total={qutrit_ms:.4f} ms (0.226 +/- 5%), "
        f"qubit MS total={ms_ms:.3f} ms (within 2x of 17.92)",
    )


def test_criterion_08_platform_ordering(noise_run):
    qutrit_dev = noise_run["summary"]["qutrit"]["mean_abs_deviation"]
    qubit_dev = noise_run["summary"]["qubit"]["mean_abs_deviation"]
    ok = qutrit_dev < qubit_dev
    assert report(
        8, ok,
        f"mean |P_pred - P_th|: qutrit={qutrit_dev:.4f}, qubit={qubit_dev:.4f} "
        f"(require qutrit < qubit)",
    )


def test_criterion_09_open_system_engine():
    t0 = time.monotonic()
    problems = []

    # Physicality of every integration boundary on a representative run.
    plan = build_plan(FIG3, "electron_transfer", 32.91 / 7, 10)
    sched = compile_qutrit(plan, 2e5, 2e5)
    psi0 = initial_superposition(math.pi / 2)
    segs = []
    for p in sched.pulses:
        if p.duration > 0:
            theta = sched.generator_angle(p)
            segs.append(((theta / p.duration) * pulse_generator(p), p.duration))
    rho0 = np.outer(psi0.amplitudes, psi0.amplitudes.conj())
    _, bounds = integrate_master(
        segs, rho0, qutrit_collapse(NoiseModelQutrit()).operators,
        lambda d: d / 200.0,
    )
    for rho in bounds:
        if abs(np.trace(rho).real - 1.0) >= 1e-9:
            problems.append(f"trace drift {abs(np.trace(rho).real - 1.0):.1e}")
        if np.abs(rho - rho.conj().T).max() >= 1e-9:
            problems.append("hermiticity drift")
        if np.linalg.eigvalsh(rho).min() <= -1e-7:
            problems.append(f"eigenvalue {np.linalg.eigvalsh(rho).min():.1e}")

    # Zero-noise limits against the closed-system playback.
    quiet = simulate_qutrit_noisy(sched, NoiseModelQutrit(1e9, 1e9), psi0)
    ideal = simulate_schedule_ideal(sched, psi0)
    dev_qutrit = np.abs(quiet.populations - ideal.populations).max()
    if dev_qutrit >= 1e-6:
        problems.append(f"qutrit zero-noise dev {dev_qutrit:.1e}")
    dec = pauli_decompose(qubit_embed(h2_shifted(FIG3)))
    circuit = compile_qubit([dec] * 3, 32.91 / 70, 1)
    quiet_q = simulate_qubit_noisy(
        circuit, NoiseModelQubit(tau_m=1e9, gamma_oop=0.0, gamma_ip=0.0,
                                n_max=8, n_max_ip=2), psi0,
    )
    ideal_q = simulate_circuit_ideal(circuit, psi0)
    dev_qubit = np.abs(quiet_q.populations - ideal_q.populations).max()
    if dev_qubit >= 1e-6:
        problems.append(f"qubit zero-noise dev {dev_qubit:.1e}")

    # Analytic dephasing oracle: coherence decay rates of the encoded levels.
    noise = NoiseModelQutrit(tau1=0.3, tau2=0.075)
    psi = np.ones(3, dtype=complex) / math.sqrt(3)
    t = 0.02
    rho, _ = integrate_master(
        [(None, t)], np.outer(psi, psi.conj()),
        qutrit_collapse(noise).operators, t / 400,
    )
    r01 = 2 / noise.tau1 + 0.5 / noise.tau2
    if abs(abs(rho[0, 1]) - math.exp(-r01 * t) / 3) >= 1e-8:
        problems.append("dephasing oracle mismatch")

    # Analytic heating oracle: <n>(t) = Gamma t for Gamma t << 1.
    gamma, th = 10.0, 1e-3
    rho_m = np.zeros((6, 6), dtype=complex)
    rho_m[0, 0] = 1.0
    rho_m, _ = integrate_master(
        [(None, th)], rho_m, mode_collapse(1e9, gamma, 6), th / 200
    )
    n_mean = float(np.arange(6) @ np.diag(rho_m).real)
    if abs(n_mean - gamma * th) > 0.02 * gamma * th:
        problems.append(f"heating oracle <n>={n_mean:.4e}")

    elapsed = time.monotonic() - t0
    ok = not problems and elapsed < 60.0
    assert report(
        9, ok,
        f"physicality/zero-noise/analytic oracles "
        f"{'all satisfied' if not problems else '; '.join(problems)}, {elapsed:.1f}s",
    )


def test_criterion_10_oracle_equivalence():
    t0 = time.monotonic()
    h = h2_lab(FIG3)
    psi0 = initial_superposition(0.8)
    timedep = evolve_timedep(lambda t: h.matrix, psi0, 32.91, ET_LABELS, 70)
    static = evolve_static(h, psi0, timedep.times_fs, ET_LABELS)
    equiv = np.abs(timedep.populations - static.populations).max()

    model = PletModel(theta=1.2)
    a = final_amplitudes_timedep(lambda t: h1_lab(model, t).matrix, GROUND, 7.91, 2048)
    b = final_amplitudes_timedep(lambda t: h1_lab(model, t).matrix, GROUND, 7.91, 4096)
    halving = np.abs(np.abs(a) ** 2 - np.abs(b) ** 2).max()
    elapsed = time.monotonic() - t0
    ok = equiv < 1e-10 and halving < 1e-8 and elapsed < 10.0
    assert report(
        10, ok,
        f"constant-H agreement={equiv:.2e} (<1e-10), "
        f"substep-halving stability={halving:.2e} (<1e-8), {elapsed:.1f}s",
    )
