"""Figure rendering: PNG plots saved alongside the delimited outputs."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

_STATE_COLORS = {"G": "tab:gray", "A": "tab:green", "D1": "tab:red", "D2": "tab:blue",
                 "leak11": "tab:purple"}


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def _plot_trajectories(ax, trajs: dict[str, tuple], states):
    """trajs: name -> (trajectory, linestyle)."""
    for name, (traj, style) in trajs.items():
        for s in states:
            if s in traj.labels:
                ax.plot(traj.times_fs, traj.column(s), style,
                        color=_STATE_COLORS.get(s), label=f"{s} ({name})")
    ax.set_xlabel("simulated time (fs)")
    ax.set_ylabel("population")
    ax.legend(fontsize=7, ncol=2)


def render_polar_scan(out: Path, points: list[dict]) -> list[Path]:
    thetas = [p["theta_deg"] for p in points]
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(thetas, [p["rho"] for p in points], "o-", label="rho")
    ax.plot(thetas, [p["P_D1_final"] for p in points], "s--",
            color=_STATE_COLORS["D1"], label="P(D1) final")
    ax.plot(thetas, [p["P_D2_final"] for p in points], "^--",
            color=_STATE_COLORS["D2"], label="P(D2) final")
    ax.set_xlabel("polarization angle (deg)")
    ax.legend(fontsize=8)
    return [_save(fig, out / "scan.png")]


def render_phase_scan(out: Path, points: list[dict], featured: dict) -> list[Path]:
    phis = [p["phi_deg"] for p in points]
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.5))
    axes[0].plot(phis, [p["sigma1"] for p in points], color=_STATE_COLORS["D1"],
                 label="sigma1")
    axes[0].plot(phis, [p["sigma2"] for p in points], color=_STATE_COLORS["D2"],
                 label="sigma2")
    axes[0].plot(phis, [p["avg_A"] for p in points], color=_STATE_COLORS["A"],
                 label="avg P(A)")
    axes[0].set_xlabel("initial phase (deg)")
    axes[0].legend(fontsize=8)
    _plot_trajectories(
        axes[1],
        {"theory": (featured["theory"], "-"), "trotter": (featured["trotter"], "s--")},
        ("A", "D1", "D2"),
    )
    return [_save(fig, out / "scan.png")]


def render_degeneracy_scan(out: Path, xs, cols, featured: dict) -> list[Path]:
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.5))
    axes[0].plot(xs, cols["sigma1"], color=_STATE_COLORS["D1"], label="sigma1")
    axes[0].plot(xs, cols["sigma2"], color=_STATE_COLORS["D2"], label="sigma2")
    axes[0].plot(xs, cols["avg_A"], color=_STATE_COLORS["A"], label="avg P(A)")
    axes[0].set_xlabel("donor energy ratio")
    axes[0].legend(fontsize=8)
    _plot_trajectories(
        axes[1],
        {"theory": (featured["theory"], "-"), "trotter": (featured["trotter"], "s--")},
        ("A", "D1", "D2"),
    )
    return [_save(fig, out / "scan.png")]


def render_trotter_accuracy(out: Path, photo, et) -> list[Path]:
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.5))
    for ax, (th, tro, ext), states in (
        (axes[0], photo, ("D1", "D2")),
        (axes[1], et, ("A", "D1", "D2")),
    ):
        trajs = {"theory": (th, "-"), "trotter": (tro, "s--")}
        if ext is not None:
            trajs["measured"] = (ext, "o:")
        _plot_trajectories(ax, trajs, states)
    return [_save(fig, out / "accuracy.png")]


def render_noise_comparison(out: Path, th, qutrit_pred, qubit_pred) -> list[Path]:
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.5))
    _plot_trajectories(
        axes[0], {"theory": (th, "-"), "qubit": (qubit_pred, "s--")}, ("A", "D1", "D2")
    )
    _plot_trajectories(
        axes[1], {"theory": (th, "-"), "qutrit": (qutrit_pred, "s--")}, ("A", "D1", "D2")
    )
    axes[0].set_title("two-qubit platform")
    axes[1].set_title("qutrit platform")
    return [_save(fig, out / "comparison.png")]
