"""Scenario configuration: strict JSON parsing with embedded defaults.

A configuration is a single JSON document.  Every scenario ships with a
complete default document so ``run <scenario> --defaults`` reproduces the
corresponding reference figure without hand-typed parameters.  Unknown keys
are rejected everywhere (this catches silent parameter typos), and all
schema problems are collected into one diagnostic list before raising.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .lindblad import NoiseModelQubit, NoiseModelQutrit
from .model import PletModel

SCENARIOS = (
    "polar_scan",
    "phase_scan",
    "degeneracy_scan",
    "trotter_accuracy",
    "noise_comparison",
)


class ConfigError(ValueError):
    """One or more schema problems; str(err) itemizes all of them."""

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("invalid configuration:\n" + "\n".join(f"  - {p}" for p in problems))


@dataclass(frozen=True)
class StepBlock:
    """Simulated window and step count of one Trotterized process."""

    T_fs: float
    N: int


@dataclass(frozen=True)
class TrotterBlock:
    photo: StepBlock
    et: StepBlock
    rabi_01_hz: float = 17300.0  # Omega/2pi of the 0-1 transition
    rabi_02_hz: float = 17490.0
    convention: str = "half"  # pulse-duration accounting, "half" | "full"
    qubit_substeps: int = 1


@dataclass(frozen=True)
class NoiseBlock:
    enabled: bool = True
    qutrit: NoiseModelQutrit = field(default_factory=NoiseModelQutrit)
    qubit: NoiseModelQubit = field(default_factory=NoiseModelQubit)


@dataclass(frozen=True)
class ScanBlock:
    variable: str
    start: float
    stop: float
    points: int
    refine_rounds: int = 0


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    model: PletModel
    initial_phase_deg: float
    trotter: TrotterBlock
    noise: NoiseBlock
    scan: ScanBlock | None
    out_dir: Path
    figures: bool


# Fixed per-scenario scan variables (anything else is a schema error).
_SCAN_VARIABLES = {
    "polar_scan": "theta_deg",
    "phase_scan": "phi_deg",
    "degeneracy_scan": "ratio",
}


def default_document(scenario: str) -> dict:
    """The complete default JSON document for a scenario."""
    if scenario not in SCENARIOS:
        raise ConfigError([f"unknown scenario {scenario!r}; expected one of {SCENARIOS}"])
    model = {
        "omega_G": 0.0,
        "omega_D1": 3.89,
        "omega_D2": 3.89,
        "omega_A": 3.01,
        "mu1": 4.58,
        "mu2": 4.58,
        "V1": 0.25,
        "V2": 0.25,
        "E0_V_per_m": 2.2e9,
        "theta_deg": 135.0,
        "omega_L_rad_per_fs": None,
    }
    doc = {
        "scenario": scenario,
        "model": model,
        "initial_phase_deg": 90.0,
        "trotter": {
            "photo": {"T_fs": 7.91, "N": 40},
            "et": {"T_fs": 32.91, "N": 70},
            "rabi_01_hz": 17300.0,
            "rabi_02_hz": 17490.0,
            "convention": "half",
            "qubit_substeps": 1,
        },
        "noise": {
            "enabled": True,
            "qutrit": {"tau1_s": 300e-3, "tau2_s": 75e-3},
            "qubit": {
                "tau_m_s": 8e-3,
                "gamma_oop_per_s": 10.0,
                "gamma_ip_per_s": 200.0,
                "n_max": 5,
                "n_max_ip": 40,
                "sideband_rabi_hz": 4475.0,
            },
        },
        "scan": None,
        "output": {"directory": "out", "figures": True},
    }
    if scenario == "polar_scan":
        doc["scan"] = {"variable": "theta_deg", "start": 0.0, "stop": 180.0,
                       "points": 37, "refine_rounds": 0}
    elif scenario == "phase_scan":
        doc["scan"] = {"variable": "phi_deg", "start": 0.0, "stop": 360.0,
                       "points": 73, "refine_rounds": 0}
    elif scenario == "degeneracy_scan":
        model["omega_D1"] = 3.86
        doc["initial_phase_deg"] = 180.0
        doc["trotter"]["et"] = {"T_fs": 46.13, "N": 70}
        doc["scan"] = {"variable": "ratio", "start": 0.95, "stop": 1.05,
                       "points": 81, "refine_rounds": 3}
    return doc


def _check_keys(d: dict, allowed: set[str], where: str, problems: list[str]):
    for k in d:
        if k not in allowed:
            problems.append(f"{where}: unknown key {k!r}")


def _get(d: dict, key: str, types, where: str, problems: list[str], default=None,
         required: bool = False):
    if key not in d:
        if required:
            problems.append(f"{where}: missing required key {key!r}")
        return default
    v = d[key]
    if not isinstance(v, types) or isinstance(v, bool) and bool not in (
        types if isinstance(types, tuple) else (types,)
    ):
        problems.append(f"{where}.{key}: expected {types}, got {type(v).__name__}")
        return default
    return v


def _pick(value, default):
    """Fall back only on a missing/mistyped value, never on a falsy one."""
    return default if value is None else value


def _parse_model(d: dict, problems: list[str]) -> PletModel:
    where = "model"
    allowed = {"omega_G", "omega_D1", "omega_D2", "omega_A", "mu1", "mu2",
               "V1", "V2", "E0_V_per_m", "theta_deg", "omega_L_rad_per_fs"}
    _check_keys(d, allowed, where, problems)
    num = (int, float)
    kw = {}
    for name in ("omega_G", "omega_D1", "omega_D2", "omega_A", "mu1", "mu2", "V1", "V2"):
        kw[name] = float(_get(d, name, num, where, problems, default=0.0, required=True) or 0.0)
    kw["E0"] = float(_get(d, "E0_V_per_m", num, where, problems, default=0.0, required=True) or 0.0)
    theta_deg = float(_get(d, "theta_deg", num, where, problems, default=0.0, required=True) or 0.0)
    kw["theta"] = math.radians(theta_deg % 360.0)
    if "omega_L_rad_per_fs" in d and d["omega_L_rad_per_fs"] is not None:
        wl = _get(d, "omega_L_rad_per_fs", num, where, problems, default=None)
        kw["omega_L"] = None if wl is None else float(wl)
    if problems:
        return PletModel()
    try:
        return PletModel(**kw)
    except ValueError as e:
        problems.append(f"{where}: {e}")
        return PletModel()


def _parse_step(d: dict, where: str, problems: list[str]) -> StepBlock:
    _check_keys(d, {"T_fs", "N"}, where, problems)
    T = float(_pick(_get(d, "T_fs", (int, float), where, problems, required=True), 1.0))
    N = _pick(_get(d, "N", int, where, problems, required=True), 1)
    if T <= 0:
        problems.append(f"{where}.T_fs: must be positive")
    if N < 1:
        problems.append(f"{where}.N: must be >= 1")
    return StepBlock(T, N)


def _parse_trotter(d: dict, problems: list[str]) -> TrotterBlock:
    where = "trotter"
    allowed = {"photo", "et", "rabi_01_hz", "rabi_02_hz", "convention", "qubit_substeps"}
    _check_keys(d, allowed, where, problems)
    photo = _parse_step(_get(d, "photo", dict, where, problems, default={}, required=True) or {},
                        "trotter.photo", problems)
    et = _parse_step(_get(d, "et", dict, where, problems, default={}, required=True) or {},
                     "trotter.et", problems)
    r1 = float(_pick(_get(d, "rabi_01_hz", (int, float), where, problems), 17300.0))
    r2 = float(_pick(_get(d, "rabi_02_hz", (int, float), where, problems), 17490.0))
    conv = _pick(_get(d, "convention", str, where, problems), "half")
    subs = _pick(_get(d, "qubit_substeps", int, where, problems), 1)
    if r1 <= 0 or r2 <= 0:
        problems.append(f"{where}: Rabi frequencies must be positive")
    if conv not in ("half", "full"):
        problems.append(f"{where}.convention: expected 'half' or 'full', got {conv!r}")
    if subs < 1:
        problems.append(f"{where}.qubit_substeps: must be >= 1")
    return TrotterBlock(photo, et, r1, r2, conv, subs)


def _parse_noise(d: dict, problems: list[str]) -> NoiseBlock:
    where = "noise"
    _check_keys(d, {"enabled", "qutrit", "qubit"}, where, problems)
    enabled = _get(d, "enabled", bool, where, problems, default=True)
    qd = _get(d, "qutrit", dict, where, problems, default={}) or {}
    _check_keys(qd, {"tau1_s", "tau2_s"}, "noise.qutrit", problems)
    bd = _get(d, "qubit", dict, where, problems, default={}) or {}
    _check_keys(bd, {"tau_m_s", "gamma_oop_per_s", "gamma_ip_per_s", "n_max",
                     "n_max_ip", "sideband_rabi_hz"}, "noise.qubit", problems)
    num = (int, float)
    try:
        qutrit = NoiseModelQutrit(
            tau1=float(_pick(_get(qd, "tau1_s", num, "noise.qutrit", problems), 300e-3)),
            tau2=float(_pick(_get(qd, "tau2_s", num, "noise.qutrit", problems), 75e-3)),
        )
        qubit = NoiseModelQubit(
            tau_m=float(_pick(_get(bd, "tau_m_s", num, "noise.qubit", problems), 8e-3)),
            gamma_oop=float(_pick(_get(bd, "gamma_oop_per_s", num, "noise.qubit", problems), 10.0)),
            gamma_ip=float(_pick(_get(bd, "gamma_ip_per_s", num, "noise.qubit", problems), 200.0)),
            n_max=_pick(_get(bd, "n_max", int, "noise.qubit", problems), 5),
            n_max_ip=_pick(_get(bd, "n_max_ip", int, "noise.qubit", problems), 40),
            sideband_rabi=2.0 * math.pi * float(
                _pick(_get(bd, "sideband_rabi_hz", num, "noise.qubit", problems), 4475.0)
            ),
        )
    except ValueError as e:
        problems.append(f"{where}: {e}")
        qutrit, qubit = NoiseModelQutrit(), NoiseModelQubit()
    return NoiseBlock(bool(enabled), qutrit, qubit)


def _parse_scan(d: dict | None, scenario: str, problems: list[str]) -> ScanBlock | None:
    expected = _SCAN_VARIABLES.get(scenario)
    if d is None:
        if expected is not None:
            problems.append(f"scan: scenario {scenario!r} requires a scan block")
        return None
    if expected is None:
        problems.append(f"scan: scenario {scenario!r} takes no scan block")
        return None
    where = "scan"
    _check_keys(d, {"variable", "start", "stop", "points", "refine_rounds"}, where, problems)
    var = _pick(_get(d, "variable", str, where, problems, required=True), expected)
    if var != expected:
        problems.append(f"scan.variable: scenario {scenario!r} scans {expected!r}, got {var!r}")
    num = (int, float)
    start = float(_pick(_get(d, "start", num, where, problems, required=True), 0.0))
    stop = float(_pick(_get(d, "stop", num, where, problems, required=True), 1.0))
    points = _pick(_get(d, "points", int, where, problems, required=True), 2)
    rounds = _pick(_get(d, "refine_rounds", int, where, problems), 0)
    if not stop > start:
        problems.append("scan: stop must exceed start")
    if points < 2:
        problems.append("scan.points: must be >= 2")
    if rounds < 0:
        problems.append("scan.refine_rounds: must be >= 0")
    return ScanBlock(var, start, stop, points, rounds)


def parse_document(doc: dict) -> ScenarioConfig:
    """Validate a JSON document and build the typed configuration."""
    problems: list[str] = []
    if not isinstance(doc, dict):
        raise ConfigError(["top level must be a JSON object"])
    allowed = {"scenario", "model", "initial_phase_deg", "trotter", "noise", "scan", "output"}
    _check_keys(doc, allowed, "top level", problems)
    scenario = _get(doc, "scenario", str, "top level", problems, default="", required=True) or ""
    if scenario and scenario not in SCENARIOS:
        problems.append(f"scenario: unknown scenario {scenario!r}; expected one of {SCENARIOS}")
    model = _parse_model(_get(doc, "model", dict, "top level", problems, default={},
                              required=True) or {}, problems)
    phase = float(_get(doc, "initial_phase_deg", (int, float), "top level", problems,
                       default=90.0) or 0.0)
    trotter = _parse_trotter(_get(doc, "trotter", dict, "top level", problems, default={},
                                  required=True) or {}, problems)
    noise = _parse_noise(_get(doc, "noise", dict, "top level", problems, default={}) or {},
                         problems)
    scan = _parse_scan(doc.get("scan"), scenario, problems) if scenario in SCENARIOS else None
    out = _get(doc, "output", dict, "top level", problems, default={}) or {}
    _check_keys(out, {"directory", "figures"}, "output", problems)
    out_dir = _get(out, "directory", str, "output", problems, default="out") or "out"
    figures = _get(out, "figures", bool, "output", problems, default=True)
    if problems:
        raise ConfigError(problems)
    return ScenarioConfig(
        scenario=scenario,
        model=model,
        initial_phase_deg=phase,
        trotter=trotter,
        noise=noise,
        scan=scan,
        out_dir=Path(out_dir),
        figures=bool(figures),
    )


def load_config(path: str | Path) -> ScenarioConfig:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as e:
        raise ConfigError([f"cannot read {path}: {e}"])
    except json.JSONDecodeError as e:
        raise ConfigError([f"{path} is not valid JSON: {e}"])
    return parse_document(doc)


def default_config(scenario: str) -> ScenarioConfig:
    return parse_document(default_document(scenario))
