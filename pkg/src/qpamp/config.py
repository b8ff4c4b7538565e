"""Configuration ingestion: schema validation, defaults, canonical digest.

Configs are JSON with flat, unit-suffixed keys grouped in five blocks
(transistor, environment, sweep, dynamics, correlations).  Unknown keys are
rejected with their full path; negative physical quantities raise UnitError
naming the key.  Every default applied during parsing is recorded so the run
manifest can list it; nothing is defaulted silently.

Matching-capacitance defaults: when C_in_farads or C_ds_farads is absent,
the missing value is calibrated so the oscillators sit at 0.96 and 1.04
times the reference frequency (a split wide enough to resolve the two gain
peaks at the default quality factor of 100).  Missing decay rates default
to omega_i / 100.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .circuit_model import (EnvironmentParams, TransistorParams,
                            calibrate_capacitance, calibrate_matching_caps,
                            derive_all)
from .errors import SchemaError, UnitError

__all__ = ["CircuitConfig", "SweepConfig", "DynamicsConfig", "parse_config",
           "parse_config_dict", "dump_config", "config_digest",
           "default_config_path", "SPLIT_LOW", "SPLIT_HIGH", "Q_DEFAULT"]

SPLIT_LOW = 0.96      # omega_1 target, in units of omega_ref
SPLIT_HIGH = 1.04     # omega_2 target
Q_DEFAULT = 100.0

_MODES = ("standard", "literal")
_REPRESENTATIONS = ("both", "fock", "gaussian")
_FRAMES = ("midpoint", "reference", "lab")

# (key, default, kind); kind "positive" also rejects zero.
_TRANSISTOR_KEYS = [
    ("width_micrometers", 42.0, "positive"),
    ("C_pg_farads", 13.65e-15, "positive"),
    ("C_pd_farads", 12.11e-15, "positive"),
    ("L_g_henries", 32.13e-12, "positive"),
    ("L_d_henries", 32.24e-12, "positive"),
    ("L_s_henries", 45.22e-12, "positive"),
    ("R_g_ohms", 25.78, "positive"),
    ("R_d_ohms", 2.62, "positive"),
    ("R_s_ohms", 0.36, "positive"),
    ("C_gs_farads", 32e-15, "positive"),
    ("C_gd_farads", 11e-15, "nonnegative"),
    ("C_ds_farads", None, "positive"),          # calibrated when absent
    ("g_m_siemens", 3e-3, "nonnegative"),
    ("gamma_noise", 1.0, "positive"),
]
_TRANSISTOR_ALIASES = {"L_1_henries": "L_g_henries", "L_2_henries": "L_d_henries"}

_ENVIRONMENT_KEYS = [
    ("T_em_kelvin", 0.3, "positive"),
    ("kappa1_per_second", None, "positive"),    # omega_1/100 when absent
    ("kappa2_per_second", None, "positive"),
    ("V_RF_volts", 2e-6, "nonnegative"),
    ("C_in_farads", None, "positive"),          # calibrated when absent
    ("omega_ref_radians_per_second", 2.0 * math.pi * 5.2e9, "positive"),
]

_SWEEP_KEYS = [
    ("omega_min_over_ref", 0.8, "positive"),
    ("omega_max_over_ref", 1.2, "positive"),
    ("omega_points", 2001, "positive_int"),
    ("gm_min_siemens", None, "nonnegative"),    # 0.5 x g_m when absent
    ("gm_max_siemens", None, "positive"),       # 2.0 x g_m when absent
    ("gm_points", 10, "positive_int"),
    ("t_final_over_min_kappa", 5.0, "positive"),
    ("time_points", 101, "positive_int"),
]

_DYNAMICS_KEYS = [
    ("n_trunc", 16, "positive_int"),
    ("representation", "both", "choice:" + ",".join(_REPRESENTATIONS)),
    ("frame", "midpoint", "choice:" + ",".join(_FRAMES)),
]

_CORRELATIONS_KEYS = [
    ("mode", "standard", "choice:" + ",".join(_MODES)),
]


@dataclass(frozen=True)
class SweepConfig:
    omega_min_over_ref: float
    omega_max_over_ref: float
    omega_points: int
    gm_min_siemens: float
    gm_max_siemens: float
    gm_points: int
    t_final_over_min_kappa: float
    time_points: int


@dataclass(frozen=True)
class DynamicsConfig:
    n_trunc: int
    representation: str
    frame: str


@dataclass(frozen=True)
class CircuitConfig:
    transistor: TransistorParams
    environment: EnvironmentParams
    sweep: SweepConfig
    dynamics: DynamicsConfig
    correlations_mode: str
    applied_defaults: list = field(default_factory=list)


def _check_value(path: str, value, kind):
    if kind.startswith("choice:"):
        choices = kind.split(":", 1)[1].split(",")
        if not isinstance(value, str) or value not in choices:
            raise SchemaError(f"{path}: expected one of {choices}, got {value!r}")
        return value
    if kind == "positive_int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise SchemaError(f"{path}: expected a positive integer, got {value!r}")
        if value <= 0:
            raise UnitError(f"{path}: must be positive, got {value!r}")
        return value
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"{path}: expected a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise SchemaError(f"{path}: must be finite, got {value!r}")
    if kind == "positive" and value <= 0.0:
        raise UnitError(f"{path}: must be strictly positive, got {value!r}")
    if kind == "nonnegative" and value < 0.0:
        raise UnitError(f"{path}: must be >= 0, got {value!r}")
    return value


def _resolve_block(block_name: str, raw: dict, keyspec, aliases=None,
                   defaults_log=None):
    if not isinstance(raw, dict):
        raise SchemaError(f"{block_name}: expected an object, got {type(raw).__name__}")
    raw = dict(raw)
    if aliases:
        for alias, target in aliases.items():
            if alias in raw:
                if target in raw:
                    raise SchemaError(
                        f"{block_name}.{alias}: conflicts with {target}")
                raw[target] = raw.pop(alias)
    known = {k for k, _, _ in keyspec}
    unknown = set(raw) - known
    if unknown:
        raise SchemaError(
            f"{block_name}: unknown key(s) {sorted(unknown)}; expected a subset "
            f"of {sorted(known)}")
    out = {}
    for key, default, kind in keyspec:
        path = f"{block_name}.{key}"
        if key in raw:
            out[key] = _check_value(path, raw[key], kind)
        else:
            out[key] = default
            if default is not None and defaults_log is not None:
                defaults_log.append({"key": path, "value": default,
                                     "source": "fixed default"})
    return out


def parse_config_dict(data: dict) -> CircuitConfig:
    """Validate a config mapping and apply (and record) all defaults."""
    if not isinstance(data, dict):
        raise SchemaError(f"config root: expected an object, got {type(data).__name__}")
    unknown = set(data) - {"transistor", "environment", "sweep", "dynamics",
                           "correlations"}
    if unknown:
        raise SchemaError(f"config root: unknown block(s) {sorted(unknown)}")
    log: list = []
    tr = _resolve_block("transistor", data.get("transistor", {}),
                        _TRANSISTOR_KEYS, _TRANSISTOR_ALIASES, log)
    en = _resolve_block("environment", data.get("environment", {}),
                        _ENVIRONMENT_KEYS, None, log)
    sw = _resolve_block("sweep", data.get("sweep", {}), _SWEEP_KEYS, None, log)
    dy = _resolve_block("dynamics", data.get("dynamics", {}), _DYNAMICS_KEYS,
                        None, log)
    co = _resolve_block("correlations", data.get("correlations", {}),
                        _CORRELATIONS_KEYS, None, log)

    omega_ref = en["omega_ref_radians_per_second"]
    w1_target = SPLIT_LOW * omega_ref
    w2_target = SPLIT_HIGH * omega_ref

    # Matching capacitances: joint calibration when both are absent, single
    # closed-form back-out when only one is.
    if en["C_in_farads"] is None and tr["C_ds_farads"] is None:
        c_in, c_ds = calibrate_matching_caps(
            tr["C_gs_farads"], tr["C_gd_farads"], tr["L_g_henries"],
            tr["L_d_henries"], w1_target, w2_target)
        en["C_in_farads"] = c_in
        tr["C_ds_farads"] = c_ds
        log.append({"key": "environment.C_in_farads", "value": c_in,
                    "source": f"calibrated to omega_1 = {SPLIT_LOW} * omega_ref"})
        log.append({"key": "transistor.C_ds_farads", "value": c_ds,
                    "source": f"calibrated to omega_2 = {SPLIT_HIGH} * omega_ref"})
    elif tr["C_ds_farads"] is None:
        c_p1 = en["C_in_farads"] + tr["C_gs_farads"] + tr["C_gd_farads"]
        c_p2 = calibrate_capacitance(tr["L_d_henries"], w2_target) \
            + tr["C_gd_farads"] ** 2 / c_p1
        tr["C_ds_farads"] = c_p2 - tr["C_gd_farads"]
        log.append({"key": "transistor.C_ds_farads", "value": tr["C_ds_farads"],
                    "source": f"calibrated to omega_2 = {SPLIT_HIGH} * omega_ref"})
    elif en["C_in_farads"] is None:
        c_p2 = tr["C_gd_farads"] + tr["C_ds_farads"]
        c_p1 = calibrate_capacitance(tr["L_g_henries"], w1_target) \
            + tr["C_gd_farads"] ** 2 / c_p2
        en["C_in_farads"] = c_p1 - tr["C_gs_farads"] - tr["C_gd_farads"]
        log.append({"key": "environment.C_in_farads", "value": en["C_in_farads"],
                    "source": f"calibrated to omega_1 = {SPLIT_LOW} * omega_ref"})

    transistor = TransistorParams(
        width_um=tr["width_micrometers"], C_pg=tr["C_pg_farads"],
        C_pd=tr["C_pd_farads"], L_g=tr["L_g_henries"], L_d=tr["L_d_henries"],
        L_s=tr["L_s_henries"], R_g=tr["R_g_ohms"], R_d=tr["R_d_ohms"],
        R_s=tr["R_s_ohms"], C_gs=tr["C_gs_farads"], C_gd=tr["C_gd_farads"],
        C_ds=tr["C_ds_farads"], g_m=tr["g_m_siemens"],
        gamma_noise=tr["gamma_noise"])

    # Decay-rate defaults need the derived oscillator frequencies.
    if en["kappa1_per_second"] is None or en["kappa2_per_second"] is None:
        probe = EnvironmentParams(
            T_em=en["T_em_kelvin"], kappa1=1.0, kappa2=1.0,
            V_RF=en["V_RF_volts"], C_in=en["C_in_farads"], omega_ref=omega_ref)
        coeffs = derive_all(transistor, probe)
        if en["kappa1_per_second"] is None:
            en["kappa1_per_second"] = coeffs.omega_1 / Q_DEFAULT
            log.append({"key": "environment.kappa1_per_second",
                        "value": en["kappa1_per_second"],
                        "source": "omega_1 / 100 (quality factor 100)"})
        if en["kappa2_per_second"] is None:
            en["kappa2_per_second"] = coeffs.omega_2 / Q_DEFAULT
            log.append({"key": "environment.kappa2_per_second",
                        "value": en["kappa2_per_second"],
                        "source": "omega_2 / 100 (quality factor 100)"})

    environment = EnvironmentParams(
        T_em=en["T_em_kelvin"], kappa1=en["kappa1_per_second"],
        kappa2=en["kappa2_per_second"], V_RF=en["V_RF_volts"],
        C_in=en["C_in_farads"], omega_ref=omega_ref)

    if sw["gm_min_siemens"] is None:
        sw["gm_min_siemens"] = 0.5 * transistor.g_m
        log.append({"key": "sweep.gm_min_siemens", "value": sw["gm_min_siemens"],
                    "source": "0.5 * transistor.g_m_siemens"})
    if sw["gm_max_siemens"] is None:
        # A zero-transconductance config still needs a usable sweep axis.
        sw["gm_max_siemens"] = 2.0 * transistor.g_m if transistor.g_m > 0.0 \
            else 1e-3
        log.append({"key": "sweep.gm_max_siemens", "value": sw["gm_max_siemens"],
                    "source": "2.0 * transistor.g_m_siemens (1e-3 S fallback "
                              "when g_m = 0)"})
    if not sw["gm_max_siemens"] > sw["gm_min_siemens"]:
        raise UnitError("sweep.gm_max_siemens must exceed sweep.gm_min_siemens")
    if not sw["omega_max_over_ref"] > sw["omega_min_over_ref"]:
        raise UnitError("sweep.omega_max_over_ref must exceed sweep.omega_min_over_ref")
    if dy["n_trunc"] < 2:
        raise UnitError(f"dynamics.n_trunc must be >= 2, got {dy['n_trunc']}")

    return CircuitConfig(
        transistor=transistor,
        environment=environment,
        sweep=SweepConfig(**sw),
        dynamics=DynamicsConfig(**dy),
        correlations_mode=co["mode"],
        applied_defaults=log,
    )


def parse_config(path: str | Path) -> CircuitConfig:
    """Load, validate and resolve a JSON config file."""
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"config file not found: {path}")
    try:
        text = path.read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise SchemaError(f"{path}: not valid UTF-8: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON: {exc}") from exc
    return parse_config_dict(data)


def dump_config(cfg: CircuitConfig) -> dict:
    """Fully resolved config mapping; parses back to an identical config."""
    t, e, s, d = cfg.transistor, cfg.environment, cfg.sweep, cfg.dynamics
    return {
        "transistor": {
            "width_micrometers": t.width_um,
            "C_pg_farads": t.C_pg, "C_pd_farads": t.C_pd,
            "L_g_henries": t.L_g, "L_d_henries": t.L_d, "L_s_henries": t.L_s,
            "R_g_ohms": t.R_g, "R_d_ohms": t.R_d, "R_s_ohms": t.R_s,
            "C_gs_farads": t.C_gs, "C_gd_farads": t.C_gd, "C_ds_farads": t.C_ds,
            "g_m_siemens": t.g_m, "gamma_noise": t.gamma_noise,
        },
        "environment": {
            "T_em_kelvin": e.T_em,
            "kappa1_per_second": e.kappa1, "kappa2_per_second": e.kappa2,
            "V_RF_volts": e.V_RF, "C_in_farads": e.C_in,
            "omega_ref_radians_per_second": e.omega_ref,
        },
        "sweep": {
            "omega_min_over_ref": s.omega_min_over_ref,
            "omega_max_over_ref": s.omega_max_over_ref,
            "omega_points": s.omega_points,
            "gm_min_siemens": s.gm_min_siemens,
            "gm_max_siemens": s.gm_max_siemens,
            "gm_points": s.gm_points,
            "t_final_over_min_kappa": s.t_final_over_min_kappa,
            "time_points": s.time_points,
        },
        "dynamics": {
            "n_trunc": d.n_trunc,
            "representation": d.representation,
            "frame": d.frame,
        },
        "correlations": {"mode": cfg.correlations_mode},
    }


def config_digest(cfg: CircuitConfig) -> str:
    """Content hash of the fully resolved configuration."""
    canonical = json.dumps(dump_config(cfg), sort_keys=True,
                           separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def default_config_path() -> Path:
    """Path of the shipped default configuration."""
    return Path(resources.files("qpamp").joinpath("data/default.json"))
