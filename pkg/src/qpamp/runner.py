"""Run orchestration: derive, sweep, integrate, and emit bit-stable results.

Every run writes its artifacts plus a manifest.json recording the config
digest, tool version, applied defaults, and any notes (cross-validation
deviations, aborted paths).  CSV bodies are byte-identical across reruns
and across concurrency levels; the timestamp lives only in the manifest.

File contracts (column order is fixed):

* gain.csv        omega_over_omega0, gain1_norm, gain2_norm, gain1_raw,
                  gain2_raw, singular_flag
* surface.csv     gm_siemens + the same six columns, rows grouped by g_m
* trajectory.csv  t, n1, n2, re_c12, im_c12, re_m12, im_m12, purity,
                  leakage, flag_unstable          (t in seconds)
* correlations.csv t_or_gm, nu_plus, nu_minus, nu_tilde_minus, entangled,
                  discord, classical_corr, purity, mode
* coeffs.json     every derived symbol with value and unit
* resolved_config.json  the fully resolved configuration (round-trips)
* manifest.json   digest, version, timestamp, emitted files, defaults, notes
"""

from __future__ import annotations

import datetime as _dt
import json
import math
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .circuit_model import (derive_aux_coeffs, derive_hamiltonian_coeffs,
                            derive_partial_caps, thermal_noise_psds)
from .config import CircuitConfig, config_digest, dump_config
from .correlations import correlation_report
from .dynamics import (FockSpaceSpec, build_collapse_ops,
                       build_hamiltonian_matrix, cm_from_moments,
                       diffusion_matrix, evolve_density, evolve_gaussian,
                       expectations, gaussian_moments, hamiltonian_drift,
                       leakage_of, normalize_coefficients,
                       steady_state_gaussian, vacuum_density, vacuum_gaussian)
from .correlations import MODE_LITERAL, MODE_STANDARD, purity_fock
from .errors import TruncationLeakage, UnstableDrift
from .spectral import (find_peaks, gain_spectrum, gm_gain_surface,
                       make_default_request)

__all__ = ["emit_csv", "run_coeffs", "run_gain", "run_evolve",
           "run_correlations", "run_sweep", "RunContext"]

GAIN_COLUMNS = ["omega_over_omega0", "gain1_norm", "gain2_norm",
                "gain1_raw", "gain2_raw", "singular_flag"]
SURFACE_COLUMNS = ["gm_siemens"] + GAIN_COLUMNS
TRAJECTORY_COLUMNS = ["t", "n1", "n2", "re_c12", "im_c12", "re_m12",
                      "im_m12", "purity", "leakage", "flag_unstable"]
CORRELATION_COLUMNS = ["t_or_gm", "nu_plus", "nu_minus", "nu_tilde_minus",
                       "entangled", "discord", "classical_corr", "purity",
                       "mode"]


def _fmt(value) -> str:
    if isinstance(value, bool) or isinstance(value, np.bool_):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def emit_csv(records, path: str | Path, columns: list[str]) -> Path:
    """Write homogeneous records as a deterministic CSV.

    Floats carry 17 significant digits, line endings are LF, and the column
    order is exactly ``columns``; an empty record list yields a header-only
    file.  Reruns over identical records are byte-identical.
    """
    path = Path(path)
    lines = [",".join(columns)]
    for rec in records:
        if len(rec) != len(columns):
            raise ValueError(
                f"record width {len(rec)} does not match {len(columns)} columns")
        lines.append(",".join(_fmt(v) for v in rec))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    return path


def _write_json(data, path: Path) -> Path:
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8", newline="\n")
    return path


class RunContext:
    """Collects emitted files and notes, then writes the manifest."""

    def __init__(self, cfg: CircuitConfig, out_dir: str | Path,
                 cli_overrides: dict | None = None):
        self.cfg = cfg
        self.out = Path(out_dir)
        self.out.mkdir(parents=True, exist_ok=True)
        self.files: list[str] = []
        self.notes: dict = {}
        self.cli_overrides = cli_overrides or {}

    def add(self, path: Path) -> None:
        self.files.append(path.name)

    def write_resolved_config(self) -> None:
        self.add(_write_json(dump_config(self.cfg),
                             self.out / "resolved_config.json"))

    def finalize(self) -> Path:
        manifest = {
            "config_digest": config_digest(self.cfg),
            "tool_version": __version__,
            "created_utc": _dt.datetime.now(_dt.timezone.utc).isoformat(),
            "files": sorted(self.files),
            "applied_defaults": self.cfg.applied_defaults,
            "cli_overrides": self.cli_overrides,
            "time_axis": {
                "seconds_per_dimensionless_unit":
                    1.0 / self.cfg.environment.omega_ref,
            },
            "notes": self.notes,
        }
        return _write_json(manifest, self.out / "manifest.json")


def _val(v, unit):
    return {"value": float(v), "unit": unit}


def run_coeffs(cfg: CircuitConfig, ctx: RunContext | None = None) -> dict:
    """Full coefficient report: every derived symbol with value and unit."""
    t, e = cfg.transistor, cfg.environment
    p = derive_partial_caps(t, e)
    a = derive_aux_coeffs(p, t, e)
    h = derive_hamiltonian_coeffs(p, a, t, e)
    psd = thermal_noise_psds(t, e)
    report = {
        "partial_caps": {
            "C_p1": _val(p.C_p1, "F"),
            "C_p2": _val(p.C_p2, "F"),
            "D_M": _val(p.D_M, "F^2"),
        },
        "auxiliary": {
            "inv2C_1p": _val(a.inv2C_1p, "1/F"),
            "inv2C_2p": _val(a.inv2C_2p, "1/F"),
            "invC_12p": _val(a.invC_12p, "1/F"),
            "g_12p": _val(a.g_12p, "1/s"),
            "g_22p": _val(a.g_22p, "1/s"),
            "V_q1p": _val(a.V_q1p, "dimensionless"),
            "V_q2p": _val(a.V_q2p, "dimensionless"),
            "G_1": _val(a.G_1, "S"),
        },
        "coefficients": {
            "C_1": _val(h.C_1, "F"),
            "C_2": _val(h.C_2, "F"),
            "invC_12": _val(h.invC_12, "1/F"),
            "g_12": _val(h.g_12, "1/s"),
            "g_22": _val(h.g_22, "1/s"),
            "V_q1": _val(h.V_q1, "V"),
            "V_q2": _val(h.V_q2, "V"),
            "Z_1": _val(h.Z_1, "ohm"),
            "Z_2": _val(h.Z_2, "ohm"),
            "omega_1": _val(h.omega_1, "rad/s"),
            "omega_2": _val(h.omega_2, "rad/s"),
            "g_q1q2": _val(h.g_q1q2, "rad/s"),
            "g_q1p2": _val(h.g_q1p2, "rad/s"),
            "g_q2p2": _val(h.g_q2p2, "rad/s"),
            "gamma_q1": _val(h.gamma_q1, "1/s"),
            "gamma_q2": _val(h.gamma_q2, "1/s"),
            "gamma_phi1": _val(h.gamma_phi1, "1/s"),
            "gamma_phi2": _val(h.gamma_phi2, "1/s"),
        },
        "noise": {
            "i_g_sq": _val(psd.i_g_sq, "A^2/Hz"),
            "i_d_sq": _val(psd.i_d_sq, "A^2/Hz"),
            "i_ds_sq": _val(psd.i_ds_sq, "A^2/Hz"),
            "n_bar_1": _val(psd.n_bar_1, "dimensionless"),
            "n_bar_2": _val(psd.n_bar_2, "dimensionless"),
        },
        "unused_inputs": ["width_micrometers", "C_pg_farads", "C_pd_farads",
                          "L_s_henries", "R_s_ohms"],
    }
    if ctx is not None:
        ctx.add(_write_json(report, ctx.out / "coeffs.json"))
    return report


def _omega_grid(cfg: CircuitConfig, points: int | None = None) -> np.ndarray:
    s = cfg.sweep
    n = points or s.omega_points
    return np.linspace(s.omega_min_over_ref, s.omega_max_over_ref, n) \
        * cfg.environment.omega_ref


def _gm_grid(cfg: CircuitConfig) -> np.ndarray:
    s = cfg.sweep
    return np.linspace(s.gm_min_siemens, s.gm_max_siemens, s.gm_points)


def _trace_rows(trace, prefix=()):
    rows = []
    for i in range(trace.omega_over_omega0.size):
        rows.append(prefix + (
            trace.omega_over_omega0[i], trace.gain1[i], trace.gain2[i],
            trace.gain1_raw[i], trace.gain2_raw[i],
            bool(trace.singular_flags[i])))
    return rows


def run_gain(cfg: CircuitConfig, ctx: RunContext, points: int | None = None,
             jobs: int = 1) -> None:
    """Gain trace + peak list on the configured grid, plus a g_m surface."""
    t, e = cfg.transistor, cfg.environment
    from .circuit_model import derive_all
    coeffs = derive_all(t, e)
    req = make_default_request(coeffs, e, _omega_grid(cfg, points))
    trace = gain_spectrum(req)
    ctx.add(emit_csv(_trace_rows(trace), ctx.out / "gain.csv", GAIN_COLUMNS))

    peaks = {
        "gain1": [{"omega_over_omega0": w, "height_raw": h}
                  for w, h in find_peaks(trace, "gain1_raw")],
        "gain2": [{"omega_over_omega0": w, "height_raw": h}
                  for w, h in find_peaks(trace, "gain2_raw")],
    }
    ctx.add(_write_json(peaks, ctx.out / "peaks.json"))

    surface = gm_gain_surface(_gm_grid(cfg), req, t, e, jobs=jobs)
    rows = []
    for r, gm in enumerate(surface.gm_grid):
        for i in range(surface.omega_over_omega0.size):
            rows.append((gm, surface.omega_over_omega0[i],
                         surface.gain1_norm[r, i], surface.gain2_norm[r, i],
                         surface.gain1_raw[r, i], surface.gain2_raw[r, i],
                         bool(surface.singular_flags[r, i])))
    ctx.add(emit_csv(rows, ctx.out / "surface.csv", SURFACE_COLUMNS))
    ctx.notes["gain"] = {
        "singular_points": int(np.sum(trace.singular_flags)),
        "surface_singular_points": int(np.sum(surface.singular_flags)),
    }


def _dynamics_inputs(cfg: CircuitConfig):
    """Normalized (dimensionless) generator pieces for the dynamics layer."""
    from .circuit_model import derive_all
    t, e = cfg.transistor, cfg.environment
    coeffs = derive_all(t, e)
    psd = thermal_noise_psds(t, e)
    hn = normalize_coefficients(coeffs, e.omega_ref, frame=cfg.dynamics.frame)
    k1 = e.kappa1 / e.omega_ref
    k2 = e.kappa2 / e.omega_ref
    dt = min(0.01 / max(abs(hn.omega_1), abs(hn.omega_2), 1e-12),
             0.05 / max(k1, k2))
    return hn, psd, k1, k2, dt


def _time_grid(cfg: CircuitConfig, k1: float, k2: float) -> np.ndarray:
    s = cfg.sweep
    t_end = s.t_final_over_min_kappa / min(k1, k2)
    return np.linspace(0.0, t_end, s.time_points)


def _moment_rows(t_dimless, omega_ref, moments, purities, leaks, unstable):
    rows = []
    for i, m in enumerate(moments):
        rows.append((t_dimless[i] / omega_ref, m.n1, m.n2,
                     m.c12.real, m.c12.imag, m.m12.real, m.m12.imag,
                     purities[i], leaks[i], unstable))
    return rows


def run_evolve(cfg: CircuitConfig, ctx: RunContext,
               truncation: int | None = None) -> None:
    """Integrate the master equation and/or the Gaussian flow, emit
    trajectories, per-sample correlation reports, and the cross-validation
    deviation between the two routes."""
    hn, psd, k1, k2, dt = _dynamics_inputs(cfg)
    t_grid = _time_grid(cfg, k1, k2)
    omega_ref = cfg.environment.omega_ref
    n_trunc = truncation or cfg.dynamics.n_trunc
    representation = cfg.dynamics.representation
    mode = MODE_LITERAL if cfg.correlations_mode == "literal" else MODE_STANDARD

    drift = hamiltonian_drift(hn, k1, k2)
    diffusion = diffusion_matrix(k1, k2, psd.n_bar_1, psd.n_bar_2)

    gauss = None
    if representation in ("both", "gaussian"):
        gauss = evolve_gaussian(vacuum_gaussian(), drift, diffusion, t_grid,
                                dt=dt)
        moments = [gaussian_moments(s) for s in gauss.states]
        purities = [1.0 / math.sqrt(np.linalg.det(s.cm)) for s in gauss.states]
        rows = _moment_rows(t_grid, omega_ref, moments, purities,
                            [0.0] * len(moments), gauss.unstable)
        ctx.add(emit_csv(rows, ctx.out / "trajectory_gaussian.csv",
                         TRAJECTORY_COLUMNS))

    fock = None
    if representation in ("both", "fock"):
        spec = FockSpaceSpec(n_trunc)
        H = build_hamiltonian_matrix(hn, spec)
        collapse = build_collapse_ops(k1, k2, psd.n_bar_1, psd.n_bar_2, spec)
        try:
            fock = evolve_density(vacuum_density(spec), H, collapse, t_grid,
                                  dt=dt)
        except TruncationLeakage as exc:
            ctx.notes["fock_aborted"] = {
                "reason": str(exc),
                "advice": f"raise dynamics.n_trunc above {n_trunc} and rerun",
            }
        if fock is not None:
            moments = [expectations(s) for s in fock.states]
            purities = [purity_fock(s) for s in fock.states]
            unstable = bool(np.max(np.linalg.eigvals(
                np.asarray(drift[0])).real) > 1e-9)
            rows = _moment_rows(t_grid, omega_ref, moments, purities,
                                fock.leakage, unstable)
            ctx.add(emit_csv(rows, ctx.out / "trajectory.csv",
                             TRAJECTORY_COLUMNS))
            ctx.notes["fock_leakage_max"] = float(np.max(fock.leakage))

    # Correlation time series from whichever route produced states
    # (Gaussian preferred: the covariance is exact there).
    source = gauss.states if gauss is not None else None
    if source is None and fock is not None:
        source = [cm_from_moments(expectations(s)) for s in fock.states]
    if source is not None:
        rows = []
        for tval, state in zip(t_grid, source):
            rep = correlation_report(state.cm, mode=mode)
            rows.append((tval / omega_ref, rep.nu_plus, rep.nu_minus,
                         rep.nu_tilde_minus, rep.entangled, rep.discord,
                         rep.classical_corr, rep.purity, rep.mode))
        ctx.add(emit_csv(rows, ctx.out / "correlations.csv",
                         CORRELATION_COLUMNS))

    if fock is not None and gauss is not None:
        dev = 0.0
        for fs, gs in zip(fock.states[1:], gauss.states[1:]):
            mf = expectations(fs)
            mg = gaussian_moments(gs)
            for a, b in ((mf.n1, mg.n1), (mf.n2, mg.n2),
                         (abs(mf.c12), abs(mg.c12)),
                         (abs(mf.m12), abs(mg.m12))):
                scale = max(abs(a), abs(b), 1e-12)
                dev = max(dev, abs(a - b) / scale)
        ctx.notes["cross_validation"] = {
            "max_relative_moment_deviation": dev,
            "quantities": ["n1", "n2", "abs_c12", "abs_m12"],
        }


def run_correlations(cfg: CircuitConfig, ctx: RunContext,
                     mode: str | None = None) -> None:
    """Steady-state correlation report of the configured circuit."""
    hn, psd, k1, k2, _ = _dynamics_inputs(cfg)
    mode = mode or (MODE_LITERAL if cfg.correlations_mode == "literal"
                    else MODE_STANDARD)
    drift = hamiltonian_drift(hn, k1, k2)
    diffusion = diffusion_matrix(k1, k2, psd.n_bar_1, psd.n_bar_2)
    ss = steady_state_gaussian(drift, diffusion)
    rep = correlation_report(ss.cm, mode=mode)
    rows = [(math.inf, rep.nu_plus, rep.nu_minus, rep.nu_tilde_minus,
             rep.entangled, rep.discord, rep.classical_corr, rep.purity,
             rep.mode)]
    ctx.add(emit_csv(rows, ctx.out / "correlations.csv", CORRELATION_COLUMNS))


def run_sweep(cfg: CircuitConfig, ctx: RunContext, jobs: int = 1,
              mode: str | None = None) -> None:
    """Transconductance sweep: gain surface plus per-g_m steady-state
    correlation reports (unstable rows are emitted as gaps)."""
    from .circuit_model import derive_all
    t, e = cfg.transistor, cfg.environment
    coeffs = derive_all(t, e)
    req = make_default_request(coeffs, e, _omega_grid(cfg))
    gm_grid = _gm_grid(cfg)
    mode = mode or (MODE_LITERAL if cfg.correlations_mode == "literal"
                    else MODE_STANDARD)

    surface = gm_gain_surface(gm_grid, req, t, e, jobs=jobs)
    rows = []
    for r, gm in enumerate(surface.gm_grid):
        for i in range(surface.omega_over_omega0.size):
            rows.append((gm, surface.omega_over_omega0[i],
                         surface.gain1_norm[r, i], surface.gain2_norm[r, i],
                         surface.gain1_raw[r, i], surface.gain2_raw[r, i],
                         bool(surface.singular_flags[r, i])))
    ctx.add(emit_csv(rows, ctx.out / "surface.csv", SURFACE_COLUMNS))

    def one_report(gm: float):
        cfg_gm = replace(cfg, transistor=replace(t, g_m=float(gm)))
        hn, psd, k1, k2, _ = _dynamics_inputs(cfg_gm)
        drift = hamiltonian_drift(hn, k1, k2)
        diffusion = diffusion_matrix(k1, k2, psd.n_bar_1, psd.n_bar_2)
        try:
            ss = steady_state_gaussian(drift, diffusion)
        except UnstableDrift:
            return (float(gm), math.nan, math.nan, math.nan, False,
                    math.nan, math.nan, math.nan, mode)
        rep = correlation_report(ss.cm, mode=mode)
        return (float(gm), rep.nu_plus, rep.nu_minus, rep.nu_tilde_minus,
                rep.entangled, rep.discord, rep.classical_corr, rep.purity,
                rep.mode)

    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(one_report, gm_grid))
    else:
        reports = [one_report(gm) for gm in gm_grid]
    unstable_rows = [r[0] for r in reports if math.isnan(r[1])]
    if unstable_rows:
        ctx.notes["unstable_gm_rows"] = unstable_rows
    ctx.add(emit_csv(reports, ctx.out / "correlations.csv",
                     CORRELATION_COLUMNS))
