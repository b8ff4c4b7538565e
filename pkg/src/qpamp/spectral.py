"""Frequency-domain response: scattering matrix, gain spectra, g_m sweeps.

The linearized intracavity equations in the mode column (a1, a1+, a2, a2+)
become, after Fourier transformation, a linear system A(omega) [a] = [a_in].
``build_scattering_matrix`` assembles A literally; ``output_map`` applies the
input-output relation S = I + A^-1 sqrt(kappa) so that [a_out] = S [a_in];
``gain_spectrum`` sweeps a frequency grid and reports the squared moduli of
the diagonal reflection entries for the two annihilation rows.

Frame and units used by ``gain_spectrum``: the matrix is evaluated with all
rate-like quantities (detunings, decay rates, couplings, Fourier variable)
expressed in units of the reference frequency omega_ref.  The detunings
Omega_i = omega_i - omega_frame are taken relative to a common frame
frequency (the request builder defaults to the midpoint (omega_1+omega_2)/2,
which makes the signal row of one oscillator and the conjugate row of the
other resonate together - the parametric-amplification condition).  An
absolute analysis frequency omega_abs maps to the Fourier variable
omega = omega_frame - omega_abs, which places the mode-1 gain peak at
omega_abs = omega_1 and the mode-2 peak at omega_abs = omega_2.

Every per-frequency evaluation is pure; grids and g_m rows may be computed
concurrently and assembled by index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .circuit_model import (EnvironmentParams, HamiltonianCoefficients,
                            TransistorParams, derive_all)
from .errors import SingularAtFrequency, ValidationError

__all__ = [
    "SpectralRequest",
    "ScatteringMatrix",
    "GainTrace",
    "GmGainSurface",
    "build_scattering_matrix",
    "solve_intracavity",
    "output_map",
    "gain_spectrum",
    "gm_gain_surface",
    "find_peaks",
    "make_default_request",
]

_COND_LIMIT = 1e14


@dataclass(frozen=True)
class SpectralRequest:
    """One gain-sweep job.

    omega_grid holds the absolute analysis frequencies (strictly increasing,
    rad/s); Omega_1/Omega_2 are the oscillator detunings from the common
    frame frequency; omega_ref normalizes the output axis and the internal
    rate units.
    """

    omega_grid: np.ndarray
    Omega_1: float
    Omega_2: float
    kappa1: float
    kappa2: float
    coeffs: HamiltonianCoefficients
    omega_ref: float

    def __post_init__(self):
        grid = np.asarray(self.omega_grid, dtype=float)
        if grid.size == 0:
            raise ValidationError("omega_grid must be nonempty")
        if grid.ndim != 1 or not np.all(np.diff(grid) > 0.0):
            raise ValidationError("omega_grid must be 1-D and strictly increasing")
        object.__setattr__(self, "omega_grid", grid)
        if self.kappa1 < 0.0 or self.kappa2 < 0.0:
            raise ValidationError("decay rates kappa1, kappa2 must be >= 0")
        if self.omega_ref <= 0.0:
            raise ValidationError("omega_ref must be > 0")

    @property
    def frame_frequency(self) -> float:
        """Common rotating-frame frequency implied by the detunings."""
        return 0.5 * ((self.coeffs.omega_1 - self.Omega_1)
                      + (self.coeffs.omega_2 - self.Omega_2))


@dataclass(frozen=True)
class ScatteringMatrix:
    """The 4x4 frequency-domain system matrix at a single Fourier point.

    Mode column ordering is fixed as (a1, a1+, a2, a2+).  Eight positions
    are structurally zero.
    """

    entries: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=complex)
        if m.shape != (4, 4):
            raise ValidationError(f"scattering matrix must be 4x4, got {m.shape}")
        object.__setattr__(self, "entries", m)


@dataclass(frozen=True)
class GainTrace:
    """Gain of both oscillators over a frequency grid.

    gain1/gain2 are |S11|^2 and |S33|^2; singular grid points hold NaN and
    are marked in singular_flags (gaps, never interpolated).
    """

    omega_over_omega0: np.ndarray
    gain1: np.ndarray
    gain2: np.ndarray
    normalized: bool
    gain1_raw: np.ndarray = field(repr=False, default=None)
    gain2_raw: np.ndarray = field(repr=False, default=None)
    singular_flags: np.ndarray = field(repr=False, default=None)


@dataclass(frozen=True)
class GmGainSurface:
    """Row-major gain surface over (g_m, omega) with explicit axis records."""

    gm_grid: np.ndarray
    omega_over_omega0: np.ndarray
    gain1_raw: np.ndarray        # shape (n_gm, n_omega)
    gain2_raw: np.ndarray
    gain1_norm: np.ndarray       # per-row normalization
    gain2_norm: np.ndarray
    singular_flags: np.ndarray


def build_scattering_matrix(req: SpectralRequest, omega: float) -> ScatteringMatrix:
    """Assemble the 4x4 system matrix at Fourier variable ``omega``.

    All rates are used exactly as given (no unit normalization here); the
    caller controls units.  Entry pattern in the (a1, a1+, a2, a2+) basis:

        [ j(O1+w)+k1/2      0              0            jg + g'  ]
        [     0         j(w-O1)+k1/2   -jg + g'            0     ]
        [     0          jg + g'      j(O2+w)+k2/2       2g''    ]
        [ -jg + g'           0            2g''        j(w-O2)+k2/2]

    with g = g_q1q2, g' = g_q1p2, g'' = g_q2p2.
    """
    c = req.coeffs
    g = c.g_q1q2
    gp = c.g_q1p2
    gpp = c.g_q2p2
    O1, O2 = req.Omega_1, req.Omega_2
    k1, k2 = req.kappa1, req.kappa2

    m = np.zeros((4, 4), dtype=complex)
    m[0, 0] = 1j * (O1 + omega) + 0.5 * k1
    m[1, 1] = 1j * (omega - O1) + 0.5 * k1
    m[2, 2] = 1j * (O2 + omega) + 0.5 * k2
    m[3, 3] = 1j * (omega - O2) + 0.5 * k2
    m[0, 3] = 1j * g + gp
    m[1, 2] = -1j * g + gp
    m[2, 1] = 1j * g + gp
    m[3, 0] = -1j * g + gp
    m[2, 3] = 2.0 * gpp
    m[3, 2] = 2.0 * gpp
    return ScatteringMatrix(entries=m)


def _check_conditioning(a: np.ndarray) -> None:
    cond = np.linalg.cond(a)
    if not np.isfinite(cond) or cond > _COND_LIMIT:
        raise SingularAtFrequency(
            f"system matrix condition number {cond:.3e} exceeds {_COND_LIMIT:.0e}")


def solve_intracavity(A: ScatteringMatrix, input_amps: np.ndarray) -> np.ndarray:
    """Solve A x = a_in for the intracavity amplitudes at one frequency.

    Raises
    ------
    SingularAtFrequency
        If the condition number exceeds 1e14 (undamped resonance); the
        caller should record a gap for this grid point.
    """
    a = A.entries
    b = np.asarray(input_amps, dtype=complex).reshape(4)
    _check_conditioning(a)
    return np.linalg.solve(a, b)


def output_map(A: ScatteringMatrix, kappa1: float, kappa2: float) -> np.ndarray:
    """Input-output matrix S = I + A^-1 sqrt(kappa), [a_out] = S [a_in].

    sqrt(kappa) is the diagonal (sqrt(k1), sqrt(k1), sqrt(k2), sqrt(k2)).
    Propagates SingularAtFrequency from the underlying solve.
    """
    a = A.entries
    _check_conditioning(a)
    sqrt_k = np.diag([math.sqrt(kappa1), math.sqrt(kappa1),
                      math.sqrt(kappa2), math.sqrt(kappa2)]).astype(complex)
    return np.eye(4, dtype=complex) + np.linalg.solve(a, sqrt_k)


def gain_spectrum(req: SpectralRequest) -> GainTrace:
    """Sweep the grid and return normalized and raw gain traces.

    For each absolute frequency the matrix is evaluated at the Fourier
    variable (frame - omega_abs)/omega_ref with detunings, decay rates and
    couplings in units of omega_ref.  gain_i is the squared modulus of the
    diagonal output-map entry of mode i's annihilation row; each trace is
    normalized by its own maximum over the non-singular grid points.
    """
    scale = 1.0 / req.omega_ref
    c = req.coeffs
    scaled = replace(
        c,
        g_q1q2=c.g_q1q2 * scale,
        g_q1p2=c.g_q1p2 * scale,
        g_q2p2=c.g_q2p2 * scale,
    )
    scaled_req = replace(req, coeffs=scaled,
                         Omega_1=req.Omega_1 * scale, Omega_2=req.Omega_2 * scale,
                         kappa1=req.kappa1 * scale, kappa2=req.kappa2 * scale)
    frame = req.frame_frequency
    n = req.omega_grid.size
    gain1 = np.full(n, np.nan)
    gain2 = np.full(n, np.nan)
    flags = np.zeros(n, dtype=bool)
    for i, w_abs in enumerate(req.omega_grid):
        w = (frame - w_abs) * scale
        a = build_scattering_matrix(scaled_req, w)
        try:
            s = output_map(a, scaled_req.kappa1, scaled_req.kappa2)
        except SingularAtFrequency:
            flags[i] = True
            continue
        gain1[i] = abs(s[0, 0]) ** 2
        gain2[i] = abs(s[2, 2]) ** 2

    ok = ~flags
    max1 = np.max(gain1[ok]) if ok.any() else np.nan
    max2 = np.max(gain2[ok]) if ok.any() else np.nan
    return GainTrace(
        omega_over_omega0=req.omega_grid / req.omega_ref,
        gain1=gain1 / max1,
        gain2=gain2 / max2,
        normalized=True,
        gain1_raw=gain1,
        gain2_raw=gain2,
        singular_flags=flags,
    )


def gm_gain_surface(gm_grid: np.ndarray, req: SpectralRequest,
                    transistor: TransistorParams,
                    environment: EnvironmentParams,
                    jobs: int = 1) -> GmGainSurface:
    """Gain spectra for a sweep of transconductance values.

    For every g_m the full coefficient pipeline is re-run (only the
    transconductance is replaced) and a gain trace computed on the request
    grid; rows are assembled by index so any evaluation order gives the
    same surface.
    """
    gm_grid = np.asarray(gm_grid, dtype=float)
    if gm_grid.ndim != 1 or gm_grid.size == 0:
        raise ValidationError("gm_grid must be a nonempty 1-D array")
    if np.any(gm_grid < 0.0) or not np.all(np.diff(gm_grid) > 0.0):
        raise ValidationError("gm_grid must be nonnegative and strictly increasing")

    def one_row(gm: float) -> GainTrace:
        coeffs = derive_all(replace(transistor, g_m=float(gm)), environment)
        return gain_spectrum(replace(req, coeffs=coeffs))

    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(one_row, gm_grid))
    else:
        rows = [one_row(gm) for gm in gm_grid]

    return GmGainSurface(
        gm_grid=gm_grid,
        omega_over_omega0=rows[0].omega_over_omega0,
        gain1_raw=np.vstack([r.gain1_raw for r in rows]),
        gain2_raw=np.vstack([r.gain2_raw for r in rows]),
        gain1_norm=np.vstack([r.gain1 for r in rows]),
        gain2_norm=np.vstack([r.gain2 for r in rows]),
        singular_flags=np.vstack([r.singular_flags for r in rows]),
    )


def find_peaks(trace: GainTrace, component: str = "gain1") -> list[tuple[float, float]]:
    """Strict local maxima of one gain component by 3-point comparison.

    Returns (omega_over_omega0, height) pairs sorted by height descending.
    NaN samples (singular gaps) never qualify and suppress their neighbors.
    ``component`` selects among gain1/gain2/gain1_raw/gain2_raw.
    """
    omega = np.asarray(trace.omega_over_omega0, dtype=float)
    height = np.asarray(getattr(trace, component), dtype=float)
    if omega.size == 0:
        raise ValidationError("trace must be nonempty")
    peaks = []
    for i in range(1, len(height) - 1):
        if height[i] > height[i - 1] and height[i] > height[i + 1]:
            peaks.append((float(omega[i]), float(height[i])))
    peaks.sort(key=lambda p: p[1], reverse=True)
    return peaks


def make_default_request(coeffs: HamiltonianCoefficients,
                         environment: EnvironmentParams,
                         omega_grid: np.ndarray) -> SpectralRequest:
    """Request with midpoint-frame detunings (the parametric condition).

    Omega_i = omega_i - (omega_1 + omega_2)/2, so the two detunings are
    equal and opposite and the signal/conjugate rows resonate in pairs.
    """
    frame = 0.5 * (coeffs.omega_1 + coeffs.omega_2)
    return SpectralRequest(
        omega_grid=np.asarray(omega_grid, dtype=float),
        Omega_1=coeffs.omega_1 - frame,
        Omega_2=coeffs.omega_2 - frame,
        kappa1=environment.kappa1,
        kappa2=environment.kappa2,
        coeffs=coeffs,
        omega_ref=environment.omega_ref,
    )
