"""Circuit-to-Hamiltonian coefficient pipeline.

Two LC matching networks (gate side and drain side) are coupled through the
small-signal equivalent circuit of an nMOS transistor.  Eliminating the
internal capacitive couplings by a Legendre transformation reduces the
circuit to two oscillators with charge-charge, charge-flux and flux-flux
interactions.  This module turns the raw circuit parameters into that full
coefficient set: partial node capacitances, the auxiliary inverse-capacitance
terms of the reduction, the oscillator impedances/frequencies, the three
interaction rates (g_q1q2, g_q1p2, g_q2p2), the linear drive rates, and the
thermal-noise spectral densities.

All operations are pure functions of their inputs and hold no shared state.

Convention: the capacitance-matrix determinant D_M = C_p1*C_p2 - C_gd**2
(units F^2) is used everywhere a single symbol for the coupling determinant
appears; this is the unique reading that makes every derived coefficient
dimensionally consistent with its stated unit.  C_12 itself can diverge when
C_gd -> 0, so only its reciprocal invC_12 is ever stored.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.constants import hbar, k as k_B

from .errors import DegenerateCoupling, UnitError

__all__ = [
    "TransistorParams",
    "EnvironmentParams",
    "PartialCaps",
    "AuxCoeffs",
    "HamiltonianCoefficients",
    "NoisePSDs",
    "derive_partial_caps",
    "derive_aux_coeffs",
    "derive_hamiltonian_coeffs",
    "derive_all",
    "thermal_noise_psds",
    "bose_occupation",
    "calibrate_capacitance",
    "calibrate_matching_caps",
]


def _require_positive(name: str, value: float) -> None:
    if not value > 0.0:
        raise UnitError(f"{name} must be strictly positive, got {value!r}")


@dataclass(frozen=True)
class TransistorParams:
    """Small-signal transistor model values, SI units.

    C_pg, C_pd (pad capacitances), L_s and R_s are accepted for config
    fidelity but enter no equation of the reduction; they are flagged as
    unused in the coefficient report.
    """

    width_um: float       # gate width in micrometers
    C_pg: float           # gate pad capacitance [F]
    C_pd: float           # drain pad capacitance [F]
    L_g: float            # gate-side matching inductance [H]
    L_d: float            # drain-side matching inductance [H]
    L_s: float            # source inductance [H] (unused by the reduction)
    R_g: float            # gate resistance [ohm]
    R_d: float            # drain resistance [ohm]
    R_s: float            # source resistance [ohm] (unused by the reduction)
    C_gs: float           # gate-source capacitance [F]
    C_gd: float           # gate-drain capacitance [F]
    C_ds: float           # drain-source capacitance [F], absorbs the output matching shunt
    g_m: float            # transconductance [S]
    gamma_noise: float    # empirical channel-noise factor (dimensionless)

    def __post_init__(self):
        for name in ("width_um", "C_pg", "C_pd", "L_g", "L_d", "L_s",
                     "R_g", "R_d", "R_s", "C_gs", "C_ds", "gamma_noise"):
            _require_positive(f"transistor.{name}", getattr(self, name))
        if self.C_gd < 0.0:
            raise UnitError(f"transistor.C_gd must be >= 0, got {self.C_gd!r}")
        if self.g_m < 0.0:
            raise UnitError(f"transistor.g_m must be >= 0, got {self.g_m!r}")


@dataclass(frozen=True)
class EnvironmentParams:
    """Bath, drive and matching-network parameters, SI units."""

    T_em: float           # environment temperature [K]
    kappa1: float         # gate-oscillator decay rate [1/s]
    kappa2: float         # drain-oscillator decay rate [1/s]
    V_RF: float           # RF drive amplitude [V]
    C_in: float           # input coupling capacitance [F]
    omega_ref: float      # reference angular frequency omega_0 [rad/s]

    def __post_init__(self):
        _require_positive("environment.T_em", self.T_em)
        _require_positive("environment.kappa1", self.kappa1)
        _require_positive("environment.kappa2", self.kappa2)
        _require_positive("environment.C_in", self.C_in)
        _require_positive("environment.omega_ref", self.omega_ref)
        if self.V_RF < 0.0:
            raise UnitError(f"environment.V_RF must be >= 0, got {self.V_RF!r}")

    @property
    def kappa_loss(self) -> float:
        """Total reservoir coupling kappa1 + kappa2 (derived, never stored)."""
        return self.kappa1 + self.kappa2


@dataclass(frozen=True)
class PartialCaps:
    """Node capacitances of the two oscillators and their coupling determinant."""

    C_p1: float           # total gate-node capacitance [F]
    C_p2: float           # total drain-node capacitance [F]
    D_M: float            # C_p1*C_p2 - C_gd**2 [F^2]

    def __post_init__(self):
        if not self.D_M > 0.0:
            raise DegenerateCoupling(
                f"capacitance determinant D_M must be > 0, got {self.D_M!r} "
                "(feedback capacitance C_gd dominates the node capacitances)")


@dataclass(frozen=True)
class AuxCoeffs:
    """Auxiliary coefficients of the Legendre elimination of the internal node.

    inv2C_1p, inv2C_2p and invC_12p are stored as inverse capacitances
    (1/2C_1p etc.) because the underlying capacitances diverge in physically
    regular limits.
    """

    inv2C_1p: float       # [1/F]
    inv2C_2p: float       # [1/F]
    invC_12p: float       # [1/F]
    g_12p: float          # [1/s]
    g_22p: float          # [1/s]
    V_q1p: float          # dimensionless drive factor
    V_q2p: float          # dimensionless drive factor
    G_1: float            # [S]


@dataclass(frozen=True)
class HamiltonianCoefficients:
    """Every coefficient of the two-oscillator Hamiltonian, SI units.

    This is the single source of truth consumed by the spectral and dynamics
    modules.  invC_12 is the reciprocal of the cross capacitance (finite even
    when the cross capacitance diverges at C_gd = 0).
    """

    C_1: float            # gate-oscillator capacitance [F]
    C_2: float            # drain-oscillator capacitance [F]
    invC_12: float        # reciprocal cross capacitance [1/F]
    g_12: float           # charge-flux cross rate [1/s]
    g_22: float           # drain-local charge-flux rate [1/s]
    V_q1: float           # gate charge-drive amplitude [V]
    V_q2: float           # drain charge-drive amplitude [V]
    Z_1: float            # gate LC impedance [ohm]
    Z_2: float            # drain LC impedance [ohm]
    omega_1: float        # gate resonance [rad/s]
    omega_2: float        # drain resonance [rad/s]
    g_q1q2: float         # charge(1)-charge(2) coupling [rad/s]
    g_q1p2: float         # charge(1)-flux(2) coupling [rad/s]
    g_q2p2: float         # charge(2)-flux(2) coupling [rad/s]
    gamma_q1: float       # charge-quadrature drive rate, mode 1 [1/s]
    gamma_q2: float       # charge-quadrature drive rate, mode 2 [1/s]
    gamma_phi1: float     # flux-quadrature drive rate, mode 1 [1/s]
    gamma_phi2: float     # flux-quadrature drive rate, mode 2 [1/s]


@dataclass(frozen=True)
class NoisePSDs:
    """Thermal current noise densities and bath occupations."""

    i_g_sq: float         # gate-resistor noise PSD [A^2/Hz]
    i_d_sq: float         # drain-resistor noise PSD [A^2/Hz]
    i_ds_sq: float        # channel noise PSD [A^2/Hz]
    n_bar_1: float        # bath occupation at omega_1 (dimensionless)
    n_bar_2: float        # bath occupation at omega_2 (dimensionless)


def derive_partial_caps(t: TransistorParams, e: EnvironmentParams) -> PartialCaps:
    """Collapse the capacitance network onto the two oscillator nodes.

    C_p1 collects everything on the gate node (input coupling, gate-source,
    gate-drain), C_p2 everything on the drain node, and D_M is the 2x2
    capacitance-matrix determinant whose positivity the reduction requires.
    """
    C_p1 = e.C_in + t.C_gs + t.C_gd
    C_p2 = t.C_gd + t.C_ds
    D_M = C_p1 * C_p2 - t.C_gd ** 2
    if not D_M > 0.0:
        raise DegenerateCoupling(
            f"capacitance determinant D_M = {D_M!r} <= 0; "
            "feedback capacitance C_gd dominates the node capacitances")
    return PartialCaps(C_p1=C_p1, C_p2=C_p2, D_M=D_M)


def derive_aux_coeffs(p: PartialCaps, t: TransistorParams,
                      e: EnvironmentParams) -> AuxCoeffs:
    """Evaluate the eight auxiliary elimination coefficients.

    Literal transcription of the closed forms, with the determinant D_M in
    every place the reduction divides by the coupling determinant and D_M**2
    in every place it divides by its square.
    """
    C_p1, C_p2, D_M = p.C_p1, p.C_p2, p.D_M
    C_gd = t.C_gd
    C_in = e.C_in
    g_m = t.g_m
    D2 = D_M * D_M

    inv2C_1p = (C_p1 * C_p2 ** 2 - C_gd ** 2 * C_p2) / (2.0 * D2)
    inv2C_2p = (C_p1 ** 2 * C_p2 - C_p1 * C_gd ** 2) / (2.0 * D2)
    invC_12p = (-C_gd * (C_p1 * C_p2 + C_gd ** 2) + 2.0 * C_p1 * C_gd * C_p2) / D2
    g_12p = ((-g_m * C_gd * C_p1 * C_p2 + 2.0 * g_m * C_p1 ** 2 * C_p2) / D2
             - g_m * C_p2 / D_M)
    g_22p = ((g_m * C_gd ** 2 * C_p1 - g_m * C_gd * (C_p1 * C_p2 + C_gd ** 2)) / D2
             - g_m * C_gd / D_M)
    V_q1p = (C_in * C_p1 * C_p2 ** 2 - C_gd ** 2 * C_in * C_p2) / D2
    V_q2p = (2.0 * C_in * C_p1 * C_p1 * C_gd
             - C_gd * (C_gd ** 2 * C_in + C_in * C_p1 * C_p2)) / D2
    G_1 = ((2.0 * g_m * C_in * C_p1 * C_p1 * C_gd
            - g_m * C_gd * (C_gd ** 2 * C_in + C_in * C_p1 * C_p2)) / D2
           - g_m * C_in * C_p2 / D_M)

    return AuxCoeffs(inv2C_1p=inv2C_1p, inv2C_2p=inv2C_2p, invC_12p=invC_12p,
                     g_12p=g_12p, g_22p=g_22p, V_q1p=V_q1p, V_q2p=V_q2p, G_1=G_1)


def derive_hamiltonian_coeffs(p: PartialCaps, a: AuxCoeffs, t: TransistorParams,
                              e: EnvironmentParams) -> HamiltonianCoefficients:
    """Assemble the full oscillator + coupling + drive coefficient set.

    The oscillator capacitances come from the reduced quadratic form,
    impedances and frequencies from the usual LC relations, the interaction
    trio from the charge/flux quadrature substitution, and the drive rates
    from the linear terms (with the thermal-noise source terms entering the
    flux drives).

    Raises
    ------
    DegenerateCoupling
        If a reduced oscillator capacitance would be nonpositive.
    """
    C_p1, C_p2, D_M = p.C_p1, p.C_p2, p.D_M
    C_gd = t.C_gd
    g_m = t.g_m
    V_RF = e.V_RF

    den1 = C_p2 / D_M - a.inv2C_1p
    if not den1 > 0.0:
        raise DegenerateCoupling(
            f"reduced gate capacitance denominator {den1!r} <= 0 (nonphysical C_1)")
    den2 = C_p1 / D_M - a.inv2C_2p
    if not den2 > 0.0:
        raise DegenerateCoupling(
            f"reduced drain capacitance denominator {den2!r} <= 0 (nonphysical C_2)")
    C_1 = 0.5 / den1
    C_2 = 0.5 / den2

    # Reciprocal storage: the cross capacitance itself diverges at C_gd = 0.
    invC_12 = 2.0 * (2.0 * C_gd / D_M - 0.5 * a.invC_12p)

    g_12 = g_m * C_gd / D_M - a.g_12p
    g_22 = g_m * C_p1 / D_M - a.g_22p
    V_q1 = V_RF * (e.C_in * C_p2 / D_M - a.V_q1p)
    V_q2 = V_RF * (e.C_in * C_gd / D_M - a.V_q2p)

    Z_1 = math.sqrt(t.L_g / C_1)
    Z_2 = math.sqrt(t.L_d / C_2)
    omega_1 = 1.0 / math.sqrt(t.L_g * C_1)
    omega_2 = 1.0 / math.sqrt(t.L_d * C_2)

    g_q1q2 = -0.5 * invC_12 / math.sqrt(Z_1 * Z_2)
    g_q1p2 = -0.5 * g_12 * math.sqrt(Z_2 / Z_1)
    g_q2p2 = -0.5 * g_22

    i_g_sq = _noise_psd(e.T_em, t.R_g)
    i_d_sq = _noise_psd(e.T_em, t.R_d)
    i_ds_sq = 4.0 * k_B * e.T_em * t.gamma_noise * g_m

    gamma_q1 = -V_q1 * math.sqrt(1.0 / (2.0 * hbar * Z_1))
    gamma_q2 = -V_q2 * math.sqrt(1.0 / (2.0 * hbar * Z_2))
    gamma_phi1 = -i_g_sq * math.sqrt(Z_1 / (2.0 * hbar))
    gamma_phi2 = -(a.G_1 * V_RF + i_ds_sq + i_d_sq) * math.sqrt(Z_2 / (2.0 * hbar))

    return HamiltonianCoefficients(
        C_1=C_1, C_2=C_2, invC_12=invC_12, g_12=g_12, g_22=g_22,
        V_q1=V_q1, V_q2=V_q2, Z_1=Z_1, Z_2=Z_2,
        omega_1=omega_1, omega_2=omega_2,
        g_q1q2=g_q1q2, g_q1p2=g_q1p2, g_q2p2=g_q2p2,
        gamma_q1=gamma_q1, gamma_q2=gamma_q2,
        gamma_phi1=gamma_phi1, gamma_phi2=gamma_phi2)


def derive_all(t: TransistorParams, e: EnvironmentParams) -> HamiltonianCoefficients:
    """Run the whole pipeline: partial caps -> auxiliary terms -> coefficients."""
    p = derive_partial_caps(t, e)
    a = derive_aux_coeffs(p, t, e)
    return derive_hamiltonian_coeffs(p, a, t, e)


def _noise_psd(T: float, R: float) -> float:
    # Johnson-Nyquist one-sided current PSD of a resistor.
    return 4.0 * k_B * T / R


def thermal_noise_psds(t: TransistorParams, e: EnvironmentParams) -> NoisePSDs:
    """Thermal current noise of the resistors and channel, plus bath occupations.

    The occupations are evaluated at the derived oscillator frequencies, so
    the capacitance pipeline is run internally.
    """
    coeffs = derive_all(t, e)
    return NoisePSDs(
        i_g_sq=_noise_psd(e.T_em, t.R_g),
        i_d_sq=_noise_psd(e.T_em, t.R_d),
        i_ds_sq=4.0 * k_B * e.T_em * t.gamma_noise * t.g_m,
        n_bar_1=bose_occupation(coeffs.omega_1, e.T_em),
        n_bar_2=bose_occupation(coeffs.omega_2, e.T_em),
    )


def bose_occupation(omega: float, T: float) -> float:
    """Bose-Einstein occupation 1/(exp(hbar*omega/kB*T) - 1).

    Returns 0 in the T -> 0 limit (the exponent overflow regime).
    """
    if omega <= 0.0:
        raise UnitError(f"omega must be > 0, got {omega!r}")
    if T < 0.0:
        raise UnitError(f"T must be >= 0, got {T!r}")
    if T == 0.0:
        return 0.0
    x = hbar * omega / (k_B * T)
    if x > 700.0:
        return 0.0
    return 1.0 / math.expm1(x)


def calibrate_capacitance(L: float, omega_target: float) -> float:
    """Capacitance that puts an LC resonance at omega_target: C = 1/(L*omega^2)."""
    _require_positive("L", L)
    _require_positive("omega_target", omega_target)
    return 1.0 / (L * omega_target ** 2)


def calibrate_matching_caps(C_gs: float, C_gd: float, L_g: float, L_d: float,
                            omega1_target: float, omega2_target: float,
                            ) -> tuple[float, float]:
    """Back out (C_in, C_ds) that place the oscillators at the target frequencies.

    The reduced oscillator capacitances are C_1 = C_p1 - C_gd^2/C_p2 and
    C_2 = C_p2 - C_gd^2/C_p1, so the node totals obey the coupled pair
    C_p1 = C_1* + C_gd^2/C_p2, C_p2 = C_2* + C_gd^2/C_p1 with targets from
    ``calibrate_capacitance``; the fixed point converges immediately because
    C_gd^2 is tiny against the node products.
    """
    C1s = calibrate_capacitance(L_g, omega1_target)
    C2s = calibrate_capacitance(L_d, omega2_target)
    C_p1 = C1s
    C_p2 = C2s
    for _ in range(200):
        new_p2 = C2s + C_gd ** 2 / C_p1
        new_p1 = C1s + C_gd ** 2 / new_p2
        if new_p1 == C_p1 and new_p2 == C_p2:
            break
        C_p1, C_p2 = new_p1, new_p2
    C_in = C_p1 - C_gs - C_gd
    C_ds = C_p2 - C_gd
    if C_in <= 0.0 or C_ds <= 0.0:
        raise DegenerateCoupling(
            f"matching calibration yields nonpositive C_in={C_in!r} or "
            f"C_ds={C_ds!r}; targets too low for the intrinsic capacitances")
    return C_in, C_ds
