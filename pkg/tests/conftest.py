"""Shared fixtures: the calibrated two-oscillator parameter set."""

import math

import pytest

from qpamp.circuit_model import (EnvironmentParams, TransistorParams,
                                 calibrate_matching_caps)

OMEGA0 = 2.0 * math.pi * 5.2e9
SPLIT = 0.04          # oscillators at (1 -/+ SPLIT) * omega0
Q_FACTOR = 100.0

TABLE1 = dict(width_um=42.0, C_pg=13.65e-15, C_pd=12.11e-15,
              L_g=32.13e-12, L_d=32.24e-12, L_s=45.22e-12,
              R_g=25.78, R_d=2.62, R_s=0.36)

C_GS_DEFAULT = 32e-15
C_GD_DEFAULT = 11e-15
GM_DEFAULT = 3e-3
VRF_DEFAULT = 2e-6


def default_like_params(g_m=GM_DEFAULT, T_em=0.3, V_RF=VRF_DEFAULT,
                        split=SPLIT):
    """Transistor/environment pair with matching caps calibrated so the
    oscillators sit at (1 -/+ split) * omega0 and Q = 100."""
    w1 = (1.0 - split) * OMEGA0
    w2 = (1.0 + split) * OMEGA0
    C_in, C_ds = calibrate_matching_caps(C_GS_DEFAULT, C_GD_DEFAULT,
                                         TABLE1["L_g"], TABLE1["L_d"], w1, w2)
    t = TransistorParams(C_gs=C_GS_DEFAULT, C_gd=C_GD_DEFAULT, C_ds=C_ds,
                         g_m=g_m, gamma_noise=1.0, **TABLE1)
    e = EnvironmentParams(T_em=T_em, kappa1=w1 / Q_FACTOR, kappa2=w2 / Q_FACTOR,
                          V_RF=V_RF, C_in=C_in, omega_ref=OMEGA0)
    return t, e


@pytest.fixture(scope="session")
def default_pair():
    return default_like_params()


def synth_coeffs(omega_1=0.0, omega_2=0.0, g_q1q2=0.0, g_q1p2=0.0,
                 g_q2p2=0.0, gamma_q1=0.0, gamma_q2=0.0, gamma_phi1=0.0,
                 gamma_phi2=0.0):
    """Dimensionless coefficient record with unit impedances, for direct
    dynamics tests.  The raw fields are back-filled so the interaction-rate
    relations hold (invC_12 = -2 g_q1q2 etc. at Z_1 = Z_2 = 1)."""
    from qpamp.circuit_model import HamiltonianCoefficients
    return HamiltonianCoefficients(
        C_1=1.0, C_2=1.0,
        invC_12=-2.0 * g_q1q2, g_12=-2.0 * g_q1p2, g_22=-2.0 * g_q2p2,
        V_q1=0.0, V_q2=0.0, Z_1=1.0, Z_2=1.0,
        omega_1=omega_1, omega_2=omega_2,
        g_q1q2=g_q1q2, g_q1p2=g_q1p2, g_q2p2=g_q2p2,
        gamma_q1=gamma_q1, gamma_q2=gamma_q2,
        gamma_phi1=gamma_phi1, gamma_phi2=gamma_phi2)
