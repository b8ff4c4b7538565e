"""Coefficient pipeline: golden values, identities, scaling laws."""

import math
from dataclasses import replace
from fractions import Fraction

import numpy as np
import pytest
from scipy.constants import hbar, k as k_B
from scipy.optimize import brentq

from qpamp.circuit_model import (EnvironmentParams, PartialCaps,
                                 TransistorParams, bose_occupation,
                                 calibrate_capacitance, derive_all,
                                 derive_aux_coeffs, derive_hamiltonian_coeffs,
                                 derive_partial_caps, thermal_noise_psds)
from qpamp.errors import DegenerateCoupling, UnitError

OMEGA0 = 2.0 * math.pi * 5.2e9

TABLE_DEFAULTS = dict(width_um=42.0, C_pg=13.65e-15, C_pd=12.11e-15,
                      L_g=32.13e-12, L_d=32.24e-12, L_s=45.22e-12,
                      R_g=25.78, R_d=2.62, R_s=0.36)


def make_transistor(C_gs=1e-15, C_gd=1e-15, C_ds=1e-15, g_m=1.0, gamma_noise=1.0):
    return TransistorParams(C_gs=C_gs, C_gd=C_gd, C_ds=C_ds, g_m=g_m,
                            gamma_noise=gamma_noise, **TABLE_DEFAULTS)


def make_environment(C_in=1e-15, T_em=0.3, V_RF=1e-6,
                     kappa1=1e8, kappa2=1e8, omega_ref=OMEGA0):
    return EnvironmentParams(T_em=T_em, kappa1=kappa1, kappa2=kappa2,
                             V_RF=V_RF, C_in=C_in, omega_ref=omega_ref)


def exact_aux(C_in, C_gs, C_gd, C_ds, g_m):
    """Independent transcription of the eight auxiliary formulas in exact
    rational arithmetic (inputs are Fractions)."""
    C_p1 = C_in + C_gs + C_gd
    C_p2 = C_gd + C_ds
    D = C_p1 * C_p2 - C_gd ** 2
    D2 = D * D
    return {
        "C_p1": C_p1, "C_p2": C_p2, "D_M": D,
        "inv2C_1p": (C_p1 * C_p2 ** 2 - C_gd ** 2 * C_p2) / (2 * D2),
        "inv2C_2p": (C_p1 ** 2 * C_p2 - C_p1 * C_gd ** 2) / (2 * D2),
        "invC_12p": (-C_gd * (C_p1 * C_p2 + C_gd ** 2) + 2 * C_p1 * C_gd * C_p2) / D2,
        "g_12p": (-g_m * C_gd * C_p1 * C_p2 + 2 * g_m * C_p1 ** 2 * C_p2) / D2
                 - g_m * C_p2 / D,
        "g_22p": (g_m * C_gd ** 2 * C_p1 - g_m * C_gd * (C_p1 * C_p2 + C_gd ** 2)) / D2
                 - g_m * C_gd / D,
        "V_q1p": (C_in * C_p1 * C_p2 ** 2 - C_gd ** 2 * C_in * C_p2) / D2,
        "V_q2p": (2 * C_in * C_p1 * C_p1 * C_gd
                  - C_gd * (C_gd ** 2 * C_in + C_in * C_p1 * C_p2)) / D2,
        "G_1": (2 * g_m * C_in * C_p1 * C_p1 * C_gd
                - g_m * C_gd * (C_gd ** 2 * C_in + C_in * C_p1 * C_p2)) / D2
               - g_m * C_in * C_p2 / D,
    }


class TestPartialCaps:
    def test_unit_capacitances(self):
        p = derive_partial_caps(make_transistor(), make_environment())
        assert p.C_p1 == pytest.approx(3e-15, rel=1e-14)
        assert p.C_p2 == pytest.approx(2e-15, rel=1e-14)
        assert p.D_M == pytest.approx(5e-30, rel=1e-14)

    def test_zero_feedback_cross_term_vanishes(self):
        p = derive_partial_caps(make_transistor(C_gd=0.0), make_environment())
        assert p.D_M == pytest.approx(p.C_p1 * p.C_p2, rel=1e-14)
        assert p.D_M == pytest.approx(4e-30, rel=1e-14)

    def test_table_defaults_positive(self):
        p = derive_partial_caps(make_transistor(C_gs=32e-15, C_gd=11e-15,
                                                C_ds=26.9e-12),
                                make_environment(C_in=31.5e-12))
        assert p.D_M > 0.0

    def test_degenerate_determinant_rejected(self):
        with pytest.raises(DegenerateCoupling):
            PartialCaps(C_p1=1e-15, C_p2=1e-15, D_M=-1e-30)


class TestAuxCoeffs:
    def test_unit_capacitance_golden_values(self):
        t = make_transistor()
        p = derive_partial_caps(t, make_environment())
        a = derive_aux_coeffs(p, t, make_environment())
        fF = 1e-15
        assert a.inv2C_1p * fF == pytest.approx(0.2, rel=1e-12)
        assert a.inv2C_2p * fF == pytest.approx(0.3, rel=1e-12)
        assert a.invC_12p * fF == pytest.approx(0.2, rel=1e-12)
        assert a.g_12p * fF == pytest.approx(0.8, rel=1e-12)
        assert a.g_22p * fF == pytest.approx(-0.36, rel=1e-12)

    def test_matches_exact_rational_oracle(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            vals = rng.uniform(0.1, 50.0, size=5)
            fr = [Fraction(v).limit_denominator(10 ** 12) for v in vals]
            C_in, C_gs, C_gd, C_ds, g_m = [float(f) for f in fr]
            t = make_transistor(C_gs=C_gs * 1e-15, C_gd=C_gd * 1e-15,
                                C_ds=C_ds * 1e-15, g_m=g_m)
            e = make_environment(C_in=C_in * 1e-15)
            p = derive_partial_caps(t, e)
            a = derive_aux_coeffs(p, t, e)
            # Oracle in femtofarad units; rates convert by one power of 1e-15.
            ex = exact_aux(*fr)
            for name, scale in (("inv2C_1p", 1e-15), ("inv2C_2p", 1e-15),
                                ("invC_12p", 1e-15), ("g_12p", 1e-15),
                                ("g_22p", 1e-15), ("V_q1p", 1.0),
                                ("V_q2p", 1.0), ("G_1", 1.0)):
                got = getattr(a, name) * scale
                want = float(ex[name])
                assert got == pytest.approx(want, rel=1e-11, abs=1e-25), name

    def test_zero_transconductance(self):
        t = make_transistor(g_m=0.0)
        e = make_environment()
        a = derive_aux_coeffs(derive_partial_caps(t, e), t, e)
        assert a.g_12p == 0.0 and a.g_22p == 0.0 and a.G_1 == 0.0

    def test_zero_feedback(self):
        t = make_transistor(C_gd=0.0)
        e = make_environment()
        a = derive_aux_coeffs(derive_partial_caps(t, e), t, e)
        assert a.invC_12p == 0.0 and a.g_22p == 0.0


class TestHamiltonianCoeffs:
    def test_unit_capacitance_golden_values(self):
        t = make_transistor()
        e = make_environment()
        p = derive_partial_caps(t, e)
        h = derive_hamiltonian_coeffs(p, derive_aux_coeffs(p, t, e), t, e)
        assert h.C_1 == pytest.approx(2.5e-15, rel=1e-12)
        assert h.C_2 == pytest.approx(5e-15 / 3.0, rel=1e-12)
        assert h.invC_12 == pytest.approx(0.6e15, rel=1e-12)
        # Algebraic simplification of the reciprocal cross capacitance.
        assert h.invC_12 == pytest.approx(3.0 * t.C_gd / p.D_M, rel=1e-12)
        assert h.g_22 * 1e-15 == pytest.approx(0.96, rel=1e-12)

    def test_impedances_and_frequencies(self):
        t = make_transistor()
        e = make_environment()
        h = derive_all(t, e)
        assert h.Z_1 == pytest.approx(math.sqrt(t.L_g / h.C_1), rel=1e-14)
        assert h.Z_2 == pytest.approx(math.sqrt(t.L_d / h.C_2), rel=1e-14)
        assert h.omega_1 == pytest.approx(1.0 / math.sqrt(t.L_g * h.C_1), rel=1e-14)
        assert h.omega_2 == pytest.approx(1.0 / math.sqrt(t.L_d * h.C_2), rel=1e-14)

    def test_coupling_trio_definitions(self):
        t = make_transistor(C_gs=3e-15, C_gd=2e-15, C_ds=5e-15, g_m=0.25)
        e = make_environment(C_in=7e-15)
        h = derive_all(t, e)
        assert h.g_q1q2 == pytest.approx(-0.5 * h.invC_12 / math.sqrt(h.Z_1 * h.Z_2),
                                         rel=1e-14)
        assert h.g_q1p2 == pytest.approx(-0.5 * h.g_12 * math.sqrt(h.Z_2 / h.Z_1),
                                         rel=1e-14)
        assert h.g_q2p2 == pytest.approx(-0.5 * h.g_22, rel=1e-14)

    def test_zero_transconductance_kills_flux_couplings(self):
        h = derive_all(make_transistor(g_m=0.0), make_environment())
        assert h.g_q1p2 == 0.0 and h.g_q2p2 == 0.0
        assert h.g_12 == 0.0 and h.g_22 == 0.0

    def test_zero_feedback_kills_charge_coupling(self):
        h = derive_all(make_transistor(C_gd=0.0), make_environment())
        assert h.invC_12 == 0.0
        assert h.g_q1q2 == 0.0

    def test_degenerate_reduction_rejected(self):
        t = make_transistor()
        e = make_environment()
        p = derive_partial_caps(t, e)
        a = derive_aux_coeffs(p, t, e)
        bad = replace(a, inv2C_1p=p.C_p2 / p.D_M + 1.0)
        with pytest.raises(DegenerateCoupling):
            derive_hamiltonian_coeffs(p, bad, t, e)


class TestIdentities:
    """Whole-pipeline identities on random positive parameter draws."""

    def test_reciprocal_identities_1000_draws(self):
        rng = np.random.default_rng(2024)
        for _ in range(1000):
            C_in, C_gs, C_gd, C_ds = rng.uniform(0.05, 80.0, size=4) * 1e-15
            g_m = rng.uniform(0.0, 0.2)
            t = make_transistor(C_gs=C_gs, C_gd=C_gd, C_ds=C_ds, g_m=g_m)
            e = make_environment(C_in=C_in)
            p = derive_partial_caps(t, e)
            a = derive_aux_coeffs(p, t, e)
            h = derive_hamiltonian_coeffs(p, a, t, e)
            assert a.invC_12p * p.D_M == pytest.approx(C_gd, rel=1e-12)
            assert h.invC_12 == pytest.approx(3.0 * C_gd / p.D_M, rel=1e-12)

    def test_capacitance_scaling_law(self):
        t = make_transistor(C_gs=3e-15, C_gd=2e-15, C_ds=5e-15, g_m=0.02)
        e = make_environment(C_in=7e-15)
        base = derive_all(t, e)
        for s in (0.1, 10.0):
            ts = replace(t, C_gs=t.C_gs * s, C_gd=t.C_gd * s, C_ds=t.C_ds * s,
                         C_pg=t.C_pg * s, C_pd=t.C_pd * s)
            es = replace(e, C_in=e.C_in * s)
            scaled = derive_all(ts, es)
            expect = s ** -0.5
            assert scaled.omega_1 / base.omega_1 == pytest.approx(expect, rel=1e-10)
            assert scaled.g_q1q2 / base.g_q1q2 == pytest.approx(expect, rel=1e-10)
            assert (scaled.g_q1q2 / scaled.omega_1
                    == pytest.approx(base.g_q1q2 / base.omega_1, rel=1e-10))

    def test_gate_charge_drive_cancels_identically(self):
        # The Legendre bookkeeping makes the gate-side charge drive vanish
        # for every parameter set: C_in*C_p2/D_M equals V_q1p exactly.
        rng = np.random.default_rng(11)
        for _ in range(50):
            C_in, C_gs, C_gd, C_ds = rng.uniform(0.1, 40.0, size=4) * 1e-15
            t = make_transistor(C_gs=C_gs, C_gd=C_gd, C_ds=C_ds, g_m=0.01)
            e = make_environment(C_in=C_in, V_RF=1e-3)
            p = derive_partial_caps(t, e)
            h = derive_all(t, e)
            # Zero up to rounding of the two O(1) factors that cancel.
            term = e.V_RF * e.C_in * p.C_p2 / p.D_M
            assert abs(h.V_q1) < 1e-12 * term


class TestNoise:
    def test_gate_resistor_psd(self):
        psd = thermal_noise_psds(make_transistor(), make_environment(T_em=0.3))
        # Direct arithmetic oracle with the CODATA Boltzmann constant.
        assert psd.i_g_sq == pytest.approx(4.0 * k_B * 0.3 / 25.78, rel=1e-12)
        assert psd.i_g_sq == pytest.approx(6.43e-25, rel=2e-3)

    def test_drain_resistor_psd(self):
        psd = thermal_noise_psds(make_transistor(), make_environment(T_em=0.3))
        assert psd.i_d_sq == pytest.approx(4.0 * k_B * 0.3 / 2.62, rel=1e-12)

    def test_zero_transconductance_channel_noise(self):
        psd = thermal_noise_psds(make_transistor(g_m=0.0), make_environment())
        assert psd.i_ds_sq == 0.0

    def test_occupations_match_oscillators(self):
        t = make_transistor()
        e = make_environment(T_em=0.3)
        h = derive_all(t, e)
        psd = thermal_noise_psds(t, e)
        assert psd.n_bar_1 == pytest.approx(bose_occupation(h.omega_1, 0.3), rel=1e-14)
        assert psd.n_bar_2 == pytest.approx(bose_occupation(h.omega_2, 0.3), rel=1e-14)


class TestBoseOccupation:
    def test_reference_point(self):
        assert bose_occupation(OMEGA0, 0.3) == pytest.approx(0.771, abs=1e-3)

    def test_zero_temperature_limit(self):
        assert bose_occupation(OMEGA0, 0.0) == 0.0
        assert bose_occupation(OMEGA0, 1e-6) == 0.0

    def test_ln2_point_is_exactly_one(self):
        # hbar*omega = kB*T*ln 2 forces the occupation to 1.
        T = 0.25
        omega = k_B * T * math.log(2.0) / hbar
        assert bose_occupation(omega, T) == pytest.approx(1.0, rel=1e-12)

    def test_rejects_nonpositive_frequency(self):
        with pytest.raises(UnitError):
            bose_occupation(0.0, 1.0)


class TestCalibrateCapacitance:
    def test_reference_inductor(self):
        C = calibrate_capacitance(32.13e-12, OMEGA0)
        # Oracle: numerically solve 1/sqrt(LC) = omega0 for C.
        oracle = brentq(lambda c: 1.0 / math.sqrt(32.13e-12 * c) - OMEGA0,
                        1e-15, 1e-6, xtol=1e-30, rtol=1e-15)
        assert C == pytest.approx(oracle, rel=1e-10)
        assert C == pytest.approx(29.16e-12, rel=1e-3)

    def test_unit_values(self):
        assert calibrate_capacitance(1.0, 1.0) == pytest.approx(1.0, rel=1e-15)

    def test_round_trip(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            L = rng.uniform(1e-12, 1e-9)
            omega = rng.uniform(1e9, 1e11)
            C = calibrate_capacitance(L, omega)
            assert 1.0 / math.sqrt(L * C) == pytest.approx(omega, rel=1e-12)


class TestValidation:
    def test_negative_resistance_rejected(self):
        with pytest.raises(UnitError, match="R_g"):
            make_transistor().__class__(**{**TABLE_DEFAULTS, "R_g": -1.0},
                                        C_gs=1e-15, C_gd=1e-15, C_ds=1e-15,
                                        g_m=0.0, gamma_noise=1.0)

    def test_negative_transconductance_rejected(self):
        with pytest.raises(UnitError, match="g_m"):
            make_transistor(g_m=-0.1)

    def test_nonpositive_temperature_rejected(self):
        with pytest.raises(UnitError, match="T_em"):
            make_environment(T_em=0.0)

    def test_kappa_loss_is_derived(self):
        e = make_environment(kappa1=2e8, kappa2=3e8)
        assert e.kappa_loss == pytest.approx(5e8)
