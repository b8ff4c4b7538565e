"""Walk the circuit-to-Hamiltonian coefficient pipeline step by step.

Starts from the shipped default circuit (a 42 um nMOS with calibrated
matching networks), derives the node capacitances, the auxiliary
elimination terms, and the full oscillator/coupling/drive coefficient set,
then demonstrates the two structural limits: zero transconductance kills
every flux coupling, zero feedback capacitance kills the charge-charge
coupling.
"""

from dataclasses import replace

from qpamp.circuit_model import (derive_all, derive_aux_coeffs,
                                 derive_hamiltonian_coeffs,
                                 derive_partial_caps, thermal_noise_psds)
from qpamp.config import default_config_path, parse_config


def show(label, value, unit=""):
    print(f"  {label:<12} = {value: .6e} {unit}")


def main():
    cfg = parse_config(default_config_path())
    t, e = cfg.transistor, cfg.environment

    print("Node capacitances (gate node, drain node, determinant):")
    p = derive_partial_caps(t, e)
    show("C_p1", p.C_p1, "F")
    show("C_p2", p.C_p2, "F")
    show("D_M", p.D_M, "F^2")

    print("\nAuxiliary elimination coefficients:")
    a = derive_aux_coeffs(p, t, e)
    for name in ("inv2C_1p", "inv2C_2p", "invC_12p", "g_12p", "g_22p", "G_1"):
        show(name, getattr(a, name))
    # invC_12p * D_M collapses to C_gd identically - a good pipeline check.
    print(f"  identity invC_12p * D_M - C_gd = "
          f"{a.invC_12p * p.D_M - t.C_gd:.3e} F")

    print("\nOscillators and interaction rates:")
    h = derive_hamiltonian_coeffs(p, a, t, e)
    show("omega_1/2pi", h.omega_1 / (2 * 3.141592653589793), "Hz")
    show("omega_2/2pi", h.omega_2 / (2 * 3.141592653589793), "Hz")
    show("Z_1", h.Z_1, "ohm")
    show("Z_2", h.Z_2, "ohm")
    show("g_q1q2", h.g_q1q2, "rad/s")
    show("g_q1p2", h.g_q1p2, "rad/s")
    show("g_q2p2", h.g_q2p2, "rad/s")

    print("\nThermal noise at", e.T_em, "K:")
    psd = thermal_noise_psds(t, e)
    show("i_g^2", psd.i_g_sq, "A^2/Hz")
    show("i_d^2", psd.i_d_sq, "A^2/Hz")
    show("i_ds^2", psd.i_ds_sq, "A^2/Hz")
    show("n_bar_1", psd.n_bar_1)
    show("n_bar_2", psd.n_bar_2)

    print("\nStructural limits:")
    h0 = derive_all(replace(t, g_m=0.0), e)
    print(f"  g_m = 0    -> g_q1p2 = {h0.g_q1p2}, g_q2p2 = {h0.g_q2p2}")
    hf = derive_all(replace(t, C_gd=0.0), e)
    print(f"  C_gd = 0   -> g_q1q2 = {hf.g_q1q2} (reciprocal storage, no "
          "division by zero)")


if __name__ == "__main__":
    main()
