"""Open-system time evolution by two independent routes.

The same thermal-plus-drive circuit is integrated once as a density matrix
on a truncated number basis (master equation, RK4) and once as a Gaussian
mean/covariance flow (exact moment closure of the same generator).  The
occupation and cross-correlation trajectories land on top of each other,
which is the package's built-in cross oracle.

The run uses a 30 mK variant so a 10-level truncation holds the whole
state (at 300 mK the thermal occupation of 0.8 calls for 16+ levels).
"""

from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from qpamp.circuit_model import derive_all, thermal_noise_psds
from qpamp.config import parse_config_dict
from qpamp.dynamics import (FockSpaceSpec, build_collapse_ops,
                            build_hamiltonian_matrix, diffusion_matrix,
                            evolve_density, evolve_gaussian, expectations,
                            gaussian_moments, hamiltonian_drift,
                            normalize_coefficients, vacuum_density,
                            vacuum_gaussian)

OUT = Path(__file__).resolve().parent / "out"


def main():
    cfg = parse_config_dict({"environment": {"T_em_kelvin": 0.03}})
    t, e = cfg.transistor, cfg.environment
    coeffs = derive_all(t, e)
    psd = thermal_noise_psds(t, e)
    hn = normalize_coefficients(coeffs, e.omega_ref, frame="midpoint")
    k1, k2 = e.kappa1 / e.omega_ref, e.kappa2 / e.omega_ref
    dt = min(0.01 / max(abs(hn.omega_1), abs(hn.omega_2)), 0.05 / max(k1, k2))
    t_grid = np.linspace(0.0, 6.0 / min(k1, k2), 61)

    spec = FockSpaceSpec(10)
    H = build_hamiltonian_matrix(hn, spec)
    collapse = build_collapse_ops(k1, k2, psd.n_bar_1, psd.n_bar_2, spec)
    fock = evolve_density(vacuum_density(spec), H, collapse, t_grid, dt=dt)
    print(f"number-basis route done; peak truncation leakage "
          f"{fock.leakage.max():.1e}")

    gauss = evolve_gaussian(vacuum_gaussian(), hamiltonian_drift(hn, k1, k2),
                            diffusion_matrix(k1, k2, psd.n_bar_1, psd.n_bar_2),
                            t_grid, dt=dt)

    mf = [expectations(s) for s in fock.states]
    mg = [gaussian_moments(s) for s in gauss.states]
    t_ns = t_grid / e.omega_ref * 1e9

    dev = max(abs(a.n2 - b.n2) / max(a.n2, 1e-12) for a, b in zip(mf[1:], mg[1:]))
    print(f"worst relative deviation on n2: {dev:.2e}")

    OUT.mkdir(exist_ok=True)
    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    axes[0].plot(t_ns, [m.n1 for m in mf], "b", label="n1 number basis")
    axes[0].plot(t_ns, [m.n1 for m in mg], "c--", label="n1 Gaussian")
    axes[0].plot(t_ns, [m.n2 for m in mf], "r", label="n2 number basis")
    axes[0].plot(t_ns, [m.n2 for m in mg], "m--", label="n2 Gaussian")
    axes[0].set_xlabel("time (ns)")
    axes[0].set_ylabel("occupation")
    axes[0].legend(fontsize=8)
    axes[1].plot(t_ns, [abs(m.c12) for m in mf], "k", label="|<a1+ a2>| number basis")
    axes[1].plot(t_ns, [abs(m.c12) for m in mg], "y--", label="|<a1+ a2>| Gaussian")
    axes[1].set_xlabel("time (ns)")
    axes[1].legend(fontsize=8)
    fig.suptitle("Two independent integration routes, one generator")
    fig.tight_layout()
    fig.savefig(OUT / "dynamics_cross_check.png", dpi=150)
    print(f"wrote {OUT / 'dynamics_cross_check.png'}")


if __name__ == "__main__":
    main()
