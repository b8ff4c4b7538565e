"""Gain versus transconductance: the parametric-amplification knob.

Sweeps g_m from half to twice its default, re-deriving the full coefficient
set per point, and maps the normalized gain over (g_m, omega).  The peak
gain grows monotonically with g_m as the coupling approaches the
oscillation threshold sqrt(kappa1 kappa2)/2.
"""

from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from qpamp.circuit_model import derive_all
from qpamp.config import default_config_path, parse_config
from qpamp.spectral import gm_gain_surface, make_default_request

OUT = Path(__file__).resolve().parent / "out"


def main():
    cfg = parse_config(default_config_path())
    t, e = cfg.transistor, cfg.environment
    coeffs = derive_all(t, e)
    grid = np.linspace(0.9, 1.1, 1001) * e.omega_ref
    req = make_default_request(coeffs, e, grid)
    gm_grid = np.linspace(0.5, 2.0, 24) * t.g_m
    surface = gm_gain_surface(gm_grid, req, t, e, jobs=4)

    peak = np.nanmax(np.maximum(surface.gain1_raw, surface.gain2_raw), axis=1)
    for gm, pk in zip(gm_grid[::6], peak[::6]):
        print(f"g_m = {gm * 1e3:6.3f} mS   peak raw gain = {pk:9.1f}")

    OUT.mkdir(exist_ok=True)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    total = np.maximum(surface.gain1_norm, surface.gain2_norm)
    mesh = ax.pcolormesh(surface.omega_over_omega0, gm_grid * 1e3, total,
                         shading="nearest", cmap="magma")
    fig.colorbar(mesh, label="normalized gain")
    ax.set_xlabel(r"$\omega/\omega_0$")
    ax.set_ylabel(r"$g_m$ (mA/V)")
    ax.set_title("Normalized gain vs transconductance")
    fig.tight_layout()
    fig.savefig(OUT / "gm_gain_surface.png", dpi=150)
    print(f"wrote {OUT / 'gm_gain_surface.png'}")


if __name__ == "__main__":
    main()
