"""qpamp: quantum parametric amplifier built from two LC oscillators coupled
by an nMOS transistor.

The package derives the circuit-to-Hamiltonian coefficient set, computes
frequency-domain gain spectra through the input-output relation, integrates
the open-system dynamics on a truncated number basis and as a Gaussian
moment flow, and reports non-classical correlation measures.
"""

from . import circuit_model, correlations, dynamics, errors, spectral

__version__ = "0.1.0"

__all__ = ["circuit_model", "spectral", "dynamics", "correlations", "errors",
           "__version__"]
