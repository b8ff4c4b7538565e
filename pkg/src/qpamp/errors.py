"""Exception types shared across the qpamp modules.

Validation errors (bad user input) are distinguished from numerical
degeneracies (valid input driving the model into a regime where a result
would be meaningless); the CLI maps the former to exit code 2 and the
latter to exit code 3.
"""


class QpampError(Exception):
    """Base class for all qpamp-specific errors."""


class ValidationError(QpampError):
    """Base class for configuration / input validation failures."""


class SchemaError(ValidationError):
    """Config file violates the schema (unknown key, wrong type, missing value)."""


class UnitError(ValidationError):
    """A physical quantity has a nonsensical value (e.g. negative resistance)."""


class NumericalDegeneracy(QpampError):
    """Base class for valid-input numerical failure modes."""


class DegenerateCoupling(NumericalDegeneracy):
    """Capacitance bookkeeping produced a nonpositive determinant or oscillator
    capacitance; the coupled-oscillator reduction does not exist."""


class SingularAtFrequency(NumericalDegeneracy):
    """The frequency-domain system matrix is numerically singular at one grid
    point (undamped resonance); callers should record a gap and move on."""


class NonHermitian(NumericalDegeneracy):
    """A matrix that must be Hermitian failed its symmetrization check.

    Signals a transcription bug in the Hamiltonian assembly, not bad data.
    """


class TruncationLeakage(NumericalDegeneracy):
    """Population reached the top retained number state; results past this
    point are untrustworthy and the number-state cutoff must be raised."""

    def __init__(self, message, t=None, leakage=None):
        super().__init__(message)
        self.t = t
        self.leakage = leakage


class UnstableDrift(NumericalDegeneracy):
    """The linear drift has an eigenvalue with positive real part
    (parametric instability); no steady state exists."""


class Nonphysical(NumericalDegeneracy):
    """A state (covariance matrix or density matrix) violates a physicality
    bound beyond tolerance."""


class DomainError(NumericalDegeneracy):
    """An entropy-function argument fell below its physical domain,
    signalling an unphysical symplectic eigenvalue upstream."""
