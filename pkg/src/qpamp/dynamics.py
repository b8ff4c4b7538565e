"""Open-system dynamics of the two coupled oscillators, two independent ways.

Route 1 (number-state route): the Hamiltonian is realized as a matrix on a
truncated two-mode number basis and the Lindblad master equation

    drho/dt = (1/j hbar)[H, rho] + 1/2 sum_n (2 C_n rho C_n+ - rho C_n+ C_n
                                              - C_n+ C_n rho)

is integrated with fixed-step RK4.  Route 2 (Gaussian route): because the
Hamiltonian is quadratic and the dissipators are linear, first and second
moments close on themselves; the mean follows d<v>/dt = M <v> + b and the
covariance follows the Lyapunov flow dV/dt = M V + V M^T + D.  For any
state with negligible truncation leakage the two routes must agree, which
is the module's built-in cross oracle.

Two drift constructions are provided:

* ``hamiltonian_drift`` is the exact moment flow of the master equation
  integrated by route 1; use it whenever the two routes are compared.
* ``drift_matrix`` is the literal frequency-domain drift that pairs with
  the scattering matrix of the spectral module (A(omega) = j omega I - M).
  Its off-diagonal structure keeps only the co-resonant conjugate-mode
  couplings and differs from ``hamiltonian_drift`` in the sign of the
  charge-charge block, so it is *not* interchangeable with route 1.

Unit convention: this module is dimensionless (hbar = 1).  Feed it
coefficients pre-scaled by the reference frequency via
``normalize_coefficients``; time is then measured in units of 1/omega_ref.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .circuit_model import HamiltonianCoefficients
from .errors import (NonHermitian, Nonphysical, TruncationLeakage,
                     UnstableDrift, ValidationError)

__all__ = [
    "FockSpaceSpec",
    "FockOperators",
    "DensityMatrix",
    "GaussianState",
    "MomentSet",
    "FockTrajectory",
    "GaussianTrajectory",
    "build_fock_operators",
    "build_hamiltonian_matrix",
    "build_collapse_ops",
    "evolve_density",
    "expectations",
    "drift_matrix",
    "hamiltonian_drift",
    "diffusion_matrix",
    "evolve_gaussian",
    "steady_state_gaussian",
    "cm_from_moments",
    "gaussian_moments",
    "normalize_coefficients",
    "vacuum_density",
    "vacuum_gaussian",
    "leakage_of",
    "SYMPLECTIC_FORM",
]

LEAKAGE_ABORT = 1e-4
UNSTABLE_TOL = 1e-9

# Quadrature ordering (x1, p1, x2, p2) with x = a + a+, p = -j(a - a+);
# vacuum covariance is the identity in this convention.
SYMPLECTIC_FORM = np.array([[0.0, 1.0, 0.0, 0.0],
                            [-1.0, 0.0, 0.0, 0.0],
                            [0.0, 0.0, 0.0, 1.0],
                            [0.0, 0.0, -1.0, 0.0]])

# Ladder column (a1, a1+, a2, a2+) -> quadrature column (x1, p1, x2, p2).
_T_QUAD = np.array([[1.0, 1.0, 0.0, 0.0],
                    [-1.0j, 1.0j, 0.0, 0.0],
                    [0.0, 0.0, 1.0, 1.0],
                    [0.0, 0.0, -1.0j, 1.0j]])
_T_QUAD_INV = 0.5 * np.array([[1.0, 1.0j, 0.0, 0.0],
                              [1.0, -1.0j, 0.0, 0.0],
                              [0.0, 0.0, 1.0, 1.0j],
                              [0.0, 0.0, 1.0, -1.0j]])


@dataclass(frozen=True)
class FockSpaceSpec:
    """Number-basis truncation: n_trunc levels per mode, dimension n_trunc**2."""

    n_trunc: int

    def __post_init__(self):
        if self.n_trunc < 2:
            raise ValidationError(f"n_trunc must be >= 2, got {self.n_trunc}")

    @property
    def dim(self) -> int:
        return self.n_trunc ** 2


@dataclass(frozen=True)
class FockOperators:
    """Ladder matrices embedded on the two-mode space (mode-1-major ordering)."""

    spec: FockSpaceSpec
    a1: np.ndarray
    a2: np.ndarray
    identity: np.ndarray


@dataclass(frozen=True)
class DensityMatrix:
    """Two-mode density matrix on the truncated number basis (mode-1-major)."""

    entries: np.ndarray
    spec: FockSpaceSpec

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=complex)
        if m.shape != (self.spec.dim, self.spec.dim):
            raise ValidationError(
                f"density matrix must be {self.spec.dim}x{self.spec.dim}, got {m.shape}")
        object.__setattr__(self, "entries", m)

    def validate(self, herm_tol: float = 1e-10, trace_tol: float = 1e-8,
                 eig_tol: float = 1e-8) -> "DensityMatrix":
        m = self.entries
        herm = np.max(np.abs(m - m.conj().T))
        if herm > herm_tol:
            raise Nonphysical(f"density matrix hermiticity residual {herm:.3e}")
        tr = np.trace(m)
        if abs(tr - 1.0) > trace_tol:
            raise Nonphysical(f"density matrix trace {tr!r} deviates from 1")
        lo = np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0]
        if lo < -eig_tol:
            raise Nonphysical(f"density matrix eigenvalue {lo:.3e} below -{eig_tol}")
        return self


@dataclass(frozen=True)
class GaussianState:
    """Gaussian state: quadrature means and covariance, vacuum cm = identity."""

    mean: np.ndarray
    cm: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float).reshape(4)
        cm = np.asarray(self.cm, dtype=float)
        if cm.shape != (4, 4):
            raise ValidationError(f"covariance matrix must be 4x4, got {cm.shape}")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cm", cm)

    def validate(self, tol: float = 1e-8) -> "GaussianState":
        asym = np.max(np.abs(self.cm - self.cm.T))
        if asym > tol * max(1.0, np.max(np.abs(self.cm))):
            raise Nonphysical(f"covariance asymmetry {asym:.3e}")
        herm = self.cm + 1j * SYMPLECTIC_FORM
        lo = np.linalg.eigvalsh(herm)[0]
        if lo < -tol:
            raise Nonphysical(f"uncertainty-bound eigenvalue {lo:.3e} below -{tol}")
        return self


@dataclass(frozen=True)
class MomentSet:
    """First and second moments of the two modes."""

    n1: float
    n2: float
    m12: complex          # <a1 a2>
    c12: complex          # <a1+ a2>
    alpha1: complex       # <a1>
    alpha2: complex       # <a2>
    squeeze1: complex     # <a1 a1>
    squeeze2: complex     # <a2 a2>

    def validate(self, tol: float = 1e-8) -> "MomentSet":
        if self.n1 < -tol or self.n2 < -tol:
            raise Nonphysical(f"negative occupation n1={self.n1!r} n2={self.n2!r}")
        bound = math.sqrt(max(self.n1, 0.0) * max(self.n2, 0.0))
        if abs(self.c12) > bound + tol * (1.0 + bound):
            raise Nonphysical(
                f"|<a1+ a2>| = {abs(self.c12):.6e} violates Cauchy-Schwarz bound {bound:.6e}")
        return self


@dataclass(frozen=True)
class FockTrajectory:
    t: np.ndarray
    states: list
    leakage: np.ndarray


@dataclass(frozen=True)
class GaussianTrajectory:
    t: np.ndarray
    states: list
    unstable: bool


@lru_cache(maxsize=8)
def _fock_operators_cached(n_trunc: int) -> FockOperators:
    a = np.diag(np.sqrt(np.arange(1, n_trunc)), 1)
    eye = np.eye(n_trunc)
    return FockOperators(
        spec=FockSpaceSpec(n_trunc),
        a1=np.kron(a, eye),
        a2=np.kron(eye, a),
        identity=np.eye(n_trunc ** 2),
    )


def build_fock_operators(spec: FockSpaceSpec) -> FockOperators:
    """Annihilation operators a1, a2 on the tensor-product number basis.

    a|n> = sqrt(n)|n-1> per mode; mode 1 varies slowest in the combined
    index (mode-1-major).
    """
    return _fock_operators_cached(spec.n_trunc)


def build_hamiltonian_matrix(h: HamiltonianCoefficients,
                             spec: FockSpaceSpec) -> np.ndarray:
    """Matrix realization of the two-oscillator Hamiltonian (hbar = 1).

    Free terms omega_i (a_i+ a_i + 1/2), the three bilinear interaction
    terms, and the four linear drive terms.  The drain-local charge-flux
    product is non-Hermitian as a bare product (its reordering constant is
    imaginary); it enters symmetrized, which drops that constant and
    nothing else.

    Raises
    ------
    NonHermitian
        If the assembled matrix fails the hermiticity check - a
        transcription bug, never a data error.
    """
    ops = build_fock_operators(spec)
    a1, a2, eye = ops.a1, ops.a2, ops.identity
    a1d, a2d = a1.T, a2.T
    n1 = a1d @ a1
    n2 = a2d @ a2
    a1m = a1 - a1d          # (a1 - a1+)
    a1p = a1 + a1d
    a2m = a2 - a2d
    a2p = a2 + a2d

    H = h.omega_1 * (n1 + 0.5 * eye) + h.omega_2 * (n2 + 0.5 * eye)
    H = H.astype(complex)

    # Charge-charge coupling: prefactor 1/2 * invC_12 / sqrt(Z1 Z2).
    H += 0.5 * h.invC_12 / math.sqrt(h.Z_1 * h.Z_2) * (a1m @ a2m)
    # Charge(1)-flux(2) coupling.
    H += -0.5j * h.g_12 * math.sqrt(h.Z_2 / h.Z_1) * (a1m @ a2p)
    # Drain-local charge-flux term, symmetrized.
    t22 = -0.5j * h.g_22 * (a2m @ a2p)
    H += 0.5 * (t22 + t22.conj().T)
    # Linear drives, expressed through the drive rates.
    H += 1j * h.gamma_q1 * a1m + 1j * h.gamma_q2 * a2m
    H += h.gamma_phi1 * a1p + h.gamma_phi2 * a2p

    scale = max(1.0, np.max(np.abs(H)))
    residual = np.max(np.abs(H - H.conj().T)) / scale
    if residual > 1e-10:
        raise NonHermitian(f"hamiltonian symmetrization residual {residual:.3e}")
    return 0.5 * (H + H.conj().T)


def build_collapse_ops(kappa1: float, kappa2: float, n_bar_1: float,
                       n_bar_2: float, spec: FockSpaceSpec) -> list[np.ndarray]:
    """Thermal dissipators: sqrt(k(nbar+1)) a and sqrt(k nbar) a+ per mode.

    Zero-rate operators are omitted, so kappa = 0 yields an empty list and
    nbar = 0 yields pure decay.
    """
    if kappa1 < 0.0 or kappa2 < 0.0 or n_bar_1 < 0.0 or n_bar_2 < 0.0:
        raise ValidationError("decay rates and occupations must be >= 0")
    ops = build_fock_operators(spec)
    out = []
    for kappa, n_bar, a in ((kappa1, n_bar_1, ops.a1), (kappa2, n_bar_2, ops.a2)):
        if kappa * (n_bar + 1.0) > 0.0:
            out.append(math.sqrt(kappa * (n_bar + 1.0)) * a)
        if kappa * n_bar > 0.0:
            out.append(math.sqrt(kappa * n_bar) * a.T)
    return out


def leakage_of(rho: np.ndarray, spec: FockSpaceSpec) -> float:
    """Largest single-mode population of the top retained number state."""
    n = spec.n_trunc
    pops = np.real(np.diagonal(rho)).reshape(n, n)
    return float(max(pops[n - 1, :].sum(), pops[:, n - 1].sum()))


def vacuum_density(spec: FockSpaceSpec) -> DensityMatrix:
    rho = np.zeros((spec.dim, spec.dim), dtype=complex)
    rho[0, 0] = 1.0
    return DensityMatrix(entries=rho, spec=spec)


def vacuum_gaussian() -> GaussianState:
    return GaussianState(mean=np.zeros(4), cm=np.eye(4))


def _default_step(H: np.ndarray, collapse: list[np.ndarray], span: float) -> float:
    # Resolve the fastest Hamiltonian frequency and the fastest decay.
    d = H.shape[0]
    traceless = H - (np.trace(H) / d) * np.eye(d)
    w = float(np.max(np.abs(np.linalg.eigvalsh(traceless))))
    rate = 0.0
    for c in collapse:
        rate = max(rate, float(np.linalg.norm(c.conj().T @ c, 2)))
    dt = span
    if w > 0.0:
        dt = min(dt, 0.01 / w)
    if rate > 0.0:
        dt = min(dt, 0.05 / rate)
    return dt


def evolve_density(rho0: DensityMatrix, H: np.ndarray,
                   collapse: list[np.ndarray], t_grid: np.ndarray,
                   dt: float | None = None) -> FockTrajectory:
    """Integrate the master equation with fixed-step RK4.

    ``t_grid`` holds the sample times (increasing from 0); each interval is
    subdivided into equal steps no longer than ``dt``.  When ``dt`` is not
    given it is derived from the spectral range of H and the dissipation
    rates.  The trace is required to stay within 1e-8 of 1 and the top
    number-state population below 1e-4; exceeding the latter raises
    TruncationLeakage (raise n_trunc and rerun).
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size < 1:
        raise ValidationError("t_grid must be a nonempty 1-D array")
    if t_grid[0] != 0.0 or np.any(np.diff(t_grid) <= 0.0):
        raise ValidationError("t_grid must increase from 0")
    spec = rho0.spec
    rho0.validate()
    if H.shape != (spec.dim, spec.dim):
        raise ValidationError(
            f"H must be {spec.dim}x{spec.dim} to match the state, got {H.shape}")
    if dt is None:
        span = float(t_grid[-1]) if t_grid[-1] > 0.0 else 1.0
        dt = _default_step(H, collapse, span)
    if dt <= 0.0:
        raise ValidationError(f"dt must be > 0, got {dt!r}")

    # The right-hand side is applied as one sparse matrix on vec(rho):
    #   L = -j (H_eff (x) I  -  I (x) conj(H_eff)) + sum_n C_n (x) conj(C_n),
    #   H_eff = H - (j/2) sum C+ C,
    # (row-major vectorization).  H and the ladder-type collapse operators
    # are banded, so L stays sparse and one RK4 stage is a single mat-vec.
    from scipy.sparse import csr_matrix, identity as sp_identity, kron as sp_kron

    d = spec.dim
    cdc = sum((c.conj().T @ c for c in collapse),
              np.zeros_like(H, dtype=complex))
    h_eff = csr_matrix(H.astype(complex) - 0.5j * cdc)
    eye = sp_identity(d, dtype=complex, format="csr")
    liouville = -1j * (sp_kron(h_eff, eye, format="csr")
                       - sp_kron(eye, h_eff.conj(), format="csr"))
    for c in collapse:
        cs = csr_matrix(c.astype(complex))
        liouville = liouville + sp_kron(cs, cs.conj(), format="csr")

    rho = rho0.entries.copy()
    states = [DensityMatrix(entries=rho.copy(), spec=spec)]
    leaks = [leakage_of(rho, spec)]
    _check_leak(leaks[-1], t_grid[0])

    vec = rho.reshape(-1).copy()
    for k in range(1, t_grid.size):
        span = float(t_grid[k] - t_grid[k - 1])
        n_sub = max(1, math.ceil(span / dt))
        h = span / n_sub
        for _ in range(n_sub):
            k1 = liouville @ vec
            k2 = liouville @ (vec + 0.5 * h * k1)
            k3 = liouville @ (vec + 0.5 * h * k2)
            k4 = liouville @ (vec + h * k3)
            vec = vec + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        rho = vec.reshape(d, d)
        tr = np.trace(rho).real
        if abs(tr - 1.0) > 1e-8:
            raise Nonphysical(
                f"trace drift {tr - 1.0:.3e} at t={t_grid[k]:.6g}; reduce dt")
        leak = leakage_of(rho, spec)
        _check_leak(leak, t_grid[k])
        states.append(DensityMatrix(entries=rho.copy(), spec=spec))
        leaks.append(leak)

    return FockTrajectory(t=t_grid, states=states, leakage=np.array(leaks))


def _check_leak(leak: float, t: float) -> None:
    if leak > LEAKAGE_ABORT:
        raise TruncationLeakage(
            f"top number-state population {leak:.3e} exceeds {LEAKAGE_ABORT:g} "
            f"at t={t:.6g}; raise n_trunc", t=t, leakage=leak)


def _trace_with(rho: np.ndarray, op: np.ndarray) -> complex:
    return complex(np.einsum("ij,ji->", op, rho))


def expectations(rho: DensityMatrix) -> MomentSet:
    """Extract the moment set from a density matrix.

    Occupations must be real to 1e-10 before the imaginary residue is
    discarded.
    """
    ops = build_fock_operators(rho.spec)
    a1, a2 = ops.a1, ops.a2
    m = rho.entries
    n1 = _trace_with(m, a1.T @ a1)
    n2 = _trace_with(m, a2.T @ a2)
    for name, val in (("n1", n1), ("n2", n2)):
        if abs(val.imag) > 1e-10:
            raise Nonphysical(f"{name} has imaginary residue {val.imag:.3e}")
    return MomentSet(
        n1=n1.real, n2=n2.real,
        m12=_trace_with(m, a1 @ a2),
        c12=_trace_with(m, a1.T @ a2),
        alpha1=_trace_with(m, a1),
        alpha2=_trace_with(m, a2),
        squeeze1=_trace_with(m, a1 @ a1),
        squeeze2=_trace_with(m, a2 @ a2),
    )


def drift_matrix(h: HamiltonianCoefficients, kappa1: float, kappa2: float,
                 Omega_1: float, Omega_2: float) -> tuple[np.ndarray, np.ndarray]:
    """Literal frequency-domain drift in the (a1, a1+, a2, a2+) basis.

    Returns (M, b) with d<v>/dt = M <v> + b.  M keeps only the
    conjugate-mode couplings (a1 <-> a2+) plus the drain-local -2 g_q2p2
    self terms; the scattering matrix satisfies A(omega) = j omega I - M
    element-wise.  b holds the constants -gamma_q -/+ j gamma_phi.
    """
    g = h.g_q1q2
    gp = h.g_q1p2
    gpp = h.g_q2p2
    M = np.zeros((4, 4), dtype=complex)
    M[0, 0] = -1j * Omega_1 - 0.5 * kappa1
    M[1, 1] = 1j * Omega_1 - 0.5 * kappa1
    M[2, 2] = -1j * Omega_2 - 0.5 * kappa2
    M[3, 3] = 1j * Omega_2 - 0.5 * kappa2
    M[0, 3] = -1j * g - gp
    M[1, 2] = 1j * g - gp
    M[2, 1] = -1j * g - gp
    M[3, 0] = 1j * g - gp
    M[2, 3] = -2.0 * gpp
    M[3, 2] = -2.0 * gpp
    b = np.array([-h.gamma_q1 - 1j * h.gamma_phi1,
                  -h.gamma_q1 + 1j * h.gamma_phi1,
                  -h.gamma_q2 - 1j * h.gamma_phi2,
                  -h.gamma_q2 + 1j * h.gamma_phi2], dtype=complex)
    return M, b


def hamiltonian_drift(h: HamiltonianCoefficients, kappa1: float,
                      kappa2: float) -> tuple[np.ndarray, np.ndarray]:
    """Exact first-moment drift of the master equation in the ladder basis.

    This is the Heisenberg image of the Hamiltonian realized by
    ``build_hamiltonian_matrix`` plus the -kappa/2 damping of the thermal
    dissipators, so trajectories driven by it are directly comparable with
    the number-basis route.  The oscillator frequencies are taken from the
    coefficient record (shift them beforehand to work in a rotating frame).
    """
    g = h.g_q1q2
    gp = h.g_q1p2
    gpp = h.g_q2p2
    M = np.zeros((4, 4), dtype=complex)
    M[0, 0] = -1j * h.omega_1 - 0.5 * kappa1
    M[1, 1] = 1j * h.omega_1 - 0.5 * kappa1
    M[2, 2] = -1j * h.omega_2 - 0.5 * kappa2
    M[3, 3] = 1j * h.omega_2 - 0.5 * kappa2
    M[0, 2] = -1j * g - gp
    M[0, 3] = 1j * g - gp
    M[1, 2] = -1j * g - gp
    M[1, 3] = 1j * g - gp
    M[2, 0] = -1j * g + gp
    M[2, 1] = 1j * g - gp
    M[3, 0] = -1j * g - gp
    M[3, 1] = 1j * g + gp
    M[2, 3] = -2.0 * gpp
    M[3, 2] = -2.0 * gpp
    b = np.array([-h.gamma_q1 - 1j * h.gamma_phi1,
                  -h.gamma_q1 + 1j * h.gamma_phi1,
                  -h.gamma_q2 - 1j * h.gamma_phi2,
                  -h.gamma_q2 + 1j * h.gamma_phi2], dtype=complex)
    return M, b


def diffusion_matrix(kappa1: float, kappa2: float, n_bar_1: float,
                     n_bar_2: float) -> np.ndarray:
    """Quadrature diffusion of the thermal dissipators: kappa(2 nbar + 1) per mode."""
    d1 = kappa1 * (2.0 * n_bar_1 + 1.0)
    d2 = kappa2 * (2.0 * n_bar_2 + 1.0)
    return np.diag([d1, d1, d2, d2])


def _drift_to_quadrature(drift: tuple[np.ndarray, np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    M, b = drift
    M = np.asarray(M, dtype=complex)
    b = np.asarray(b, dtype=complex).reshape(4)
    Mq = _T_QUAD @ M @ _T_QUAD_INV
    bq = _T_QUAD @ b
    scale = max(1.0, float(np.max(np.abs(Mq))), float(np.max(np.abs(bq))))
    resid = max(float(np.max(np.abs(Mq.imag))), float(np.max(np.abs(bq.imag))))
    if resid > 1e-9 * scale:
        raise ValidationError(
            f"drift lacks conjugate-pairing symmetry (imag residual {resid:.3e}); "
            "rows must be complex-conjugate partners under (a1<->a1+, a2<->a2+)")
    return Mq.real, bq.real


def _is_unstable(Mq: np.ndarray) -> bool:
    return bool(np.max(np.linalg.eigvals(Mq).real) > UNSTABLE_TOL)


def evolve_gaussian(state0: GaussianState, drift: tuple[np.ndarray, np.ndarray],
                    diffusion: np.ndarray, t_grid: np.ndarray,
                    dt: float | None = None) -> GaussianTrajectory:
    """Integrate the Gaussian mean/covariance flow with fixed-step RK4.

    ``drift`` is an (M, b) pair in the ladder basis as produced by
    ``hamiltonian_drift`` or ``drift_matrix``; ``diffusion`` is the
    quadrature matrix from ``diffusion_matrix``.  A drift eigenvalue with
    real part above 1e-9 marks the trajectory unstable (parametric
    instability); integration still proceeds and the flag is returned.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size < 1 or t_grid[0] != 0.0 \
            or np.any(np.diff(t_grid) <= 0.0):
        raise ValidationError("t_grid must be 1-D, increasing from 0")
    state0.validate()
    Mq, bq = _drift_to_quadrature(drift)
    D = np.asarray(diffusion, dtype=float)
    unstable = _is_unstable(Mq)

    if dt is None:
        w = float(np.max(np.abs(np.linalg.eigvals(Mq))))
        span = float(t_grid[-1]) if t_grid[-1] > 0.0 else 1.0
        dt = min(span, 0.01 / w) if w > 0.0 else span

    mean = state0.mean.copy()
    cm = state0.cm.copy()
    states = [GaussianState(mean=mean.copy(), cm=cm.copy())]

    def rhs(m, v):
        return Mq @ m + bq, Mq @ v + v @ Mq.T + D

    for k in range(1, t_grid.size):
        span = float(t_grid[k] - t_grid[k - 1])
        n_sub = max(1, math.ceil(span / dt))
        h = span / n_sub
        for _ in range(n_sub):
            k1m, k1v = rhs(mean, cm)
            k2m, k2v = rhs(mean + 0.5 * h * k1m, cm + 0.5 * h * k1v)
            k3m, k3v = rhs(mean + 0.5 * h * k2m, cm + 0.5 * h * k2v)
            k4m, k4v = rhs(mean + h * k3m, cm + h * k3v)
            mean = mean + (h / 6.0) * (k1m + 2.0 * k2m + 2.0 * k3m + k4m)
            cm = cm + (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        cm = 0.5 * (cm + cm.T)
        states.append(GaussianState(mean=mean.copy(), cm=cm.copy()).validate())

    return GaussianTrajectory(t=t_grid, states=states, unstable=unstable)


def steady_state_gaussian(drift: tuple[np.ndarray, np.ndarray],
                          diffusion: np.ndarray) -> GaussianState:
    """Long-time Gaussian state from the algebraic Lyapunov equation.

    Solves M V + V M^T + D = 0 by row-major vectorization and a dense
    linear solve, and the mean from M <v> + b = 0.

    Raises
    ------
    UnstableDrift
        If any drift eigenvalue has real part above 1e-9 (no steady state).
    """
    Mq, bq = _drift_to_quadrature(drift)
    D = np.asarray(diffusion, dtype=float)
    if _is_unstable(Mq):
        raise UnstableDrift(
            f"drift eigenvalue real parts {np.sort(np.linalg.eigvals(Mq).real)} "
            "include positive values; no steady state exists")
    eye = np.eye(4)
    lhs = np.kron(Mq, eye) + np.kron(eye, Mq)
    v = np.linalg.solve(lhs, -D.reshape(-1))
    V = v.reshape(4, 4)
    resid = np.linalg.norm(Mq @ V + V @ Mq.T + D)
    if resid > 1e-10 * max(np.linalg.norm(D), 1e-300):
        raise Nonphysical(f"Lyapunov residual {resid:.3e} too large")
    mean = np.linalg.solve(Mq, -bq)
    return GaussianState(mean=mean, cm=0.5 * (V + V.T)).validate()


def cm_from_moments(m: MomentSet) -> GaussianState:
    """Gaussian state whose quadrature statistics reproduce a moment set.

    Means are subtracted so the covariance describes fluctuations only;
    vacuum maps to the identity.

    Raises
    ------
    Nonphysical
        If the resulting covariance violates the uncertainty bound beyond
        1e-6.
    """
    a1, a2 = m.alpha1, m.alpha2
    # Centered second moments.
    n1c = m.n1 - abs(a1) ** 2
    n2c = m.n2 - abs(a2) ** 2
    s1c = m.squeeze1 - a1 * a1
    s2c = m.squeeze2 - a2 * a2
    m12c = m.m12 - a1 * a2
    c12c = m.c12 - a1.conjugate() * a2

    cm = np.empty((4, 4))
    cm[0, 0] = 1.0 + 2.0 * n1c + 2.0 * s1c.real
    cm[1, 1] = 1.0 + 2.0 * n1c - 2.0 * s1c.real
    cm[0, 1] = cm[1, 0] = 2.0 * s1c.imag
    cm[2, 2] = 1.0 + 2.0 * n2c + 2.0 * s2c.real
    cm[3, 3] = 1.0 + 2.0 * n2c - 2.0 * s2c.real
    cm[2, 3] = cm[3, 2] = 2.0 * s2c.imag
    cm[0, 2] = cm[2, 0] = 2.0 * (m12c.real + c12c.real)
    cm[0, 3] = cm[3, 0] = 2.0 * (m12c.imag + c12c.imag)
    cm[1, 2] = cm[2, 1] = 2.0 * (m12c.imag - c12c.imag)
    cm[1, 3] = cm[3, 1] = 2.0 * (c12c.real - m12c.real)

    mean = np.array([2.0 * a1.real, 2.0 * a1.imag, 2.0 * a2.real, 2.0 * a2.imag])
    state = GaussianState(mean=mean, cm=cm)
    try:
        state.validate(tol=1e-6)
    except Nonphysical as exc:
        raise Nonphysical(f"moment set maps to an unphysical covariance: {exc}") from exc
    return state


def gaussian_moments(state: GaussianState) -> MomentSet:
    """Moment set of a Gaussian state (inverse of ``cm_from_moments``)."""
    x1, p1, x2, p2 = state.mean
    a1 = 0.5 * (x1 + 1j * p1)
    a2 = 0.5 * (x2 + 1j * p2)
    V = state.cm
    n1c = 0.25 * (V[0, 0] + V[1, 1] - 2.0)
    n2c = 0.25 * (V[2, 2] + V[3, 3] - 2.0)
    s1c = 0.25 * (V[0, 0] - V[1, 1]) + 0.5j * V[0, 1]
    s2c = 0.25 * (V[2, 2] - V[3, 3]) + 0.5j * V[2, 3]
    c12c = 0.25 * (V[0, 2] + V[1, 3]) + 0.25j * (V[0, 3] - V[1, 2])
    m12c = 0.25 * (V[0, 2] - V[1, 3]) + 0.25j * (V[0, 3] + V[1, 2])
    return MomentSet(
        n1=n1c + abs(a1) ** 2,
        n2=n2c + abs(a2) ** 2,
        m12=m12c + a1 * a2,
        c12=c12c + a1.conjugate() * a2,
        alpha1=a1,
        alpha2=a2,
        squeeze1=s1c + a1 * a1,
        squeeze2=s2c + a2 * a2,
    )


def normalize_coefficients(h: HamiltonianCoefficients, omega_ref: float,
                           frame: str = "midpoint") -> HamiltonianCoefficients:
    """Dimensionless copy of the coefficients for the dynamics layer.

    Every rate-like field is divided by omega_ref (time then runs in units
    of 1/omega_ref) and the oscillator frequencies are shifted into the
    requested frame: "midpoint" subtracts (omega_1+omega_2)/2 so the two
    detunings are opposite, "reference" subtracts omega_ref, "lab" keeps
    the full frequencies.  Impedances and capacitances are left untouched;
    invC_12, g_12 and g_22 are scaled so that the interaction-rate
    relations continue to hold on the copy.
    """
    if frame == "midpoint":
        shift = 0.5 * (h.omega_1 + h.omega_2)
    elif frame == "reference":
        shift = omega_ref
    elif frame == "lab":
        shift = 0.0
    else:
        raise ValidationError(f"unknown frame {frame!r}")
    s = 1.0 / omega_ref
    return replace(
        h,
        omega_1=(h.omega_1 - shift) * s,
        omega_2=(h.omega_2 - shift) * s,
        invC_12=h.invC_12 * s,
        g_12=h.g_12 * s,
        g_22=h.g_22 * s,
        g_q1q2=h.g_q1q2 * s,
        g_q1p2=h.g_q1p2 * s,
        g_q2p2=h.g_q2p2 * s,
        gamma_q1=h.gamma_q1 * s,
        gamma_q2=h.gamma_q2 * s,
        gamma_phi1=h.gamma_phi1 * s,
        gamma_phi2=h.gamma_phi2 * s,
    )
