"""Truncated Fock-space operators, states, and the driven Kerr Hamiltonian.

Everything is a plain complex ndarray of shape (dim, dim); dim is the
truncation N. Operators act on the span of |0>..|N-1> and algebraic
identities that involve the cut boundary (e.g. [a, a^dag] = 1) hold only on
the first N-1 levels.
"""

from dataclasses import dataclass
from math import pi

import numpy as np

from .errors import DimensionMismatchError, InvalidDimensionError

# Validation tolerances, an order of magnitude looser than accumulated
# integrator error at default settings.
EPS_HERM = 1e-10
EPS_TR = 1e-8
EPS_PSD = 1e-8


@dataclass(frozen=True)
class ModelParams:
    """Physical rates in units where the detuning sets the timescale.

    delta: pump-cavity detuning (rad/time)
    chi: Kerr anharmonicity (rad/time)
    gamma: one-photon loss rate (rad/time), >= 0
    drive_f: coherent drive strength (rad/time), >= 0
    theta: local-oscillator phase (rad), in [0, 2*pi)
    """

    delta: float = 1.0
    chi: float = 0.0
    gamma: float = 0.0
    drive_f: float = 0.0
    theta: float = 0.0

    def __post_init__(self):
        for name in ("delta", "chi", "gamma", "drive_f", "theta"):
            v = float(getattr(self, name))
            if not np.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v!r}")
            object.__setattr__(self, name, v)
        if self.gamma < 0:
            raise ValueError("gamma must be >= 0")
        if self.drive_f < 0:
            raise ValueError("drive_f must be >= 0")
        if not (0.0 <= self.theta < 2 * pi):
            raise ValueError("theta must lie in [0, 2*pi)")


def _check_dim(dim):
    if int(dim) != dim or dim < 2:
        raise InvalidDimensionError(f"dim must be an integer >= 2, got {dim!r}")
    return int(dim)


def annihilation(dim):
    """Ladder operator a with entries a[n-1, n] = sqrt(n)."""
    dim = _check_dim(dim)
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)


def number_diag(dim):
    """Diagonal of the number operator as a float vector 0..dim-1."""
    dim = _check_dim(dim)
    return np.arange(dim, dtype=float)


def build_hamiltonian(p, dim):
    """H = -delta a^dag a + (chi/2) a^dag a^dag a a - i F (a - a^dag).

    The Kerr term is diagonal, a^dag a^dag a a = n(n-1); the drive couples
    neighboring levels. Hermitian by construction.
    """
    dim = _check_dim(dim)
    n = number_diag(dim)
    a = annihilation(dim)
    H = np.diag(-p.delta * n + 0.5 * p.chi * n * (n - 1.0)).astype(complex)
    H += -1j * p.drive_f * (a - a.conj().T)
    return H


def vacuum_state(dim):
    """Density matrix of |0><0|."""
    dim = _check_dim(dim)
    rho = np.zeros((dim, dim), dtype=complex)
    rho[0, 0] = 1.0
    return rho


def coherent_state(alpha, dim):
    """Density matrix of the displaced vacuum D(alpha)|0>.

    Built from the analytic Fock amplitudes alpha^n/sqrt(n!); the truncated
    norm defect is the caller's concern (keep |alpha|^2 well below dim).
    """
    dim = _check_dim(dim)
    alpha = complex(alpha)
    if alpha == 0:
        return vacuum_state(dim)
    n = np.arange(dim)
    # log n! accumulated to keep sqrt(n!) out of overflow territory
    log_fact = np.cumsum(np.log(np.maximum(n, 1)))
    amps = np.exp(-0.5 * abs(alpha) ** 2 + n * np.log(alpha) - 0.5 * log_fact)
    return np.outer(amps, amps.conj())


def _psd_sqrt(m):
    # Hermitian square root with eigenvalue clamping; rho may carry tiny
    # negative eigenvalues from integration noise.
    w, v = np.linalg.eigh(m)
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def fidelity(rho, sigma):
    """Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2."""
    rho = np.asarray(rho)
    sigma = np.asarray(sigma)
    if rho.shape != sigma.shape:
        raise DimensionMismatchError(
            f"shape mismatch {rho.shape} vs {sigma.shape}")
    sr = _psd_sqrt(rho)
    inner = sr @ sigma @ sr
    w = np.clip(np.linalg.eigvalsh(0.5 * (inner + inner.conj().T)), 0.0, None)
    return float(np.sum(np.sqrt(w)) ** 2)


def trace_distance(rho, sigma):
    """(1/2) Tr |rho - sigma|."""
    rho = np.asarray(rho)
    sigma = np.asarray(sigma)
    if rho.shape != sigma.shape:
        raise DimensionMismatchError(
            f"shape mismatch {rho.shape} vs {sigma.shape}")
    diff = rho - sigma
    w = np.linalg.eigvalsh(0.5 * (diff + diff.conj().T))
    return float(0.5 * np.sum(np.abs(w)))


def check_density_matrix(rho, eps_herm=EPS_HERM, eps_tr=EPS_TR, eps_psd=EPS_PSD):
    """Raise ValueError unless rho is Hermitian, unit-trace, and PSD within tolerance."""
    rho = np.asarray(rho)
    scale = max(np.abs(rho).max(), 1e-300)
    herm = np.abs(rho - rho.conj().T).max() / scale
    if herm > eps_herm:
        raise ValueError(f"not Hermitian: relative asymmetry {herm:.3e}")
    tr = abs(np.trace(rho) - 1.0)
    if tr > eps_tr:
        raise ValueError(f"trace deviates from 1 by {tr:.3e}")
    wmin = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min()
    if wmin < -eps_psd:
        raise ValueError(f"negative eigenvalue {wmin:.3e}")
    return rho
