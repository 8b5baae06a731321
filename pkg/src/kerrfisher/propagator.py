"""Co-propagation of the state and its parameter derivatives.

Integrates d/dt [rho, d_chi rho, d_gamma rho] under the block-triangular
generator: the physical Lindblad map acts on each block, and the parameter
derivatives of the map, applied to rho, feed the two derivative blocks as
source terms. The N^2 x N^2 superoperator is never materialized; each
right-hand side costs a few dense N x N matrix products on the stacked
triple.
"""

from dataclasses import dataclass

import numpy as np
from scipy.integrate import RK45

from . import fock
from .errors import DimensionMismatchError, StepFailureError, TruncationOverflowError

DEFAULT_REL_TOL = 1e-9
DEFAULT_ABS_TOL = 1e-11
DEFAULT_TAIL_THRESHOLD = 1e-8


@dataclass(frozen=True)
class PropagationConfig:
    dim: int
    t_grid: np.ndarray
    rel_tol: float = DEFAULT_REL_TOL
    abs_tol: float = DEFAULT_ABS_TOL
    tail_threshold: float = DEFAULT_TAIL_THRESHOLD

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError("dim must be >= 2")
        grid = np.asarray(self.t_grid, dtype=float)
        if grid.ndim != 1 or grid.size < 1:
            raise ValueError("t_grid must be a 1-d array of times")
        if grid[0] != 0.0:
            raise ValueError("t_grid must start at 0")
        if grid.size > 1 and not np.all(np.diff(grid) > 0):
            raise ValueError("t_grid must be strictly increasing")
        object.__setattr__(self, "t_grid", grid)
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if not self.tail_threshold > 0:
            raise ValueError("tail_threshold must be positive")


@dataclass(frozen=True)
class ExtendedState:
    time: float
    rho: np.ndarray
    drho_chi: np.ndarray
    drho_gamma: np.ndarray


def default_dim(p):
    """Truncation heuristic: 30 suffices for drives up to 0.2*delta, 60 beyond.

    Steady photon number at the strongest studied drive stays far below
    either value; the tail monitor guards the choice at run time.
    """
    return 30 if p.drive_f <= 0.2 * abs(p.delta) else 60


def liouvillian_apply(p, rho):
    """Lindblad map -i[H, rho] + (gamma/2) D[a] rho in plain readable form.

    The integrator uses an algebraically identical but batched formulation;
    tests pin the two against each other.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DimensionMismatchError(f"rho must be square, got shape {rho.shape}")
    dim = rho.shape[0]
    H = fock.build_hamiltonian(p, dim)
    a = fock.annihilation(dim)
    ad = a.conj().T
    n = ad @ a
    out = -1j * (H @ rho - rho @ H)
    out += (p.gamma / 2.0) * (a @ rho @ ad - 0.5 * (n @ rho + rho @ n))
    return out


def dchi_liouvillian_apply(rho):
    """Derivative of the map in the Kerr coupling: -i[(1/2) n(n-1), rho]."""
    rho = np.asarray(rho, dtype=complex)
    d = 0.5 * fock.number_diag(rho.shape[0]) * (fock.number_diag(rho.shape[0]) - 1.0)
    return -1j * (d[:, None] * rho - rho * d[None, :])


def dgamma_liouvillian_apply(rho):
    """Derivative of the map in the loss rate: (1/2) D[a] rho."""
    rho = np.asarray(rho, dtype=complex)
    dim = rho.shape[0]
    s = np.sqrt(np.arange(1.0, dim))
    n = fock.number_diag(dim)
    ara = np.zeros_like(rho)
    ara[:-1, :-1] = rho[1:, 1:] * np.outer(s, s)
    return 0.5 * (ara - 0.5 * (n[:, None] * rho + rho * n[None, :]))


class _Generator:
    """Batched right-hand side for the stacked (3, N, N) system.

    Uses the split L0 X = G X + X G^dag + (gamma/2) a X a^dag with
    G = -iH - (gamma/4) n, valid for Hermitian and non-Hermitian blocks
    alike, so one pair of stacked matmuls covers all three blocks.
    """

    def __init__(self, p, dim):
        self.dim = dim
        self.gamma = p.gamma
        n = fock.number_diag(dim)
        H = fock.build_hamiltonian(p, dim)
        self.G = -1j * H - (p.gamma / 4.0) * np.diag(n).astype(complex)
        self.Gd = self.G.conj().T
        s = np.sqrt(np.arange(1.0, dim))
        self.ss = np.outer(s, s)
        d = 0.5 * n * (n - 1.0)
        self.dchi_fac = -1j * np.subtract.outer(d, d)
        self.nsum_half = 0.5 * np.add.outer(n, n)

    def rhs(self, t, y):
        N = self.dim
        R = y.reshape(3, N, N)
        out = np.matmul(self.G, R)
        out += np.matmul(R, self.Gd)
        ara = np.zeros_like(R)
        ara[:, :-1, :-1] = R[:, 1:, 1:] * self.ss
        out += (self.gamma / 2.0) * ara
        rho = R[0]
        out[1] += self.dchi_fac * rho
        out[2] += 0.5 * (ara[0] - self.nsum_half * rho)
        return out.ravel()


def propagate_extended(p, cfg):
    """Integrate from the vacuum with zero derivative blocks at t=0.

    Returns one ExtendedState per t_grid entry, re-symmetrized at output
    times only (per-step the integrator sees the raw complex flux).
    Raises TruncationOverflowError when the top two Fock populations exceed
    cfg.tail_threshold, StepFailureError if the controller gives up.
    """
    N = cfg.dim
    gen = _Generator(p, N)
    y0 = np.zeros(3 * N * N, dtype=complex)
    y0[0] = 1.0  # vacuum occupies the (0,0) entry of block 0

    grid = cfg.t_grid
    out = []
    idx = 0
    if grid[0] == 0.0:
        out.append(y0.copy())
        idx = 1
    if idx < grid.size:
        solver = RK45(gen.rhs, 0.0, y0, grid[-1],
                      rtol=cfg.rel_tol, atol=cfg.abs_tol)
        while idx < grid.size:
            solver.step()
            if solver.status == "failed":
                raise StepFailureError(
                    f"adaptive step underflow at t={solver.t:.6g}")
            diag_top = solver.y.reshape(3, N, N)[0].diagonal()[-2:].real
            tail = float(diag_top.sum())
            if tail > cfg.tail_threshold:
                raise TruncationOverflowError(solver.t, tail, cfg.tail_threshold)
            dense = None
            while idx < grid.size and grid[idx] <= solver.t:
                if dense is None:
                    dense = solver.dense_output()
                out.append(dense(grid[idx]))
                idx += 1

    states = []
    for t, y in zip(grid, out):
        R = y.reshape(3, N, N)
        states.append(ExtendedState(
            time=float(t),
            rho=0.5 * (R[0] + R[0].conj().T),
            drho_chi=0.5 * (R[1] + R[1].conj().T),
            drho_gamma=0.5 * (R[2] + R[2].conj().T),
        ))
    return states


def tail_population(rho):
    """Population of the top two Fock levels, the truncation-adequacy gauge."""
    return float(np.real(rho[-1, -1] + rho[-2, -2]))
