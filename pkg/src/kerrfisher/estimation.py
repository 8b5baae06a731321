"""Symmetric logarithmic derivatives, the QFIM, and Cramer-Rao bounds.

The SLD equation 2 d_rho = rho L + L rho is solved on the eigenbasis of rho:
L_ij = 2 <i|d_rho|j> / (p_i + p_j) wherever the eigenvalue sum clears a rank
cutoff, zero elsewhere (Moore-Penrose convention on the support). Sectors
below the cutoff carry integrator noise through near-zero denominators and
must stay excluded; the returned residual quantifies what the exclusion
left unmatched.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, NumericalError, RankDeficiencyWarning, SingularQfimError

EPS_RANK_FACTOR = 1e-12   # on eigenvalue sums p_i + p_j, relative to Tr rho
EPS_SLD = 1e-8            # residual above this warns of rank deficiency
EPS_NUM = 1e-300          # floor for relative normalizations


@dataclass(frozen=True)
class SldPair:
    l_chi: np.ndarray
    l_gamma: np.ndarray
    residual_chi: float
    residual_gamma: float


@dataclass(frozen=True)
class QfimResult:
    time: float
    f_chichi: float
    f_gammagamma: float
    f_chigamma: float
    u_chigamma: float
    support_rank: int

    def matrix(self):
        return np.array([[self.f_chichi, self.f_chigamma],
                         [self.f_chigamma, self.f_gammagamma]])


@dataclass(frozen=True)
class CrbReport:
    m_repetitions: int
    weight: np.ndarray
    scalar_bound: float
    var_bound_chi: float
    var_bound_gamma: float


def solve_sld(rho, drho, rank_tol_factor=EPS_RANK_FACTOR):
    """Solve 2 d_rho = rho L + L rho for Hermitian L.

    Returns (L, residual) with residual = |rho L + L rho - 2 d_rho|_F
    normalized by |d_rho|_F. Negative eigenvalues of rho (integration noise)
    are clamped to zero before the solve. Residual above EPS_SLD emits a
    RankDeficiencyWarning rather than failing: on nearly pure states part of
    d_rho can live in sectors no bounded L reaches.
    """
    rho = np.asarray(rho, dtype=complex)
    drho = np.asarray(drho, dtype=complex)
    if rho.shape != drho.shape:
        raise DimensionMismatchError(
            f"shape mismatch {rho.shape} vs {drho.shape}")
    w, v = np.linalg.eigh(rho)
    w = np.clip(w, 0.0, None)
    dr = v.conj().T @ drho @ v
    denom = w[:, None] + w[None, :]
    cutoff = rank_tol_factor * np.sum(w)
    mask = denom > cutoff
    lbar = np.where(mask, 2.0 * dr / np.where(mask, denom, 1.0), 0.0)
    L = v @ lbar @ v.conj().T
    L = 0.5 * (L + L.conj().T)
    norm_d = np.linalg.norm(drho)
    residual = float(np.linalg.norm(rho @ L + L @ rho - 2.0 * drho)
                     / max(norm_d, EPS_NUM))
    if residual > EPS_SLD:
        warnings.warn(
            f"SLD residual {residual:.3e} above {EPS_SLD:.0e}; "
            "state is effectively rank-deficient for this derivative",
            RankDeficiencyWarning, stacklevel=2)
    return L, residual


def support_rank(rho, rank_tol_factor=EPS_RANK_FACTOR):
    """Number of eigenvalues of rho above the rank cutoff."""
    w = np.clip(np.linalg.eigvalsh(np.asarray(rho, dtype=complex)), 0.0, None)
    return int(np.sum(w > rank_tol_factor * np.sum(w)))


def sld_pair(state, rank_tol_factor=EPS_RANK_FACTOR):
    """Both SLDs of an ExtendedState as an SldPair."""
    l_chi, res_chi = solve_sld(state.rho, state.drho_chi, rank_tol_factor)
    l_gamma, res_gamma = solve_sld(state.rho, state.drho_gamma, rank_tol_factor)
    return SldPair(l_chi=l_chi, l_gamma=l_gamma,
                   residual_chi=res_chi, residual_gamma=res_gamma)


def qfim(rho, sld, time=0.0):
    """QFIM entries f_jk = (1/2) Tr[rho {L_j, L_k}] from a solved SldPair.

    The off-diagonal is symmetrized explicitly and its imaginary residue
    checked as a cheap self-test of the hermiticity plumbing.
    """
    rho = np.asarray(rho, dtype=complex)
    lc, lg = sld.l_chi, sld.l_gamma
    f_cc = float(np.trace(rho @ lc @ lc).real)
    f_gg = float(np.trace(rho @ lg @ lg).real)
    z = 0.5 * np.trace(rho @ (lc @ lg + lg @ lc))
    scale = max(abs(z), f_cc, f_gg, 1.0)
    if abs(z.imag) > 1e-10 * scale:
        raise NumericalError(
            f"off-diagonal QFIM entry has imaginary residue {z.imag:.3e}")
    return QfimResult(time=float(time),
                      f_chichi=f_cc, f_gammagamma=f_gg,
                      f_chigamma=float(z.real),
                      u_chigamma=uhlmann(rho, sld),
                      support_rank=support_rank(rho))


def uhlmann(rho, sld):
    """Uhlmann curvature element -(i/2) Tr[rho [L_chi, L_gamma]].

    Zero means the two optimal measurements are compatible and the
    matrix Cramer-Rao bound is attainable jointly.
    """
    rho = np.asarray(rho, dtype=complex)
    lc, lg = sld.l_chi, sld.l_gamma
    val = -0.5j * np.trace(rho @ (lc @ lg - lg @ lc))
    return float(val.real)


def crb_report(q, m, weight=None):
    """Scalar and single-parameter Cramer-Rao bounds.

    scalar_bound = Tr[W F^{-1}] (weighted joint bound per repetition);
    var_bound_lambda = 1/(M f_lambdalambda) for M repetitions.
    Raises SingularQfimError when the 2x2 QFIM is not safely invertible
    (zero determinant at t=0, or near-perfect parameter correlation).
    """
    if m < 1:
        raise ValueError("m_repetitions must be >= 1")
    if weight is None:
        weight = np.eye(2)
    weight = np.asarray(weight, dtype=float)
    if weight.shape != (2, 2):
        raise DimensionMismatchError("weight must be 2x2")
    if abs(weight[0, 1] - weight[1, 0]) > 1e-12 * max(np.abs(weight).max(), 1.0):
        raise ValueError("weight must be symmetric")
    if np.linalg.eigvalsh(weight).min() < -1e-12 * max(np.abs(weight).max(), 1.0):
        raise ValueError("weight must be positive semidefinite")

    a, b, d = q.f_chichi, q.f_chigamma, q.f_gammagamma
    det = a * d - b * b
    if det <= 0 or det <= 1e-14 * a * d:
        raise SingularQfimError(det)
    inv = np.array([[d, -b], [-b, a]]) / det
    scalar = float(np.trace(weight @ inv))
    return CrbReport(m_repetitions=int(m), weight=weight,
                     scalar_bound=scalar,
                     var_bound_chi=1.0 / (m * a),
                     var_bound_gamma=1.0 / (m * d))
