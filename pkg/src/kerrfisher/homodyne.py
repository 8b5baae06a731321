"""Quadrature marginals and the classical Fisher information of homodyning.

Conventions: the measured quadrature at theta=0 is (a + a^dag)/sqrt(2), so
the vacuum marginal is a Gaussian of variance 1/2 and a coherent state has
mean sqrt(2) Re alpha. The position wavefunctions <n|x> are the standard
Hermite functions generated by the weighted three-term recurrence, which is
overflow-free at any dim of interest here.
"""

from dataclasses import dataclass
from math import pi, sqrt

import numpy as np

from .errors import GridCoverageError, InvalidDimensionError

EPS_P = 1e-12  # density floor under the (dp)^2 / p integrand


@dataclass(frozen=True)
class QuadratureGrid:
    points: np.ndarray
    spacing: float
    x_max: float

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        object.__setattr__(self, "points", pts)
        diffs = np.diff(pts)
        if pts.size < 3 or not np.allclose(diffs, diffs[0], rtol=1e-12, atol=0):
            raise ValueError("grid must be uniform with at least 3 points")
        if abs(pts[0] + pts[-1]) > 1e-9 * self.x_max:
            raise ValueError("grid must be symmetric about 0")


def default_grid(dim, n_points=2001, margin=5.0):
    """Symmetric uniform grid wide enough for the truncated oscillator.

    Half-width sqrt(2*dim+1) + margin: classical turning point of the top
    retained level plus Gaussian tail room.
    """
    x_max = sqrt(2 * dim + 1) + margin
    pts = np.linspace(-x_max, x_max, n_points)
    return QuadratureGrid(points=pts, spacing=float(pts[1] - pts[0]), x_max=x_max)


def coverage_bound(dim):
    """Minimum admissible half-width for a given truncation."""
    return sqrt(2 * dim + 1) + 4.0


def quadrature_wavefunctions(dim, grid):
    """Table psi[n, k] = <n|x_k> of Hermite functions on the grid."""
    if dim < 2:
        raise InvalidDimensionError(f"dim must be >= 2, got {dim!r}")
    if grid.x_max < coverage_bound(dim):
        raise GridCoverageError(
            f"grid half-width {grid.x_max:.3f} below required "
            f"{coverage_bound(dim):.3f} for dim={dim}")
    x = grid.points
    psi = np.zeros((dim, x.size))
    psi[0] = pi ** -0.25 * np.exp(-0.5 * x * x)
    psi[1] = sqrt(2.0) * x * psi[0]
    for n in range(1, dim - 1):
        psi[n + 1] = sqrt(2.0 / (n + 1)) * x * psi[n] \
            - sqrt(n / (n + 1.0)) * psi[n - 1]
    return psi


def rotate_frame(rho, theta):
    """Conjugate by the phase operator: e^{-i theta n} rho e^{i theta n}.

    Measuring the theta quadrature (a e^{-i theta} + a^dag e^{i theta})
    / sqrt(2) on rho equals measuring the theta=0 quadrature on the rotated
    state: a coherent state alpha acquires mean sqrt(2) Re(alpha e^{-i
    theta}). Trace and spectrum are untouched.
    """
    rho = np.asarray(rho, dtype=complex)
    if theta == 0.0:
        return rho
    phases = np.exp(-1j * theta * np.arange(rho.shape[0]))
    return phases[:, None] * rho * phases.conj()[None, :]


def _marginal(herm, psi):
    # Hermitian contraction: the imaginary (antisymmetric) part cancels in
    # sum_mn psi_m psi_n X_nm, so the real part carries everything.
    return np.einsum("mk,mn,nk->k", psi, herm.real, psi, optimize=True)


@dataclass(frozen=True)
class HomodyneDistribution:
    grid: QuadratureGrid
    p: np.ndarray
    dp_chi: np.ndarray
    dp_gamma: np.ndarray

    def excluded_mass(self, eps_p=EPS_P):
        """Probability mass on points masked out of the FI integrand."""
        masked = np.where(self.p > eps_p, 0.0, np.clip(self.p, 0.0, None))
        return float(np.trapezoid(masked, self.grid.points))


def homodyne_distribution(state, theta, grid, psi=None):
    """Outcome density p(x) and its exact parameter derivatives.

    Derivative densities come from the co-propagated derivative blocks, not
    from finite differences. Normalization beyond 1e-6 off, or derivative
    integrals beyond 1e-6, indicate an inadequate grid or truncation.
    """
    dim = state.rho.shape[0]
    if psi is None:
        psi = quadrature_wavefunctions(dim, grid)
    p = _marginal(rotate_frame(state.rho, theta), psi)
    dp_chi = _marginal(rotate_frame(state.drho_chi, theta), psi)
    dp_gamma = _marginal(rotate_frame(state.drho_gamma, theta), psi)

    x = grid.points
    norm = np.trapezoid(p, x)
    if abs(norm - 1.0) > 1e-6:
        raise GridCoverageError(
            f"marginal normalization off by {norm - 1.0:.3e}; "
            "grid or truncation inadequate")
    for tag, dp in (("chi", dp_chi), ("gamma", dp_gamma)):
        leak = np.trapezoid(dp, x)
        if abs(leak) > 1e-6:
            raise GridCoverageError(
                f"derivative density for {tag} integrates to {leak:.3e}")
    if p.min() < -1e-9:
        raise GridCoverageError(f"marginal density negative: {p.min():.3e}")
    return HomodyneDistribution(grid=grid, p=p, dp_chi=dp_chi, dp_gamma=dp_gamma)


def classical_fi(dist, which, eps_p=EPS_P):
    """Fisher information of the outcome density for one parameter.

    Trapezoid quadrature of (dp)^2 / p over points with p > eps_p; the far
    tails where both vanish are excluded (see excluded_mass).
    """
    if which == "chi":
        dp = dist.dp_chi
    elif which == "gamma":
        dp = dist.dp_gamma
    else:
        raise ValueError(f"unknown parameter tag {which!r}")
    p = dist.p
    mask = p > eps_p
    integrand = np.where(mask, dp * dp / np.where(mask, p, 1.0), 0.0)
    return float(np.trapezoid(integrand, dist.grid.points))
