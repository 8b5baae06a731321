"""Independent reference values for cross-checking the main pipeline.

Two families: closed-form linear-cavity (chi=0) results, where the state
stays coherent and everything is analytic, and fidelity-based
finite-difference estimates of the QFI that bypass the SLD machinery
entirely. Both are deliberately implemented from formulas, not by reusing
pipeline code paths.
"""

import numpy as np

from . import fock
from .propagator import PropagationConfig, propagate_extended


def linear_alpha(delta, gamma, drive_f, t):
    """Coherent amplitude of the undriven-start linear cavity.

    The mean-field equation for the chi=0 model with loss entering as
    (gamma/2) D[a] is d<a>/dt = (i delta - gamma/4) <a> + F, giving
    alpha(t) = alpha_ss (1 - e^{s t}) with s = i delta - gamma/4.
    """
    s = 1j * delta - 0.25 * gamma
    alpha_ss = -drive_f / s
    t = np.asarray(t, dtype=float)
    return alpha_ss * (1.0 - np.exp(s * t))


def linear_dalpha_dgamma(delta, gamma, drive_f, t):
    """d alpha / d gamma along the same trajectory (s depends on gamma)."""
    s = 1j * delta - 0.25 * gamma
    t = np.asarray(t, dtype=float)
    est = np.exp(s * t)
    return -0.25 * drive_f * ((1.0 - est) / s ** 2 + t * est / s)


def linear_qfi_gamma(delta, gamma, drive_f, t):
    """QFI of the loss rate for the coherent family: 4 |d_gamma alpha|^2."""
    return 4.0 * np.abs(linear_dalpha_dgamma(delta, gamma, drive_f, t)) ** 2


def linear_cfi_gamma_theta0(delta, gamma, drive_f, t):
    """Homodyne Fisher information at theta=0 for the coherent family.

    The marginal is a Gaussian of fixed variance 1/2 and mean
    sqrt(2) Re alpha, so the Fisher information is 4 (d_gamma Re alpha)^2.
    """
    return 4.0 * np.real(linear_dalpha_dgamma(delta, gamma, drive_f, t)) ** 2


def bures_qfi_fd(p, cfg, which, step=1e-3):
    """Fidelity finite-difference QFI estimate at each grid time.

    E(d) = 8 (1 - sqrt(Fid(rho_lambda, rho_{lambda+d}))) / d^2, combined as
    2 E(d/2) - E(d). The combination cancels the O(d) bias the eigenvalue
    clamp introduces at the support boundary. Three propagations total.
    """
    if which == "chi":
        def shifted(d):
            return fock.ModelParams(delta=p.delta, chi=p.chi + d,
                                    gamma=p.gamma, drive_f=p.drive_f,
                                    theta=p.theta)
    elif which == "gamma":
        def shifted(d):
            return fock.ModelParams(delta=p.delta, chi=p.chi,
                                    gamma=p.gamma + d, drive_f=p.drive_f,
                                    theta=p.theta)
    else:
        raise ValueError(f"unknown parameter tag {which!r}")

    base = propagate_extended(p, cfg)
    hi = propagate_extended(shifted(step), cfg)
    mid = propagate_extended(shifted(0.5 * step), cfg)

    out = np.empty(len(base))
    for i, (s0, s1, s2) in enumerate(zip(base, hi, mid)):
        f1 = fock.fidelity(s0.rho, s1.rho)
        f2 = fock.fidelity(s0.rho, s2.rho)
        e1 = 8.0 * (1.0 - np.sqrt(f1)) / step ** 2
        e2 = 8.0 * (1.0 - np.sqrt(f2)) / (0.5 * step) ** 2
        out[i] = 2.0 * e2 - e1
    return out
