import numpy as np
import numpy.testing as npt
import pytest

from kerrfisher.fock import ModelParams, annihilation
from kerrfisher.oracles import (bures_qfi_fd, linear_alpha,
                                linear_cfi_gamma_theta0,
                                linear_dalpha_dgamma, linear_qfi_gamma)
from kerrfisher.propagator import PropagationConfig, propagate_extended

DELTA, GAMMA, DRIVE = 1.0, 0.01, 0.1


class TestClosedForms:
    def test_alpha_starts_at_zero(self):
        assert linear_alpha(DELTA, GAMMA, DRIVE, 0.0) == pytest.approx(0.0)

    def test_alpha_satisfies_mean_field_ode(self):
        # d alpha/dt = (i delta - gamma/4) alpha + F, checked by a tiny
        # central difference on the closed form
        t, h = 17.0, 1e-6
        lhs = (linear_alpha(DELTA, GAMMA, DRIVE, t + h)
               - linear_alpha(DELTA, GAMMA, DRIVE, t - h)) / (2 * h)
        s = 1j * DELTA - GAMMA / 4.0
        rhs = s * linear_alpha(DELTA, GAMMA, DRIVE, t) + DRIVE
        assert lhs == pytest.approx(rhs, abs=1e-8)

    def test_gamma_derivative_matches_fd(self):
        t, h = 40.0, 1e-6
        fd = (linear_alpha(DELTA, GAMMA + h, DRIVE, t)
              - linear_alpha(DELTA, GAMMA - h, DRIVE, t)) / (2 * h)
        got = linear_dalpha_dgamma(DELTA, GAMMA, DRIVE, t)
        assert got == pytest.approx(fd, rel=1e-6)

    def test_qfi_cfi_relation(self):
        # at theta=0 only the real part of the displacement derivative is
        # visible, so the classical value never exceeds the quantum one
        t = np.linspace(1, 100, 25)
        qfi = linear_qfi_gamma(DELTA, GAMMA, DRIVE, t)
        cfi = linear_cfi_gamma_theta0(DELTA, GAMMA, DRIVE, t)
        assert np.all(cfi <= qfi + 1e-15)
        assert np.all(qfi >= 0)


class TestAgainstPropagation:
    def test_first_moment_tracks_closed_form(self):
        p = ModelParams(chi=0.0, gamma=GAMMA, drive_f=DRIVE)
        times = np.array([0.0, 5.0, 25.0, 80.0])
        cfg = PropagationConfig(dim=20, t_grid=times)
        states = propagate_extended(p, cfg)
        a = annihilation(20)
        for state in states:
            got = complex(np.trace(a @ state.rho))
            want = complex(linear_alpha(DELTA, GAMMA, DRIVE, state.time))
            assert got == pytest.approx(want, abs=1e-8)

    def test_photon_number_is_amplitude_squared(self):
        # the lossy driven linear cavity stays exactly coherent
        p = ModelParams(chi=0.0, gamma=GAMMA, drive_f=DRIVE)
        cfg = PropagationConfig(dim=20, t_grid=np.array([0.0, 60.0]))
        state = propagate_extended(p, cfg)[-1]
        a = annihilation(20)
        nbar = np.trace(a.conj().T @ a @ state.rho).real
        alpha = linear_alpha(DELTA, GAMMA, DRIVE, 60.0)
        assert nbar == pytest.approx(abs(alpha) ** 2, rel=1e-8)


class TestBuresEstimator:
    def test_zero_at_initial_time(self):
        p = ModelParams(chi=0.1, gamma=GAMMA, drive_f=DRIVE)
        cfg = PropagationConfig(dim=20, t_grid=np.array([0.0, 2.0]))
        est = bures_qfi_fd(p, cfg, "chi", step=1e-3)
        assert est[0] == pytest.approx(0.0, abs=1e-12)
        assert est.shape == (2,)

    def test_linear_cavity_gamma_qfi(self):
        # finite-difference Bures estimate against the closed form, no SLD
        # machinery anywhere in this comparison
        p = ModelParams(chi=0.0, gamma=GAMMA, drive_f=DRIVE)
        cfg = PropagationConfig(dim=25, t_grid=np.array([0.0, 30.0]),
                                rel_tol=1e-11, abs_tol=1e-13)
        est = bures_qfi_fd(p, cfg, "gamma", step=1e-3)[-1]
        want = float(linear_qfi_gamma(DELTA, GAMMA, DRIVE, 30.0))
        assert est == pytest.approx(want, rel=1e-2)

    def test_unknown_tag(self):
        p = ModelParams(chi=0.1, gamma=GAMMA, drive_f=DRIVE)
        cfg = PropagationConfig(dim=10, t_grid=np.array([0.0, 1.0]))
        with pytest.raises(ValueError):
            bures_qfi_fd(p, cfg, "drive")
