import numpy as np
import numpy.testing as npt
import pytest
from dataclasses import replace

from kerrfisher.errors import TruncationOverflowError
from kerrfisher.fock import ModelParams, annihilation, vacuum_state
from kerrfisher.propagator import (PropagationConfig, _Generator,
                                   dchi_liouvillian_apply, default_dim,
                                   dgamma_liouvillian_apply,
                                   liouvillian_apply, propagate_extended,
                                   tail_population)
from conftest import KERR_POINT

rng = np.random.default_rng(7)


def random_hermitian(dim):
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return m + m.conj().T


class TestConfig:
    def test_grid_must_start_at_zero(self):
        with pytest.raises(ValueError, match="start at 0"):
            PropagationConfig(dim=10, t_grid=np.array([1.0, 2.0]))

    def test_grid_must_increase(self):
        with pytest.raises(ValueError, match="increasing"):
            PropagationConfig(dim=10, t_grid=np.array([0.0, 2.0, 1.0]))

    def test_bad_tolerances(self):
        with pytest.raises(ValueError):
            PropagationConfig(dim=10, t_grid=np.array([0.0, 1.0]), rel_tol=0)

    def test_default_dim_split(self):
        assert default_dim(ModelParams(drive_f=0.1)) == 30
        assert default_dim(ModelParams(drive_f=0.2)) == 30
        assert default_dim(ModelParams(drive_f=1.0)) == 60


class TestGeneratorForms:
    """The readable Lindblad map and the batched stacked form must agree."""

    def test_batched_matches_readable(self):
        dim = 12
        p = ModelParams(chi=0.3, gamma=0.4, drive_f=0.6)
        gen = _Generator(p, dim)
        blocks = np.stack([random_hermitian(dim) for _ in range(3)])
        out = gen.rhs(0.0, blocks.ravel()).reshape(3, dim, dim)
        # block 0 is the plain Lindblad map
        npt.assert_allclose(out[0], liouvillian_apply(p, blocks[0]),
                            atol=1e-12)
        # derivative blocks see the same map plus a source from block 0
        for k, source in ((1, dchi_liouvillian_apply(blocks[0])),
                          (2, dgamma_liouvillian_apply(blocks[0]))):
            want = liouvillian_apply(p, blocks[k]) + source
            npt.assert_allclose(out[k], want, atol=1e-12)

    def test_dchi_is_kerr_commutator(self):
        dim = 9
        rho = random_hermitian(dim)
        n = np.arange(dim)
        hk = np.diag(0.5 * n * (n - 1)).astype(complex)
        npt.assert_allclose(dchi_liouvillian_apply(rho),
                            -1j * (hk @ rho - rho @ hk), atol=1e-13)

    def test_dgamma_is_half_dissipator(self):
        dim = 9
        rho = random_hermitian(dim)
        a = annihilation(dim)
        num = a.conj().T @ a
        want = 0.5 * (a @ rho @ a.conj().T - 0.5 * (num @ rho + rho @ num))
        npt.assert_allclose(dgamma_liouvillian_apply(rho), want, atol=1e-13)

    def test_map_is_trace_free(self):
        p = ModelParams(chi=0.2, gamma=0.3, drive_f=0.4)
        rho = random_hermitian(10)
        assert abs(np.trace(liouvillian_apply(p, rho))) < 1e-12
        assert abs(np.trace(dgamma_liouvillian_apply(rho))) < 1e-12
        assert abs(np.trace(dchi_liouvillian_apply(rho))) < 1e-12


class TestPropagation:
    def test_initial_state(self, kerr_states):
        s0 = kerr_states[0]
        npt.assert_array_equal(s0.rho, vacuum_state(30))
        assert not s0.drho_chi.any()
        assert not s0.drho_gamma.any()

    def test_invariants_at_outputs(self, kerr_states):
        for s in kerr_states:
            assert abs(np.trace(s.rho).real - 1.0) < 1e-8
            for block in (s.rho, s.drho_chi, s.drho_gamma):
                npt.assert_allclose(block, block.conj().T, atol=1e-10)
                if block is not s.rho:
                    assert abs(np.trace(block)) < 1e-8
            wmin = np.linalg.eigvalsh(s.rho).min()
            assert wmin > -1e-10

    def test_dense_output_consistent_with_direct(self):
        p = KERR_POINT
        coarse = propagate_extended(
            p, PropagationConfig(dim=20, t_grid=np.array([0.0, 10.0])))
        fine = propagate_extended(
            p, PropagationConfig(dim=20, t_grid=np.array([0.0, 5.0, 10.0])))
        # extra output times change only where the dense polynomial is
        # evaluated, not the step sequence
        npt.assert_allclose(coarse[-1].rho, fine[-1].rho, atol=1e-12)

    def test_finite_difference_consistency(self):
        # d_chi block against central differences of plain propagations;
        # the error must shrink like delta^2
        t = 5.0
        cfg = PropagationConfig(dim=25, t_grid=np.array([0.0, t]))
        base = propagate_extended(KERR_POINT, cfg)[-1]

        def fd(delta):
            hi = propagate_extended(replace(KERR_POINT, chi=0.1 + delta), cfg)
            lo = propagate_extended(replace(KERR_POINT, chi=0.1 - delta), cfg)
            return (hi[-1].rho - lo[-1].rho) / (2 * delta)

        delta = 0.02
        err1 = np.abs(fd(delta) - base.drho_chi).max()
        err2 = np.abs(fd(delta / 2) - base.drho_chi).max()
        assert err1 / err2 == pytest.approx(4.0, rel=0.2)

    def test_gamma_block_against_fd(self):
        t = 5.0
        cfg = PropagationConfig(dim=25, t_grid=np.array([0.0, t]))
        base = propagate_extended(KERR_POINT, cfg)[-1]
        delta = 1e-4
        hi = propagate_extended(replace(KERR_POINT, gamma=0.01 + delta), cfg)
        lo = propagate_extended(replace(KERR_POINT, gamma=0.01 - delta), cfg)
        fd = (hi[-1].rho - lo[-1].rho) / (2 * delta)
        npt.assert_allclose(fd, base.drho_gamma, atol=2e-7)

    def test_timescale_invariance(self):
        # doubling every rate and halving time leaves rho unchanged and
        # scales the derivative blocks by 1/2
        t = 30.0
        slow = propagate_extended(
            KERR_POINT, PropagationConfig(dim=25, t_grid=np.array([0.0, t])))
        fast_params = ModelParams(delta=2.0, chi=0.2, gamma=0.02, drive_f=0.2)
        fast = propagate_extended(
            fast_params, PropagationConfig(dim=25, t_grid=np.array([0.0, t / 2])))
        npt.assert_allclose(fast[-1].rho, slow[-1].rho, atol=1e-8)
        npt.assert_allclose(fast[-1].drho_chi, 0.5 * slow[-1].drho_chi,
                            atol=1e-8)
        npt.assert_allclose(fast[-1].drho_gamma, 0.5 * slow[-1].drho_gamma,
                            atol=1e-8)

    def test_truncation_overflow_raises(self):
        p = ModelParams(chi=0.1, gamma=0.01, drive_f=1.0)
        cfg = PropagationConfig(dim=8, t_grid=np.array([0.0, 50.0]))
        with pytest.raises(TruncationOverflowError) as exc:
            propagate_extended(p, cfg)
        assert exc.value.tail_population > exc.value.threshold
        assert 0 < exc.value.time <= 50.0

    def test_tail_population_small_at_adequate_dim(self, kerr_states):
        for s in kerr_states:
            assert tail_population(s.rho) < 1e-8

    def test_undriven_vacuum_is_stationary(self):
        p = ModelParams(chi=0.5, gamma=0.3, drive_f=0.0)
        cfg = PropagationConfig(dim=10, t_grid=np.array([0.0, 10.0]))
        final = propagate_extended(p, cfg)[-1]
        npt.assert_allclose(final.rho, vacuum_state(10), atol=1e-10)
        npt.assert_allclose(final.drho_chi, 0, atol=1e-10)
        npt.assert_allclose(final.drho_gamma, 0, atol=1e-10)

    def test_mean_photon_number_reasonable(self, kerr_state_t50):
        # steady amplitude |F/s| with s = i*delta - gamma/4 keeps nbar near
        # F^2/(delta^2 + gamma^2/16), about 0.01 here
        a = annihilation(30)
        nbar = np.trace(a.conj().T @ a @ kerr_state_t50.rho).real
        assert 0.001 < nbar < 0.1
