import numpy as np
import pytest

from kerrfisher.fock import ModelParams
from kerrfisher.propagator import PropagationConfig, propagate_extended

# workhorse parameter point: every rate well below the detuning, moderate
# photon number, nontrivial mixing by t=50
KERR_POINT = ModelParams(chi=0.1, gamma=0.01, drive_f=0.1)


@pytest.fixture(scope="session")
def kerr_states():
    """Extended states of the workhorse point at a few spread-out times."""
    cfg = PropagationConfig(dim=30, t_grid=np.array([0.0, 5.0, 20.0, 50.0]))
    return propagate_extended(KERR_POINT, cfg)


@pytest.fixture(scope="session")
def kerr_state_t20(kerr_states):
    return kerr_states[2]


@pytest.fixture(scope="session")
def kerr_state_t50(kerr_states):
    return kerr_states[3]
