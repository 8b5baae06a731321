"""Fisher-information toolkit for a coherently driven lossy Kerr resonator.

The pipeline: propagate the density matrix together with its parameter
derivatives in truncated Fock space, solve for symmetric logarithmic
derivatives, and assemble the quantum Fisher information matrix, the
Uhlmann curvature, Cramer-Rao bounds, and the classical Fisher information
of homodyne detection.
"""

from .errors import (ConfigError, DimensionMismatchError, GridCoverageError,
                     InvalidDimensionError, KerrFisherError, NumericalError,
                     RankDeficiencyWarning, SingularQfimError,
                     StepFailureError, TruncationOverflowError)
from .estimation import (CrbReport, QfimResult, SldPair, crb_report, qfim,
                         sld_pair, solve_sld, support_rank, uhlmann)
from .fock import (ModelParams, annihilation, build_hamiltonian,
                   check_density_matrix, coherent_state, fidelity,
                   number_diag, trace_distance, vacuum_state)
from .homodyne import (HomodyneDistribution, QuadratureGrid, classical_fi,
                       default_grid, homodyne_distribution,
                       quadrature_wavefunctions, rotate_frame)
from .propagator import (ExtendedState, PropagationConfig,
                         dchi_liouvillian_apply, default_dim,
                         dgamma_liouvillian_apply, liouvillian_apply,
                         propagate_extended, tail_population)
from .scenario import (PropagationSettings, ResultRow, ScenarioConfig,
                       SweepAxis, emit_csv, load_config, run_scenario,
                       scenario_id)
from .figures import reproduce_figure
from .selftest import run_selftest

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "DimensionMismatchError", "GridCoverageError",
    "InvalidDimensionError", "KerrFisherError", "NumericalError",
    "RankDeficiencyWarning", "SingularQfimError", "StepFailureError",
    "TruncationOverflowError",
    "CrbReport", "QfimResult", "SldPair", "crb_report", "qfim", "sld_pair",
    "solve_sld", "support_rank", "uhlmann",
    "ModelParams", "annihilation", "build_hamiltonian",
    "check_density_matrix", "coherent_state", "fidelity", "number_diag",
    "trace_distance", "vacuum_state",
    "HomodyneDistribution", "QuadratureGrid", "classical_fi", "default_grid",
    "homodyne_distribution", "quadrature_wavefunctions", "rotate_frame",
    "ExtendedState", "PropagationConfig", "dchi_liouvillian_apply",
    "default_dim", "dgamma_liouvillian_apply", "liouvillian_apply",
    "propagate_extended", "tail_population",
    "PropagationSettings", "ResultRow", "ScenarioConfig", "SweepAxis",
    "emit_csv", "load_config", "run_scenario", "scenario_id",
    "reproduce_figure", "run_selftest",
    "__version__",
]
