"""Exception types shared across the package.

CLI exit-code mapping: ConfigError -> 2, TruncationOverflowError -> 3,
NumericalError (and subclasses) -> 4.
"""


class KerrFisherError(Exception):
    """Base class for all package errors."""


class InvalidDimensionError(KerrFisherError, ValueError):
    """Fock truncation dimension below the minimum of 2."""


class DimensionMismatchError(KerrFisherError, ValueError):
    """Operands built for different truncation dimensions."""


class ConfigError(KerrFisherError, ValueError):
    """Unparseable or invalid scenario configuration."""


class NumericalError(KerrFisherError, RuntimeError):
    """Base class for numerical failures during a run."""


class TruncationOverflowError(NumericalError):
    """Population reached the top of the truncated Fock space.

    Carries the offending time and tail population so callers can report
    which scenario needs a larger dimension.
    """

    def __init__(self, time, tail_population, threshold, scenario=None):
        self.time = time
        self.tail_population = tail_population
        self.threshold = threshold
        self.scenario = scenario
        where = f" in scenario {scenario}" if scenario else ""
        super().__init__(
            f"top-two-level population {tail_population:.3e} exceeded "
            f"threshold {threshold:.3e} at t={time:.6g}{where}; increase dim"
        )


class StepFailureError(NumericalError):
    """Adaptive step controller could not meet tolerances."""


class SingularQfimError(NumericalError):
    """QFIM not invertible where an inverse-based bound was requested."""

    def __init__(self, det, scenario=None):
        self.det = det
        self.scenario = scenario
        where = f" in scenario {scenario}" if scenario else ""
        super().__init__(
            f"QFIM determinant {det:.3e} too small for a scalar bound{where}; "
            "parameters are not jointly identifiable at this time"
        )


class GridCoverageError(ConfigError):
    """Quadrature grid too narrow for the requested Fock dimension."""


class RankDeficiencyWarning(UserWarning):
    """SLD solve left a residual above tolerance on a rank-deficient state."""
