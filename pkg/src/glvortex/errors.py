"""Exception hierarchy shared by all glvortex modules.

Exit-code mapping used by the CLI: configuration problems -> 2,
numerical failures -> 3, loss of vortex identity -> 4.
"""


class GlvError(Exception):
    """Base class for all package errors."""


class ConfigError(GlvError):
    """Invalid run configuration; message names the offending key."""

    exit_code = 2


class NumericalError(GlvError):
    """Base class for failures of the numerics themselves."""

    exit_code = 3


class StabilityViolation(NumericalError):
    """Unforced energy grew beyond the configured per-step guard."""


class NonFinite(NumericalError):
    """A field developed NaN or Inf entries."""


class SolverFailure(NumericalError):
    """An elliptic solve produced an inconsistent or non-finite result."""


class NoConvergence(NumericalError):
    """An iterative solve (radial profile relaxation) failed to converge."""


class StepUnderflow(NumericalError):
    """Adaptive ODE integration could not continue (step size collapsed)."""


class ConfigTooClose(NumericalError):
    """Vortex configuration too tight for the grid resolution."""


class ConfigTooTight(NumericalError):
    """Vortex configuration too tight for the requested core size."""


class TrackingError(GlvError):
    """Base class for vortex-identity failures."""

    exit_code = 4


class TrackingLost(TrackingError):
    """Vortex count/degree changed or a match exceeded the mobility cap."""


class DegreeOutOfRange(TrackingError):
    """A detected winding cluster has degree outside {-1, +1}."""


class BoundaryContamination(TrackingError):
    """A winding cluster touches the boundary collar."""


class TestFunctionInvalid(GlvError):
    """A test function violates its required support/affine conditions."""

    __test__ = False  # not a pytest class, despite the name
    exit_code = 3


class HorizonMismatch(GlvError):
    """Records being compared do not share configuration or horizon."""

    exit_code = 3
