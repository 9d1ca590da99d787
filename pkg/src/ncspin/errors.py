"""Exception types raised by the numerical routines."""


class NcspinError(Exception):
    """Base class for all library errors."""


class ClosureFailure(NcspinError):
    """An algebraic identity failed to hold within tolerance."""


class NonTraceless(NcspinError):
    pass


class DegenerateWeights(NcspinError):
    """Reference eigenvalues are inconsistent with the requested partition."""


class ChartSingularity(NcspinError):
    """The group element lies outside the coordinate chart."""


class DomainViolation(NcspinError):
    """A point lies outside the domain of the orbit chart."""


class DomainExit(NcspinError):
    """An integrated trajectory left the chart domain."""


class StepFailure(NcspinError):
    """The adaptive step-size controller underflowed."""


class BranchViolation(NcspinError):
    """A power with non-integer exponent hit the principal-branch cut."""


class ConvergenceFailure(NcspinError):
    """A truncated series does not meet its tail bound."""


class TruncationWarning(UserWarning):
    """Degree-raising terms were clipped at the polynomial cutoff."""
