"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class FracCauchyError(Exception):
    """Base class for every error raised by the package."""


class NumericError(FracCauchyError):
    """A numerical procedure could not meet its contract."""


# entire functions
class TailNotBounded(NumericError):
    pass


class NotDeterminable(NumericError):
    pass


class NoLimit(NumericError):
    def __init__(self, message: str, ratios=None):
        super().__init__(message)
        self.ratios = ratios


class OrderIntegral(NumericError):
    pass


class ConditionViolated(NumericError):
    def __init__(self, message: str, pair=None):
        super().__init__(message)
        self.pair = pair


class SamplingOverflow(NumericError):
    pass


class BoundViolated(NumericError):
    def __init__(self, message: str, radius=None):
        super().__init__(message)
        self.radius = radius


class PreconditionError(FracCauchyError):
    pass


# operators
class SingularBasis(NumericError):
    pass


class ZeroEigenvalue(FracCauchyError):
    pass


class NearPole(NumericError):
    def __init__(self, message: str, distance=None):
        super().__init__(message)
        self.distance = distance


# functional calculus
class NoDecay(NumericError):
    pass


class NodeOnPole(NearPole):
    pass


class ToleranceNotMet(NumericError):
    def __init__(self, message: str, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class NoConvergence(NumericError):
    def __init__(self, message: str, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class JetOverflow(FracCauchyError):
    pass


class BranchCrossing(NumericError):
    pass


# solver / fractional
class AuditFailed(FracCauchyError):
    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


class NonDecaying(FracCauchyError):
    pass


class EnvelopeViolated(NumericError):
    pass


class ConfigError(FracCauchyError):
    pass
