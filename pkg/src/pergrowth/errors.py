"""Exception hierarchy shared by every module.

``ValidationError`` subclasses signal bad inputs (CLI exit code 2);
``NumericFailure`` subclasses signal a computation that did not succeed
(CLI exit code 3).
"""


class PergrowthError(Exception):
    """Base class; ``details`` is carried into JSON error reports."""

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details


class ValidationError(PergrowthError):
    pass


class NumericFailure(PergrowthError):
    pass


# phase-core / hamiltonian-flows
class IntegrationFailure(NumericFailure):
    pass


class InvarianceViolation(ValidationError):
    pass


class NotDiffeo(ValidationError):
    pass


# resonant-forge
class NotLowestTerms(ValidationError):
    pass


class InterpolationSingular(NumericFailure):
    pass


class NoTwist(ValidationError):
    pass


class NotResonantCircle(ValidationError):
    pass


class EmptyAdmissibleRange(NumericFailure):
    pass


# kam-lab
class NonConvergent(NumericFailure):
    pass


class RationalDetected(ValidationError):
    pass


class SmallDivisorResonance(NumericFailure):
    def __init__(self, message, k=None, **details):
        super().__init__(message, k=k, **details)
        self.k = k


class NewtonDiverged(NumericFailure):
    def __init__(self, message, history=(), **details):
        super().__init__(message, history=list(history), **details)
        self.history = list(history)


class TwistLost(NumericFailure):
    pass


class GraphFolded(NumericFailure):
    pass


class ResonantEigenvalue(NumericFailure):
    pass


class NotElliptic(ValidationError):
    pass


# orbit-census
class NotPeriodic(NumericFailure):
    pass


# interval-growth
class DomainError(ValidationError):
    pass


class BudgetTooSmall(NumericFailure):
    pass


class PartitionOverflow(NumericFailure):
    pass


# campaign
class ConfigError(ValidationError):
    pass


class BudgetExceeded(NumericFailure):
    pass


class CensusShortfall(NumericFailure):
    pass


class CampaignHalted(NumericFailure):
    def __init__(self, message, stage=None, history=(), **details):
        super().__init__(message, stage=stage, history=list(history), **details)
        self.stage = stage
        self.history = list(history)
