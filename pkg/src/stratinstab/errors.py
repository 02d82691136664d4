"""Exception hierarchy shared by every module of the package."""


class StratInstabError(Exception):
    """Base class for all errors raised by stratinstab."""


class ConfigurationError(StratInstabError, ValueError):
    """Invalid user input (parameters, config files)."""


class NumericalError(StratInstabError, ArithmeticError):
    """A numerical procedure failed to deliver a trustworthy answer."""


class AlphaOutOfRange(ConfigurationError):
    pass


class NonMonotoneShear(ConfigurationError):
    pass


class DegenerateShear(NumericalError):
    pass


class BranchViolation(ConfigurationError):
    """Phase speed outside the open upper half-plane."""


class NotFriedlander(ConfigurationError):
    """Integral formulation requested for an equilibrium without the
    -rho' = alpha(1-alpha) U'^2 structure."""


class NonContractive(NumericalError):
    pass


class ToleranceNotReached(NumericalError):
    pass


class ZeroOnContour(NumericalError):
    pass


class RefinementExhausted(NumericalError):
    pass


class NoZeroFound(NumericalError):
    pass


class NotAZero(NumericalError):
    pass


class NoGrowth(NumericalError):
    pass


class CflViolation(NumericalError):
    pass


class NoBlowupWithinBudget(NumericalError):
    def __init__(self, message, series=None):
        super().__init__(message)
        self.series = series


class IncompatibleEps(ConfigurationError):
    pass
