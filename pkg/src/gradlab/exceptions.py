"""Exception hierarchy for gradlab."""


class GradlabError(Exception):
    """Base class for all library errors."""


class ResolutionTooLowError(GradlabError, ValueError):
    """Quadrature grid too coarse for the requested modes."""


class SizeMismatchError(GradlabError, ValueError):
    pass


class GalerkinOverflowError(GradlabError, OverflowError):
    """A right-hand side produced non-finite values (imminent blow-up)."""


class UndefinedPotentialError(GradlabError):
    pass


class NoEquilibriumError(GradlabError, ValueError):
    pass


class ZeroStateError(GradlabError, ValueError):
    pass


class DegenerateProjectionError(GradlabError, ValueError):
    pass


class NoConvergenceError(GradlabError, RuntimeError):
    pass


class SingularJacobianError(GradlabError, RuntimeError):
    pass


class InsufficientDataError(GradlabError, ValueError):
    pass


class HypothesisFailedError(GradlabError):
    """The premise of a bound check does not hold on the sample grid."""


class ConfigError(GradlabError, ValueError):
    pass


class UnknownPresetError(ConfigError, KeyError):
    pass
