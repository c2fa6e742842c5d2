"""Exception hierarchy shared by every steklov_lab module."""


class SteklovError(Exception):
    """Base class for all errors raised by the laboratory."""


class DomainSpecError(SteklovError, ValueError):
    """A domain descriptor is malformed or its parameters break simplicity."""


class QuadratureError(SteklovError, ValueError):
    """A boundary grid was requested with an invalid node count."""


class ConfigError(SteklovError, ValueError):
    """A configuration value is outside its validated range."""


class CoincidentPointsError(SteklovError, ValueError):
    """A kernel was evaluated with source and target at the same point."""


class SymbolIntegralError(SteklovError):
    """A symbol Fourier integral failed to converge."""


class IllConditionedError(SteklovError):
    """A linear system is too ill-conditioned to be solved reliably."""

    def __init__(self, message: str, condition_number: float):
        super().__init__(f"{message} (condition number {condition_number:.3e})")
        self.condition_number = condition_number


class EigenSolverError(SteklovError):
    """The dense symmetric eigensolver did not converge."""


class CollarPointError(SteklovError, ValueError):
    """A potential was requested at a point inside the boundary collar."""


class InadmissibleLevelError(SteklovError, ValueError):
    """A level alpha lies outside the admissible range."""


class DataError(SteklovError, ValueError):
    """Input data for a fit, a symbol integral or a measurement is unusable."""
