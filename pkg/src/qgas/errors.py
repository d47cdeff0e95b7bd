"""Exception types shared across the package."""


class QGasError(Exception):
    """Base class for all package-specific errors."""


class PoleViolation(QGasError):
    """The occupation denominator z^{-1} e^{beta*eps} - q would vanish or go negative."""


class TailBoundFailure(QGasError):
    """No truncation radius certifies the requested tolerance below the term cap."""


class DomainError(QGasError, ValueError):
    """An input lies outside the mathematical domain of the operation."""


class DivergentInput(QGasError):
    """The requested quantity diverges for these parameters."""


class PrecisionExhausted(QGasError):
    """High-precision evaluation lost too many significant digits."""

    def __init__(self, message, n=None):
        super().__init__(message)
        self.n = n


class DegenerateFit(QGasError):
    """All residuals sit below the numerical floor; no slope can be fitted."""
