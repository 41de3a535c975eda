"""Exception hierarchy."""


class OverdampingError(Exception):
    """Base class for errors raised by this package."""


class DomainError(OverdampingError, ValueError):
    """An argument lies outside the domain where an operation is defined."""


class UnitError(DomainError):
    """A coupling constant carries the wrong unit tag for the host model."""


class BranchAbsent(DomainError):
    """The requested relaxation branch does not exist for these parameters."""


class EmptyShellError(DomainError):
    """No bath eigenstate falls inside the microcanonical window."""


class RecurrenceError(DomainError):
    """A finite-bath run was asked to go past its recurrence-safe horizon."""


class NumericalError(OverdampingError, ArithmeticError):
    """A numerical kernel failed to meet its contract."""


class QuadratureError(NumericalError):
    def __init__(self, message, *, value=None, error=None, panels=None, worst_panel=None):
        super().__init__(message)
        self.value = value
        self.error = error
        self.panels = panels
        self.worst_panel = worst_panel


class DivergentIntegralError(QuadratureError):
    """The integral is divergent (not just slowly convergent)."""


class EigenError(NumericalError):
    """Eigensolver failed or violated its residual contract."""


class DegenerateBathError(NumericalError):
    """Bath spectral weight vanishes where a rate needs it to be positive."""


class HighTemperatureWarning(UserWarning):
    """A high-temperature closed form is used outside beta*hbar*omega0 << 1."""
