"""Exception hierarchy shared by all solver modules."""


class BellmanError(Exception):
    """Base class for every error raised by this package."""


class DomainError(BellmanError, ValueError):
    """Argument outside the domain of a function (or a singular point)."""


class RegimeError(BellmanError):
    """A concavity certificate failed.

    Attributes
    ----------
    where : float or None
        First abscissa at which the certificate was violated.
    """

    def __init__(self, msg, where=None):
        super().__init__(msg)
        self.where = where


class NoRootError(BellmanError):
    """A scalar equation has no sign change on the requested bracket."""


class DegenerateChordError(BellmanError):
    """A chordal differential vanished; the chordal family cannot continue."""


class StepSizeError(BellmanError):
    """Newton projection failed to converge during continuation."""


class UnsupportedFoliationError(BellmanError):
    """None of the built-in regimes certifies for the given boundary data."""


class ConvergenceError(BellmanError):
    """Iteration cap exceeded before the stopping rule was met."""

    def __init__(self, msg, sup_delta=None):
        super().__init__(msg)
        self.sup_delta = sup_delta


class CoverageError(BellmanError):
    """Evaluation point lies outside every figure of a foliation."""
