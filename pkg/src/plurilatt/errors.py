"""Exception hierarchy shared by all modules."""


class PlurilattError(Exception):
    """Base class for every error raised by the package."""


class InvalidAxes(PlurilattError, ValueError):
    pass


class InvalidSurface(PlurilattError, ValueError):
    pass


class NotFlippable(PlurilattError):
    pass


class DegenerateWeights(PlurilattError, ZeroDivisionError):
    """A star-triangle-type map hit a vanishing denominator.

    ``cube`` is filled in by :func:`plurilatt.weights.propagate` so callers can
    report where the degeneracy happened.
    """

    def __init__(self, message, cube=None):
        super().__init__(message)
        self.cube = cube


class InconsistentCoefficients(PlurilattError):
    def __init__(self, message, disagreement=None, cube=None):
        super().__init__(message)
        self.disagreement = disagreement
        self.cube = cube


class SingularMatrix(PlurilattError, ZeroDivisionError):
    pass


class MissingInitialData(PlurilattError):
    pass


class MissingCoefficients(PlurilattError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""


class MissingFieldValues(PlurilattError, KeyError):
    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point

    def __str__(self):
        return str(self.args[0]) if self.args else ""


class SingularConversion(PlurilattError, ZeroDivisionError):
    pass


class ConservationViolated(PlurilattError):
    pass


class DanglingInterior(PlurilattError):
    pass


class SingularSystem(PlurilattError):
    pass


class UnsolvablePivot(PlurilattError):
    pass


class NotHarmonic(PlurilattError):
    def __init__(self, message, point=None, residual=None):
        super().__init__(message)
        self.point = point
        self.residual = residual


class MultiplyConnected(PlurilattError):
    pass


class SchemaError(PlurilattError, ValueError):
    """Input file does not match the expected JSON or CSV layout."""
