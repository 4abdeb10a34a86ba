"""Exception types raised across the package."""


class ElspotError(Exception):
    """Base class for all package errors."""


class EmptyInput(ElspotError, ValueError):
    pass


class ParseError(ElspotError, ValueError):
    def __init__(self, line, message=""):
        self.line = line
        super().__init__(f"line {line}: {message}" if message else f"line {line}")


class GapError(ElspotError, ValueError):
    def __init__(self, date):
        self.date = date
        super().__init__(f"missing date {date.isoformat()}")


class InvalidWindow(ElspotError, ValueError):
    pass


class InvalidHurst(ElspotError, ValueError):
    pass


class EmbeddingError(ElspotError, ArithmeticError):
    pass


class UnstableStep(ElspotError, ValueError):
    pass


class InvalidTime(ElspotError, ValueError):
    pass


class InvalidProbability(ElspotError, ValueError):
    pass


class InvalidInterval(ElspotError, ValueError):
    pass


class InsufficientData(ElspotError, ValueError):
    pass


class DegenerateInput(ElspotError, ValueError):
    pass


class DomainError(ElspotError, ArithmeticError):
    pass


class NonStationary(ElspotError, ValueError):
    pass


class FitError(ElspotError, RuntimeError):
    """Optimizer failure; ``best`` holds the best iterate found, if any."""

    def __init__(self, message, best=None):
        self.best = best
        super().__init__(message)
