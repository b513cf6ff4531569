"""
Exception hierarchy for the hjortic engine.
"""


class HjorticError(Exception):
    """Base class for computation errors raised by the engine."""


class DataFormatError(HjorticError):
    """Input file could not be parsed."""

    def __init__(self, message, row=None, column=None):
        self.row = row
        self.column = column
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column '{column}'")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


class InsufficientDataError(HjorticError):
    """Not enough usable observations for the requested computation."""


class SingularDesignError(HjorticError):
    """Design matrix is rank deficient (collinear regressors)."""


class ConvergenceError(HjorticError):
    """Numerical optimizer or iteration did not converge."""


class NonStationaryError(HjorticError):
    """Autoregressive coefficients lie outside the stationary region."""


class NotNestedError(HjorticError):
    """Candidate model is not nested in the wide model."""


class DegenerateError(HjorticError):
    """Zero variance or zero spread where a positive one is required."""


class BridgeFitError(HjorticError):
    """A refit inside the monitoring bridge failed."""

    def __init__(self, year, cause):
        self.year = year
        self.cause = cause
        super().__init__(f"Bridge refit failed at year {year}: {cause}")
