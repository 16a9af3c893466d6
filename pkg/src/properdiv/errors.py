"""Exception and warning types raised across the package."""


class ProperDivError(Exception):
    """Base class for all package errors."""


class InvalidInput(ProperDivError, ValueError):
    pass


class OutOfRange(InvalidInput):
    def __init__(self, value, message=None):
        self.value = value
        super().__init__(message or f"value {value!r} outside the binning range")


class NoCommonCells(InvalidInput):
    """Datasets being compared share no grid cell."""


class SingularCovariance(ProperDivError, ArithmeticError):
    pass


class Unsupported(ProperDivError, NotImplementedError):
    pass


class ParseError(ProperDivError, ValueError):
    def __init__(self, message, row=None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class EmptyDataset(ParseError):
    pass


class IncompleteYear(UserWarning):
    """A calendar year had fewer daily entries than required."""
