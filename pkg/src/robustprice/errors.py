"""Exception types raised across the package."""


class RobustPriceError(Exception):
    """Base class for all package errors."""


class InputError(RobustPriceError, ValueError):
    """Bad user-supplied data or configuration (maps to CLI exit code 2)."""


class SchemaError(InputError):
    pass


class EmptyInputError(InputError):
    pass


class ParseError(InputError):
    def __init__(self, message, row=None):
        super().__init__(message)
        self.row = row


class ConfigError(InputError):
    pass


class ComputationError(RobustPriceError, ArithmeticError):
    """Numerical failure (maps to CLI exit code 1)."""


class DimensionError(ComputationError, ValueError):
    pass


class DomainError(ComputationError, ValueError):
    pass


class DataError(ComputationError, ValueError):
    """Non-finite or otherwise unusable numeric data."""


class EmptyYearError(ComputationError, ValueError):
    pass


class UndefinedStatisticError(ComputationError, ValueError):
    """Correlation or R² requested on constant data."""


class ZeroVarianceError(ComputationError, ValueError):
    def __init__(self, message, column=None):
        super().__init__(message)
        self.column = column


class RankError(ComputationError, ValueError):
    def __init__(self, message, column=None):
        super().__init__(message)
        self.column = column


class InsufficientDataError(ComputationError, ValueError):
    pass


class SplitError(ComputationError, ValueError):
    pass
