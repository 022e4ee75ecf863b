"""Exception types shared across the package."""


class RobosError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(RobosError, ValueError):
    pass


class NonFiniteInputError(RobosError, ValueError):
    pass


class DimensionMismatchError(RobosError, ValueError):
    pass


class DataError(RobosError):
    """Problems with input data: unreadable files, missing columns, short series."""


class DivergenceError(RobosError, ArithmeticError):
    """Training produced a non-finite risk."""


class TrialError(RobosError):
    """An objective raised during hyperparameter search."""

    def __init__(self, trial: int, message: str):
        super().__init__(f"trial {trial}: {message}")
        self.trial = trial
