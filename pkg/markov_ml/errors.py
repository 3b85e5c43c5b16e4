__all__ = [
    'MarkovMLError', 'InputError', 'DimensionMismatchError',
    'MatrixMarketError', 'OracleError', 'OracleSizeError',
    'SolverError', 'BreakdownError', 'SingularDiagonalError',
    'CancellationError', 'SignViolationError', 'StagnationError',
    'SlowProcessError', 'GenerationError',
]


class MarkovMLError(Exception):
    """Base class of all errors raised by this package."""


class InputError(MarkovMLError, ValueError):
    """Invalid arguments or malformed input data."""


class DimensionMismatchError(InputError):
    pass


class MatrixMarketError(InputError):
    """
    Syntax error in a Matrix Market file.

    Args:
        path (str): Path of the offending file.
        lineno (int): 1-based line number of the error.
        message (str): Description of the problem.
    """

    def __init__(self, path, lineno, message):
        super(MatrixMarketError, self).__init__(
            '{}:{}: {}'.format(path, lineno, message))
        self.path = path
        self.lineno = lineno


class OracleError(MarkovMLError, RuntimeError):
    """The dense eigen-oracle failed."""


class OracleSizeError(OracleError):
    """The matrix is too large for the dense eigen-oracle."""


class SolverError(MarkovMLError, RuntimeError):
    pass


class BreakdownError(SolverError):
    """An iterate vanished or became non-finite."""


class SingularDiagonalError(SolverError):
    pass


class CancellationError(SolverError):
    """An aggregate of a reference vector sums to zero."""


class SignViolationError(SolverError):
    pass


class StagnationError(SolverError):
    pass


class SlowProcessError(SolverError):
    """
    The coarse-level correction repeatedly increased the residual.

    Args:
        level (int): Index of the level where the growth was observed.
        message (str): Description of the problem.
    """

    def __init__(self, level, message):
        super(SlowProcessError, self).__init__(
            'level {}: {}'.format(level, message))
        self.level = level


class GenerationError(MarkovMLError, RuntimeError):
    """A problem generator could not produce a valid chain."""
