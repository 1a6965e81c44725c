"""Exception types raised across the package."""


class RnmfError(Exception):
    """Base class for package errors."""


class DimensionMismatch(RnmfError, ValueError):
    pass


class ZeroColumn(RnmfError, ValueError):
    def __init__(self, column):
        super().__init__(f"column {column} has (near) zero norm")
        self.column = column


class DomainError(RnmfError, ValueError):
    pass


class NonSquare(RnmfError, ValueError):
    pass


class BadShape(RnmfError, ValueError):
    pass


class EmptySelection(RnmfError, ValueError):
    pass


class TooLarge(RnmfError, ValueError):
    pass


class NoConvergence(RnmfError, RuntimeError):
    pass


class NumericFailure(RnmfError, FloatingPointError):
    """NaN encountered during a solve.

    ``report`` holds the :class:`~rnmf.solver.SolveReport` accumulated up to
    the last finite iterate.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
