"""Exception types raised across the package."""


class BfceError(Exception):
    """Base class for all package errors."""


class InvalidParameters(BfceError, ValueError):
    pass


class FilterNotEmpty(BfceError):
    pass


class MalformedInput(BfceError, ValueError):
    pass


class OutOfRange(BfceError, ValueError):
    """Exact FPP requested beyond the sizes it can be evaluated at; use the approximate form."""


class DegenerateFpp(BfceError, ArithmeticError):
    """False-positive probability is (numerically) 1: the filter is saturated."""


class SaturatedFilter(BfceError, ArithmeticError):
    """Every bit is set, so fill-ratio estimators are unbounded."""


class StreamExhausted(BfceError):
    pass
