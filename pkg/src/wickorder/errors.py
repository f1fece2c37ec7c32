"""Exception hierarchy shared by every module of the package."""


class WickError(Exception):
    """Base class for all errors raised by wickorder."""


class DimensionError(WickError, ValueError):
    """Operands live on different generator systems or matrix sizes."""


class UnknownIndeterminateError(WickError, NameError):
    """A substitution binds a name that is not an indeterminate of the operand."""


class SymbolicResidueError(WickError, ValueError):
    """A numeric evaluation met an indeterminate that was never substituted."""


class OrderingUndefinedError(WickError, ValueError):
    """Two non-commuting factors are not comparable under the label order."""


class InvariantError(WickError, ValueError):
    """A structural invariant (weights summing to one, decomposition sum...) failed."""


class SpanError(WickError, ValueError):
    """The operator to decompose lies outside the span of the collection."""


class AmbiguityError(WickError, ValueError):
    """A decomposition was requested to be unique but is not."""


class RestrictionError(WickError, ValueError):
    """Input violates a restriction of the algorithm (e.g. negative coefficients)."""


class SizeError(WickError, ValueError):
    """A configured size bound was exceeded."""


class NumericRangeError(WickError, ArithmeticError):
    """Floating point overflow or non-finite entries in a numeric computation."""


class InternalConsistencyError(WickError, AssertionError):
    """Two independent routes to the same quantity disagree; signals a bug."""


class ParseError(WickError, ValueError):
    """Syntax error in an expression, with 1-based line and column."""

    def __init__(self, message: str, line: int = 1, column: int = 1):
        self.line = line
        self.column = column
        super().__init__(f"{message} (line {line}, column {column})")


class MismatchError(WickError, ValueError):
    """Two orderings disagree on the operator or label set they act on."""


class DomainError(WickError, ValueError):
    """A numeric argument falls outside the region where the result is defined."""


class ConvergenceError(WickError, ArithmeticError):
    """A quadrature or series failed to converge to the requested accuracy."""
