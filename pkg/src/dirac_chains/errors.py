"""Exception types raised across the package."""


class DiracChainsError(Exception):
    """Base class for all package errors."""


class DimensionError(DiracChainsError, ValueError):
    """Ambient dimensions of two operands disagree."""


class GradeError(DiracChainsError, ValueError):
    """Grades (or form degrees) of two operands are incompatible."""


class DegenerateGradeError(GradeError):
    """A product would land in a grade above the ambient dimension.

    Every such multivector is zero; callers working at the chain level
    usually want the empty degenerate chain instead of this exception.
    """


class SimplicityError(DiracChainsError, ValueError):
    """An operation that needs a simple multivector received a non-simple one."""


class DomainError(DiracChainsError, ValueError):
    """A point lies outside the domain an object is defined on."""


class ImageEscapeError(DomainError):
    """A map sends a point outside its declared codomain."""


class InfeasibleError(DiracChainsError):
    """A chain cannot be represented by the allowed generators."""


class LPError(DiracChainsError):
    """The simplex solver failed (unbounded, iteration cap, ...)."""


class DegenerateCellError(DiracChainsError, ValueError):
    """Edge vectors of an affine cell are linearly dependent."""


class NotACycleError(DiracChainsError):
    """A chain expected to be a cycle pairs nontrivially with its boundary."""

    def __init__(self, message, form=None, residual=None):
        super().__init__(message)
        self.form = form
        self.residual = residual


class NotClosedError(DiracChainsError):
    """A form expected to be closed has a nonzero exterior derivative."""


class HomotopyError(DiracChainsError, ValueError):
    """Homotopy inputs violate the preconditions of a homotopy operation."""


class BasisSpanError(DiracChainsError):
    """A chain or operator image leaves the span of a finite chain basis."""

    def __init__(self, message, escaping=()):
        super().__init__(message)
        self.escaping = list(escaping)


class ComplexError(DiracChainsError):
    """Boundary matrices do not compose to zero."""


class UnsupportedExpressionError(DiracChainsError, ValueError):
    """An expression uses an atom outside the supported language."""
