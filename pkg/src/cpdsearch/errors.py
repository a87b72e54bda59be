"""Exception types shared across the package."""


class CpdSearchError(ValueError):
    """Base class for all package errors."""


class FieldError(CpdSearchError):
    """Modulus is not a prime in the supported range."""


class ShapeError(CpdSearchError):
    """Operands have incompatible shapes or fields."""


class SingularMatrixError(CpdSearchError):
    """Matrix inversion requested for a singular or non-square matrix."""


class InfeasibleInnerDimError(CpdSearchError):
    """Requested factorization inner dimension is below the rank."""


class NotACpdError(CpdSearchError):
    """A claimed CPD does not evaluate to the expected tensor."""


class SearchInputError(CpdSearchError):
    """Search called on input that violates its preconditions."""


class BudgetExceededError(CpdSearchError):
    """Brute-force oracle ran past its candidate budget."""
