"""Exception hierarchy.

Validation errors map to CLI exit status 2, numerical failures to 3.
"""


class PluripotError(Exception):
    """Base class for all library errors."""


class ValidationError(PluripotError, ValueError):
    """Bad input: schema, parameters, shapes, preconditions."""


class NumericalError(PluripotError, ArithmeticError):
    """A computation could not be carried out (degeneracy, overflow)."""


class InvalidParameterError(ValidationError):
    pass


class MissingFacetsError(ValidationError):
    pass


class DegenerateBodyError(ValidationError):
    pass


class DimensionMismatchError(ValidationError):
    pass


class InsufficientPointsError(ValidationError):
    pass


class MissingWeightError(ValidationError):
    pass


class MaskMismatchError(ValidationError):
    pass


class SlopeMismatchError(ValidationError):
    pass


class UnknownCaseError(ValidationError):
    pass


class DegenerateGramError(NumericalError):
    pass


class AllSingularError(NumericalError):
    pass


class NonFiniteError(NumericalError):
    pass
