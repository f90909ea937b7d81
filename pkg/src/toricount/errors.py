"""Error taxonomy shared by the whole package.

ValidationError covers malformed or mathematically inadmissible input;
BudgetError covers work that would exceed a configured resource guard.
The CLI maps them to exit codes 2 and 3 respectively.
"""


class ToricountError(Exception):
    """Base class for library errors."""


class ValidationError(ToricountError):
    """Input is malformed or violates a documented precondition."""

    exit_code = 2


class MalformedFanError(ValidationError):
    """Fan document cannot be parsed into rays and maximal cones."""


class NonPrimitiveRayError(ValidationError):
    """A ray generator is not a primitive integer vector."""


class SingularConeError(ValidationError):
    """A maximal cone is not unimodular (fan not smooth)."""


class IncompleteFanError(ValidationError):
    """Fan support does not cover the ambient space."""


class TorsionError(ValidationError):
    """Divisor class group has torsion; not a split smooth complete fan."""


class CoprimalityError(ValidationError):
    """Cox coordinates violate the torsor integrality condition."""


class DegenerateInputError(ValidationError):
    """Geometric input is degenerate for the requested operation."""


class BudgetError(ToricountError):
    """Requested computation exceeds a resource guard."""

    exit_code = 3
