"""Exception hierarchy.

Every error carries a ``kind`` string that the CLI reports verbatim in its
structured stderr diagnostics.
"""


class QDistError(Exception):
    kind = "QDistError"
    exit_code = 2


class ValidationError(QDistError, ValueError):
    kind = "ValidationError"


class OutOfDomain(ValidationError):
    kind = "OutOfDomain"


class DomainMismatch(ValidationError):
    kind = "DomainMismatch"


class IndexTooLarge(ValidationError):
    kind = "IndexTooLarge"


class InvalidState(ValidationError):
    kind = "InvalidState"


class DimensionMismatch(ValidationError):
    kind = "DimensionMismatch"


class SupportViolation(ValidationError):
    kind = "SupportViolation"


class PropagatorCaustic(ValidationError):
    kind = "PropagatorCaustic"


class NumericalError(QDistError, ArithmeticError):
    kind = "NumericalError"
    exit_code = 3


class NonConvergent(NumericalError):
    kind = "NonConvergent"


class QuadratureFailure(NumericalError):
    kind = "QuadratureFailure"


class DegenerateState(NumericalError):
    kind = "DegenerateState"


class SingularMetric(NumericalError):
    kind = "SingularMetric"


class BlowUp(NumericalError):
    kind = "BlowUp"


class NoConvergence(NumericalError):
    """Shooting failed; ``miss`` holds the best endpoint error reached."""

    kind = "NoConvergence"

    def __init__(self, message, miss=float("nan")):
        super().__init__(message)
        self.miss = miss


class NonFiniteZ(NumericalError):
    kind = "NonFiniteZ"
