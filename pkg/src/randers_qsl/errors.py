"""Exception types shared across the package."""


class QslError(Exception):
    """Base class for all package errors."""


class SchemaError(QslError, ValueError):
    """Input JSON does not match a documented format."""


class ValidationError(QslError, ValueError):
    """Input parsed but violates a physical or mathematical precondition.

    ``violations`` holds the named violations (see
    :class:`randers_qsl.hamiltonians.Violation`) when they are available.
    """

    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)


class SingularFormError(QslError, ValueError):
    """The specialised SU(N) norm formula is singular for this generator.

    Raised when Tr(A H0) vanishes; the general navigation norm is regular there
    and should be used instead.
    """
