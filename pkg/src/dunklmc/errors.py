"""Exception hierarchy shared across the package.

The CLI maps these onto process exit codes: configuration problems exit
with 1, mathematical precondition failures with 2, and validation-suite
failures with 3.
"""


class DunklError(Exception):
    """Base class for all package errors."""


class ConfigError(DunklError):
    """Malformed configuration: unknown keys, wrong multiplicity count,
    inconsistent domain parameters, unparsable input."""


class PreconditionError(DunklError):
    """A mathematical precondition is violated (lambda <= 0, point outside
    the domain, non-invariant multiplicities, argument out of range)."""


class CapabilityError(DunklError):
    """Operation not available for the given root-system family (for
    example analytic kernels outside the axis-product / k == 0 case)."""


class SingularityError(DunklError):
    """Evaluation requested on or too close to a reflection hyperplane."""

    def __init__(self, message, root=None):
        super().__init__(message)
        self.root = root


class AccuracyError(DunklError):
    """A series or quadrature failed to reach the requested accuracy.

    ``partial`` carries the best value obtained so far.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class DataError(DunklError):
    """Boundary data or a user-supplied field could not be evaluated."""


class NonTerminationError(DunklError):
    """A path exceeded its step budget (a numerical pathology: exit times
    have finite expectation for every bounded domain)."""


class InternalInvariantError(DunklError):
    """An internal consistency check failed (signals an implementation bug,
    e.g. a polynomial division that should be exact left a remainder)."""


class CheckFailure(DunklError):
    """A named validation check did not pass."""

    def __init__(self, name, message):
        super().__init__(f"{name}: {message}")
        self.name = name
