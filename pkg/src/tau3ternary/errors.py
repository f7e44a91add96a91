"""Error classes raised by the toolkit.

Every class derives from ``Tau3Error`` and carries a distinct CLI exit code.
"""


class Tau3Error(ValueError):
    exit_code = 10


class LimitTooLargeError(Tau3Error):
    """Requested sieve limit exceeds the memory budget."""

    exit_code = 11


class NotInvertibleError(Tau3Error):
    """Residue has no inverse modulo q."""

    exit_code = 12


class EvenModulusError(Tau3Error):
    """An odd modulus was required."""

    exit_code = 13


class PreconditionError(Tau3Error):
    """Arguments violate a documented precondition."""

    exit_code = 14


class NonConvergenceError(Tau3Error):
    """A quadrature or contour integral missed its tolerance."""

    exit_code = 15


class DegenerateFitError(Tau3Error):
    """A regression had nothing finite to fit."""

    exit_code = 16


class RegimeError(Tau3Error):
    """An asymptotic expansion was called outside its regime."""

    exit_code = 17


class UnsupportedOrderError(Tau3Error):
    """Expansion order with no known coefficients."""

    exit_code = 18


class TablesTooSmallError(Tau3Error):
    """Divisor tables do not reach the required limit."""

    exit_code = 19


EXIT_CODES = {
    0: "success: all in-command checks passed",
    1: "check failure: a computed assertion did not hold",
    2: "usage error: bad flags or arguments",
    3: "io failure: report or cache could not be written or read",
    Tau3Error.exit_code: "unclassified computation error",
    LimitTooLargeError.exit_code: "sieve limit exceeds memory budget",
    NotInvertibleError.exit_code: "residue not invertible",
    EvenModulusError.exit_code: "odd modulus required",
    PreconditionError.exit_code: "precondition violated",
    NonConvergenceError.exit_code: "numerical nonconvergence",
    DegenerateFitError.exit_code: "degenerate fit",
    RegimeError.exit_code: "asymptotic regime violated",
    UnsupportedOrderError.exit_code: "unsupported expansion order",
    TablesTooSmallError.exit_code: "divisor tables too small",
}
