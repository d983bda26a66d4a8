"""Exception taxonomy shared across the package.

Three broad classes, matching the command-line exit codes: bad input (2),
violated data invariants (3) and time-stepping instability (4).
"""


class QuasidistError(Exception):
    """Base class for all package errors."""


class InputError(QuasidistError):
    """Malformed or inconsistent input: arguments, config, grids, text."""


class ParseError(InputError):
    """Syntax error in operator or Hamiltonian text.

    Carries the zero-based ``position`` of the offending character in the
    source string.
    """

    def __init__(self, message, position):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class InvariantError(QuasidistError):
    """A required property of the data failed validation.

    Raised for broken normalization, hermiticity, positivity of weights,
    domain truncation, aliasing and similar checks.
    """


class StabilityError(QuasidistError):
    """Time integration rejected: dt beyond the stability bound, or the
    field norm grew past the runaway threshold during stepping."""
