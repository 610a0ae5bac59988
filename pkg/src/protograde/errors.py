"""Exception taxonomy shared across the package.

The CLI maps these onto exit codes: UsageError -> 1, DataError -> 2,
NumericError -> 3.
"""


class ProtogradeError(Exception):
    """Base class for all errors raised by this package."""


class UsageError(ProtogradeError):
    """Bad command line or malformed configuration keys."""


class DataError(ProtogradeError):
    """Invalid file contents, schema violations, or shape mismatches."""


class NumericError(ProtogradeError):
    """Non-finite values or numerically undefined operations."""
