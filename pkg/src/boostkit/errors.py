"""Exception types shared across the package.

The CLI maps these onto process exit codes: usage errors exit 1, data
errors exit 2, internal invariant violations exit 3.
"""


class BoostkitError(Exception):
    """Base class for all package errors."""

    exit_code = 3


class UsageError(BoostkitError):
    """Bad flags, flag combinations, or configuration values."""

    exit_code = 1


class DataError(BoostkitError):
    """Malformed input files, invalid values, or incompatible shapes."""

    exit_code = 2


class InvariantError(BoostkitError):
    """An internal consistency check failed; indicates a bug."""

    exit_code = 3
