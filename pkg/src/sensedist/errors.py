"""Exception hierarchy shared across the toolkit.

The CLI maps these onto exit codes: ConfigError -> 2, DataError and its
subclasses -> 3, anything else -> 4.
"""


class SensedistError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(SensedistError):
    """Invalid or missing run configuration."""


class DataError(SensedistError):
    """Problem with an input corpus, split, or prediction file."""


class SchemaError(DataError):
    """A delimited input file is missing required columns."""


class RowParseError(DataError):
    """A single corpus row could not be parsed; carries the row id."""

    def __init__(self, row_id: str, message: str):
        super().__init__(f"row {row_id!r}: {message}")
        self.row_id = row_id


class LabelSpaceError(DataError):
    """A sense name is not a member of the expected label space."""


class DegenerateInstanceError(DataError):
    """Label-space adaptation removed all annotation mass from an instance."""


class NumericError(SensedistError):
    """Non-finite values where finite numerics are required."""


class EncoderProviderError(SensedistError):
    """The requested encoder backend could not be loaded."""


class LockError(SensedistError):
    """Another process holds the run directory's writer lock."""


class ManifestError(DataError):
    """A run manifest is missing, malformed, or fails hash verification."""
