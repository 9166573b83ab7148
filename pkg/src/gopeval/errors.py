"""Exception hierarchy for the scoring engine.

Three families matter to callers: usage/configuration mistakes (bad method
names, invalid temperatures), data validation failures (malformed files,
broken invariants), and OS-level I/O problems (plain OSError, not wrapped).
The CLI maps them to exit codes 1, 2 and 3 respectively.
"""


class GopError(Exception):
    """Base class for all engine errors."""


class UsageError(GopError):
    """Invalid command-line usage or unknown method name."""


class ConfigError(GopError):
    """Invalid method/run configuration (e.g. temperature <= 0)."""


class DataError(GopError):
    """Input data violates a documented invariant."""


class UnknownLabelError(DataError):
    """A phone label is not present in the inventory."""


class FormatError(DataError):
    """A file's content is malformed; message carries position info."""

    def __init__(self, message, *, path=None, line=None, offset=None):
        parts = []
        if path is not None:
            parts.append(str(path))
        if line is not None:
            parts.append(f"line {line}")
        if offset is not None:
            parts.append(f"byte {offset}")
        prefix = ": ".join(parts)
        super().__init__(f"{prefix}: {message}" if prefix else message)
        self.path = path
        self.line = line
        self.offset = offset


class BadMagicError(FormatError):
    """Binary file does not start with the expected magic bytes."""


class TruncatedFileError(FormatError):
    """Binary file ends before the header-declared payload."""


class WidthMismatchError(FormatError):
    """Logit matrix width disagrees with the inventory size."""


class NonFiniteValueError(FormatError):
    """NaN or infinity found where finite values are required."""


class UndefinedCorrelationError(DataError):
    """Kendall tau denominator is zero (one variable entirely tied)."""


class MissingLabelError(DataError):
    """A scored utterance has no severity label."""


class UnscorableUtteranceError(DataError):
    """An utterance produced no scorable (non-skip) segments."""
