"""Exception hierarchy, aligned with the CLI exit-code contract."""


class ElladicError(Exception):
    """Base class for this package's errors."""


class RingConstructionError(ElladicError):
    """Defining data of a local ring is inconsistent (bad (e, f) split etc.)."""


class PrecisionError(ElladicError):
    """A computation cannot be certified at the available precision."""


class CertificateError(ElladicError):
    """An internal verification failed; indicates a bug or corrupted data."""


class ComputationError(ElladicError):
    """A pipeline computation failed on valid input (exit code 4)."""


class NotComputedError(ElladicError):
    """Requested data exists in no store record yet (exit code 3)."""


class StoreCorruptionError(ElladicError):
    """Store invariants violated on disk (exit code 5)."""


class FormatError(ElladicError):
    """A record or input file does not match its grammar."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line
