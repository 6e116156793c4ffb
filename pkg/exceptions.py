"""Custom exception classes for the POD-BSBEM toolkit.

Each class carries the structured context of the failure as attributes and
formats a readable message. ``main.py`` maps every class to an exit code.
"""

from pathlib import Path


class ConfigError(Exception):
    """Raised when a run-configuration entry is missing, unknown or invalid.

    Args:
        field: Dotted name of the offending key (e.g. ``"rom.eps_s"``).
        value: The value found in the configuration, as text.
        reason: Human-readable explanation of why the value is rejected.
    """

    def __init__(self, field: str, value: str, reason: str) -> None:
        self.field = field
        self.value = value
        self.reason = reason
        super().__init__(
            f"Invalid config entry '{field}': '{value}'. {reason}"
        )


class SnapshotFormatError(Exception):
    """Raised when an external snapshot file pair fails validation.

    Covers missing metadata, payload byte-length mismatches and non-finite
    values (the message names the offending node and column).

    Args:
        path: The metadata or payload file being read.
        reason: Human-readable explanation of the failure.
    """

    def __init__(self, path: Path | str, reason: str) -> None:
        self.path = Path(path)
        self.reason = reason
        super().__init__(f"Invalid snapshot set '{self.path}': {reason}")


class SurrogateFormatError(Exception):
    """Raised when a surrogate container cannot be read back.

    Args:
        path: The container metadata file.
        reason: Human-readable explanation (e.g. a version mismatch).
    """

    def __init__(self, path: Path | str, reason: str) -> None:
        self.path = Path(path)
        self.reason = reason
        super().__init__(f"Unreadable surrogate '{self.path}': {reason}")


class NumericalError(Exception):
    """Raised when a computation cannot produce a trustworthy result.

    Examples: POD of an all-zero matrix, a hard-singular global system, an
    under-sampled PCE design, a zero-norm reference column.

    Args:
        stage: The pipeline stage that failed (e.g. ``"pod"``, ``"solve"``).
        reason: Human-readable explanation of the failure.
    """

    def __init__(self, stage: str, reason: str) -> None:
        self.stage = stage
        self.reason = reason
        super().__init__(f"Numerical failure in {stage}: {reason}")
