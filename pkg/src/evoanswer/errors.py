"""Exception hierarchy shared across the pipeline.

The CLI maps these onto exit codes: ConfigError -> 2, everything else -> 1.
"""

from __future__ import annotations


class EvoAnswerError(Exception):
    """Base class for all errors raised by this package."""


class CorpusFormatError(EvoAnswerError):
    """A corpus or query file is malformed. Carries the offending line number."""

    def __init__(self, path: str, line_no: int, reason: str) -> None:
        self.path = path
        self.line_no = line_no
        self.reason = reason
        super().__init__(f"{path}:{line_no}: {reason}")


class DuplicateIdError(EvoAnswerError):
    """Two records in one file share an identifier."""

    def __init__(self, path: str, line_no: int, duplicate_id: str) -> None:
        self.duplicate_id = duplicate_id
        super().__init__(f"{path}:{line_no}: duplicate id {duplicate_id!r}")


class EmptyCorpusError(EvoAnswerError):
    """An index cannot be built over zero documents."""


class BackendError(EvoAnswerError):
    """A rewrite/scoring/verification backend failed.

    ``retryable`` distinguishes transport-level failures (worth retrying)
    from contract violations such as an empty rewrite.
    """

    def __init__(self, message: str, *, retryable: bool = False, status: int | None = None) -> None:
        self.retryable = retryable
        self.status = status
        super().__init__(message)


class IterationStarvationError(EvoAnswerError):
    """Every offspring slot of one iteration failed; the run cannot continue.

    ``partial_trace`` holds the trace accumulated before the failed iteration
    so callers can still persist what happened.
    """

    def __init__(self, message: str, partial_trace=None) -> None:
        self.partial_trace = partial_trace
        super().__init__(message)


class AlignmentError(EvoAnswerError):
    """Evaluation inputs do not line up by query_id."""


class ConfigError(EvoAnswerError):
    """A run configuration is invalid or unusable."""
