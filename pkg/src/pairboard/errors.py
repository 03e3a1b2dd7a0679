"""Exception hierarchy shared across the package.

Every error carries a machine-readable ``code`` so the HTTP layer and the
CLI can map failures without string matching.
"""

from __future__ import annotations


class PairboardError(Exception):
    """Base class for all domain errors."""

    code = "error"

    def __init__(self, message: str, *, details: dict | None = None):
        super().__init__(message)
        self.details = details or {}

    @property
    def message(self) -> str:
        return str(self)


class ValidationFailure(PairboardError):
    """A record or document violates a declared invariant."""

    code = "validation"


class UnknownReferenceError(ValidationFailure):
    code = "unknown_reference"


class SelfComparisonError(ValidationFailure):
    code = "self_comparison"


class GenderMismatchError(ValidationFailure):
    code = "gender_mismatch"


class UnsupportedLanguageError(ValidationFailure):
    code = "unsupported_language"


class IncompleteAxesError(ValidationFailure):
    code = "incomplete_axes"


class TimestampOrderError(ValidationFailure):
    code = "timestamp_order"


class ManifestError(PairboardError):
    code = "manifest_error"


class LogParseError(PairboardError):
    """A preference-log line failed to parse or validate.

    ``line_no`` is 1-based; ``field`` names the offending field when known.
    """

    code = "log_parse"

    def __init__(self, message: str, *, line_no: int, field: str | None = None):
        super().__init__(message, details={"line_no": line_no, "field": field})
        self.line_no = line_no
        self.field = field


class DuplicateIdError(PairboardError):
    code = "duplicate_id"


class EmptyFilterError(PairboardError):
    code = "empty_filtered_log"


class NonIdentifiableError(PairboardError):
    """The BT maximum-likelihood estimate does not exist for these counts."""

    code = "non_identifiable"


class ConvergenceError(PairboardError):
    code = "not_converged"


class DegenerateBootstrapError(PairboardError):
    code = "degenerate_bootstrap"


class SchedulingError(PairboardError):
    code = "scheduling"


class OutOfOrderStageError(SchedulingError):
    code = "out_of_order_stage"


class RaterNotActiveError(SchedulingError):
    code = "rater_not_active"


class NoAdmissiblePairError(SchedulingError):
    code = "no_admissible_pair"


class UnknownTaskError(SchedulingError):
    code = "unknown_id"


class AlreadyLockedError(SchedulingError):
    """Conflicting resubmission of a permanently locked phase-1 choice."""

    code = "already_locked"


class NotLockedError(SchedulingError):
    code = "not_locked"


class IncompleteListeningError(SchedulingError):
    code = "incomplete_listening"


class TaskExpiredError(SchedulingError):
    code = "task_expired"


class BadTokenError(PairboardError):
    code = "bad_token"


class SingleClassError(PairboardError):
    code = "single_class"


class LanguageLeakageError(PairboardError):
    code = "language_leakage"


class UndefinedCorrelationError(PairboardError):
    code = "undefined_correlation"
