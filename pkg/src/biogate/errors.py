"""Typed errors shared across the gateway.

Every error carries a stable machine-readable ``code`` so API handlers
can surface it without string matching.
"""

from __future__ import annotations


class BiogateError(Exception):
    code = "error"

    def __init__(self, message: str = "", **details):
        super().__init__(message or self.code)
        self.details = details


class InvalidNameError(BiogateError):
    code = "invalid-name"


class DuplicateInstitutionError(BiogateError):
    code = "duplicate-institution"


class ExcludedSubjectError(BiogateError):
    """Subject matched the merged exclusion registry."""

    code = "excluded_subject"

    def __init__(self, message: str = "", entries: tuple[str, ...] = ()):
        super().__init__(message, entries=entries)
        self.entries = entries


class SponsorUnavailableError(BiogateError):
    code = "sponsor-unavailable"


class InvalidVoucherError(BiogateError):
    code = "invalid-voucher"


class VoucherMismatchError(BiogateError):
    code = "voucher-mismatch"


class MissingPurposeError(BiogateError):
    code = "missing-purpose"


class NotFoundError(BiogateError):
    code = "not-found"


class InvalidStateError(BiogateError):
    code = "invalid-state"


class ConflictError(BiogateError):
    code = "conflict"


class ForbiddenError(BiogateError):
    code = "forbidden"


class InvalidDecisionError(BiogateError):
    code = "invalid-decision"


class SequenceParseError(BiogateError):
    code = "parse-error"

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message, line=line)
        self.line = line


class ConfigError(BiogateError):
    code = "config-error"

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}", field=field)
        self.field = field


class TransportError(BiogateError):
    code = "transport-error"
