"""Exception hierarchy shared across the package."""

from __future__ import annotations


class EngineError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(EngineError):
    """A file could not be parsed; carries the path and 1-based line number."""

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        self.message = message
        where = ""
        if path is not None:
            where = f" [{path}" + (f":{line}" if line is not None else "") + "]"
        super().__init__(message + where)


class ValidationError(EngineError):
    """An invariant violation; `field` names the offending field."""

    def __init__(self, message: str, field: str | None = None):
        self.field = field
        self.message = message
        super().__init__(f"{field}: {message}" if field else message)


class MissingReferenceError(ValidationError):
    """An equipment_id (or similar key) does not resolve to a known region."""


class DomainError(EngineError):
    """An argument is outside the mathematical domain of an operation."""


class ConfigError(EngineError):
    """Bad configuration; `field` is the dotted path of the offending entry."""

    def __init__(self, message: str, field: str | None = None):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)


class EmptyGridError(EngineError):
    """Calibration was asked to search an empty parameter grid."""


class NoAnnotationsError(EngineError):
    """Calibration requires expert annotations and none were supplied."""


class NoGroundTruthError(EngineError):
    """A ground-truth-relative metric was requested with empty ground truth."""


class EmptyInputError(EngineError):
    """An aggregate over an empty sequence is undefined."""


class TaxonomyError(EngineError):
    """The assessment taxonomy is malformed (bad tree or metric mapping)."""


class SynthSpecError(ValidationError):
    """A synthetic-session spec violates its invariants."""
