"""Typed exceptions shared across the package.

Every error the library raises deliberately derives from SchemexError so
callers (CLI, service) can map failures to exit codes / HTTP statuses
without string matching.
"""
from __future__ import annotations


class SchemexError(Exception):
    """Base class for all schemex errors."""


# --- field DSL / schema parsing ---

class DslError(SchemexError):
    """A field DSL string could not be parsed."""


class EmptyName(DslError):
    pass


class InvalidName(DslError):
    """Field name contains a character the grammar reserves."""


class UnknownTypeToken(DslError):
    """A segment before the type/choice slots is neither str/list nor a choice list."""


class MalformedChoices(DslError):
    """Choice list with fewer than two distinct non-empty options."""


class ParseError(SchemexError):
    """Schema JSON document is malformed."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        super().__init__(message)
        self.line = line
        self.column = column


class SchemaInvalid(SchemexError):
    """Schema violates its invariants; carries the violation records."""

    def __init__(self, violations):
        self.violations = list(violations)
        details = "; ".join(f"{v.path or '<schema>'}: {v.message}" for v in self.violations)
        super().__init__(f"invalid schema: {details}")


# --- prompt compilation ---

class EmptyLabel(SchemexError):
    """An entity type, field or class label produced no prompt tokens."""


class ContextOverflow(SchemexError):
    """Assembled prompt + text exceeds the allowed sequence length."""

    def __init__(self, needed: int, max_len: int):
        super().__init__(f"sequence needs {needed} tokens but the limit is {max_len}")
        self.needed = needed
        self.max_len = max_len


# --- encoder / model files ---

class SequenceTooLong(SchemexError):
    pass


class ModelFileError(SchemexError):
    """Base class for model (de)serialization failures."""


class BadMagic(ModelFileError):
    pass


class VersionMismatch(ModelFileError):
    pass


class ShapeMismatch(ModelFileError):
    pass


class TruncatedFile(ModelFileError):
    pass


# --- heads ---

class CountOutOfRange(SchemexError):
    """Requested more structure occurrences than the model supports."""


# --- metrics ---

class LengthMismatch(SchemexError):
    pass
