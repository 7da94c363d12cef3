"""Diagnostics and the exception hierarchy shared by every hkl module."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    subject: str | None = None
    severity: str = "error"
    file: str | None = None
    line: int | None = None
    col: int | None = None

    @property
    def is_error(self) -> bool:
        return self.severity == "error"

    def at(self, file=None, line=None, col=None) -> "Diagnostic":
        """Return a copy carrying a source position."""
        return Diagnostic(self.code, self.message, self.subject, self.severity,
                          file, line, col)

    def __str__(self) -> str:
        where = ""
        if self.file is not None or self.line is not None:
            where = f"{self.file or '<input>'}:{self.line or 0}:{self.col or 0}: "
        return f"{where}{self.severity}[{self.code}]: {self.message}"


class HklError(Exception):
    """Base class for all engine errors."""


class UnboundVariable(HklError):
    pass


class SortMismatch(HklError):
    pass


class UnknownSymbol(HklError):
    pass


class SignatureMismatch(HklError):
    pass


class InvalidStructure(HklError):
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(d.message for d in self.diagnostics))


class InvalidSchema(HklError):
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(d.message for d in self.diagnostics))


class NotEnabled(HklError):
    pass


class BoundExceeded(HklError):
    pass


class CapExceeded(HklError):
    pass


class KindMismatch(HklError):
    def __init__(self, message, labels=()):
        self.labels = tuple(labels)
        super().__init__(message)


class DuplicateLabel(HklError):
    def __init__(self, message, labels=()):
        self.labels = tuple(labels)
        super().__init__(message)


class RenamingCollision(HklError):
    pass


class InteriorMismatch(HklError):
    """Operands of a composition carry interiors that cannot be united."""


class FusionConflict(HklError):
    """Two fused nodes disagree on their attributes."""


class CycleIntroduced(HklError):
    pass


class OccurrenceNetViolation(HklError):
    pass


class UnknownToken(HklError):
    pass


class DimensionMismatch(HklError):
    pass


class FormatError(HklError):
    """Malformed or unsupported serialized input."""
