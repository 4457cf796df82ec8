"""Exception types raised across the toolkit.

Every error carries a stable ``code`` (the class name) so the CLI can emit a
machine-readable summary.
"""

from __future__ import annotations


class AuditError(Exception):
    """Base class for all toolkit errors."""

    @property
    def code(self) -> str:
        return type(self).__name__


class MissingFile(AuditError):
    pass


class ParseError(AuditError):
    def __init__(self, message: str, row: int | None = None):
        self.row = row
        super().__init__(message if row is None else f"row {row}: {message}")


class DuplicateId(AuditError):
    def __init__(self, sample_id: str):
        self.sample_id = sample_id
        super().__init__(f"duplicate sample_id {sample_id!r}")


class DuplicatePair(AuditError):
    def __init__(self, model_id: str, sample_id: str):
        self.model_id, self.sample_id = model_id, sample_id
        super().__init__(f"duplicate prediction for ({model_id!r}, {sample_id!r})")


class WrongArity(AuditError):
    pass


class UnknownSample(AuditError):
    pass


class DecodeError(AuditError):
    pass


class UnsupportedFormat(AuditError):
    pass


class EmptyJoin(AuditError):
    pass


class MissingModel(AuditError):
    pass


class TooSmall(AuditError):
    pass


class DegenerateGeometry(AuditError):
    pass


class DegenerateBox(AuditError):
    pass


class WriteError(AuditError):
    pass


class NoPredictions(AuditError):
    pass


class EmptyClass(AuditError):
    pass


class DegenerateBaseline(AuditError):
    pass


class EmptySelection(AuditError):
    pass


class TooFewSamples(AuditError):
    pass


class TooManyFeatures(AuditError):
    pass


class EmptyBackground(AuditError):
    pass


class UnknownFeature(AuditError):
    pass


class MissingTier(AuditError):
    pass


class ConstantPool(AuditError):
    pass


class MissingUpstream(AuditError):
    pass


class ConfigError(AuditError):
    pass
