"""Exception hierarchy shared by all sasm modules."""

from __future__ import annotations


class SandpileError(Exception):
    """Base class for every error raised by sasm."""


class InvalidInput(SandpileError):
    """The caller supplied data that violates a documented precondition."""


class ParseError(InvalidInput):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{where}")


class SchemaError(InvalidInput):
    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class UnknownSite(InvalidInput):
    pass


class ToppleAtStableSite(InvalidInput):
    pass


class InvalidRuleIndex(InvalidInput):
    pass


class NotStable(InvalidInput):
    pass


class InvalidDimensions(InvalidInput):
    pass


class InvalidCount(InvalidInput):
    pass


class NotIrreducibleInput(InvalidInput):
    pass


class NotMinimalIrreducible(InvalidInput):
    pass


class RegionsDisagreeOnIntersection(InvalidInput):
    pass


class GlueSiteNotShared(InvalidInput):
    pass


class GlueSiteNotIsolated(InvalidInput):
    pass


class BudgetError(SandpileError):
    """A search bound was hit before the answer was known."""


class StepBudgetExhausted(BudgetError):
    def __init__(self, message: str, trail=()):
        self.trail = tuple(trail)
        super().__init__(message)


class ParticleCapExceeded(BudgetError):
    pass


class StateCapExceeded(BudgetError):
    pass


class BudgetExceeded(BudgetError):
    pass


class PotentialNonTermination(BudgetError):
    pass
