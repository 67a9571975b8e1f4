"""Exception hierarchy for vatsim.

Every error raised by the library derives from :class:`VatsimError` so
callers (the CLI in particular) can map families of failures to exit codes.
"""

from __future__ import annotations


class VatsimError(Exception):
    """Base class for all library errors."""


class ValidationError(VatsimError):
    """Input data or configuration failed validation."""


class UnknownItemCode(ValidationError):
    def __init__(self, code: str, where: str = ""):
        self.code = code
        msg = f"unknown item code {code!r}"
        super().__init__(f"{msg} ({where})" if where else msg)


class MalformedRow(ValidationError):
    def __init__(self, path: str, line: int, reason: str):
        self.path = path
        self.line = line
        self.reason = reason
        super().__init__(f"{path}:{line}: {reason}")


class OrphanExpenditure(ValidationError):
    def __init__(self, household_id: int, line: int | None = None):
        self.household_id = household_id
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"expenditure for absent household {household_id}{where}")


class DuplicateHousehold(ValidationError):
    def __init__(self, household_id: int):
        self.household_id = household_id
        super().__init__(f"duplicate household id {household_id}")


class InvalidParams(ValidationError):
    pass


class ConfigError(ValidationError):
    """Scenario or manifest file is structurally invalid."""


class DomainError(VatsimError, ValueError):
    """Argument outside the mathematical domain of a function."""


class EmptySet(VatsimError):
    pass


class NonPositiveLine(DomainError):
    pass


class NonPositiveMean(DomainError):
    pass


class UnassignedItem(ValidationError):
    def __init__(self, code: str):
        self.code = code
        super().__init__(f"item {code!r} is not assigned to any rate class")


class MultiplyAssignedItem(ValidationError):
    def __init__(self, code: str, classes: list[str]):
        self.code = code
        self.classes = classes
        super().__init__(f"item {code!r} matched by several classes: {', '.join(classes)}")


class InactiveTransfer(VatsimError):
    pass


class SolverError(VatsimError):
    pass


class BracketError(SolverError):
    pass


class NoProgress(SolverError):
    pass
