"""Exception hierarchy shared by every algorithm module."""

from typing import Any, Optional


class DsplitError(Exception):
    """Base class for all library errors."""


class ParameterError(DsplitError, ValueError):
    """Infeasible or out-of-range parameters."""


class PreconditionError(ParameterError):
    """An operation's precondition does not hold for the given input."""


class IncompleteAssignmentError(DsplitError):
    def __init__(self, message: str, missing: Optional[list[int]] = None):
        super().__init__(message)
        self.missing = missing or []


class RoundLimitExceeded(DsplitError):
    def __init__(self, message: str, partial_states: Any = None, metrics: Any = None):
        super().__init__(message)
        self.partial_states = partial_states
        self.metrics = metrics


class BudgetExceeded(DsplitError):
    """Enumeration or oracle size caps were exceeded."""


class IterationCapExceeded(DsplitError):
    def __init__(self, message: str, residual_sources: int = 0):
        super().__init__(message)
        self.residual_sources = residual_sources


class InvariantViolation(DsplitError):
    def __init__(self, message: str, witness: Any = None):
        super().__init__(message)
        self.witness = witness


class ContractViolation(InvariantViolation):
    def __init__(self, message: str, node: int):
        super().__init__(message, witness=node)
        self.node = node


class StalePathError(DsplitError):
    """The augmenting path no longer satisfies its invariants."""


class BadComponentTooLarge(DsplitError):
    def __init__(self, message: str, component: list[int]):
        super().__init__(message)
        self.component = component
