"""Exception hierarchy shared across the toolkit.

Checkers that report verdicts (typing violations, consistency findings,
refinement witnesses) return data; exceptions are reserved for contract
violations and resource guards.
"""

from __future__ import annotations


class FksError(Exception):
    """Base class for all toolkit errors."""


class InvalidModel(FksError):
    """A semantic object violates one of its structural invariants."""


class IndexBeyondHorizon(FksError, IndexError):
    """A prefix length exceeds the stream's horizon."""

    def __init__(self, index: int, horizon: int):
        super().__init__(f"prefix length {index} exceeds horizon {horizon}")
        self.index = index
        self.horizon = horizon


class ExplosionGuard(FksError):
    """An enumeration exceeded its configured node budget."""

    def __init__(self, budget: int, count: int, what: str = "run tree"):
        super().__init__(f"{what} exceeded budget: {count} > {budget} nodes")
        self.budget = budget
        self.count = count


class StuckState(FksError):
    """Strict policy: buffered input but no enabled transition."""


class EvalError(FksError):
    """A guard, emission, or update expression failed at run time."""


class ExprTypeError(FksError):
    """An expression failed static type checking in a context that requires it."""


class PredicateTypeError(ExprTypeError):
    """An assumption/commitment predicate does not type-check against its channel."""


class CyclicHierarchy(FksError):
    """A network decomposition refers back to one of its ancestors."""


class DanglingPort(FksError):
    """Strict wiring mode: an internal port is not connected."""


class InterfaceMismatch(FksError):
    """Two specifications do not have the interfaces a refinement check requires."""


class NondeterministicTranslator(FksError):
    """An interface-refinement translator produced more than one behavior."""


class UnknownRuleCode(FksError):
    """A consistency rule selection names a rule that does not exist."""


class IllformedDocument(FksError):
    """A document violates invariants required for printing."""


class UnknownNetwork(FksError):
    """Session creation named a network the corpus does not define."""


class SessionClosed(FksError):
    """An operation was attempted on a closed simulation session."""
