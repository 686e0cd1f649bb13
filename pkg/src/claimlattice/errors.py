"""Exception hierarchy.

Everything raised for bad input derives from ``ValidationError`` so the CLI
can map it to a single exit status.
"""

from __future__ import annotations


class ClaimLatticeError(Exception):
    """Root of all package errors."""


class ValidationError(ClaimLatticeError):
    """Input failed validation."""


class OutOfRange(ValidationError):
    pass


class ParseError(ValidationError):
    pass


class EmptyInput(ValidationError):
    pass


class SchemaError(ValidationError):
    pass


class DanglingDep(ValidationError):
    def __init__(self, node: str, dep: str) -> None:
        super().__init__(f"node {node!r} depends on unknown id {dep!r}")
        self.node = node
        self.dep = dep


class DuplicateId(ValidationError):
    def __init__(self, ident: str, where: str = "nodes") -> None:
        super().__init__(f"duplicate id {ident!r} in {where}")
        self.ident = ident


class CycleError(ValidationError):
    def __init__(self, cycle: list[str]) -> None:
        super().__init__("dependency cycle: " + " -> ".join(cycle))
        self.cycle = cycle


class NonPositiveWeight(ValidationError):
    pass


class MissingNode(ValidationError):
    def __init__(self, node: str) -> None:
        super().__init__(f"no score for node {node!r}")
        self.node = node


class UnknownNode(ValidationError):
    def __init__(self, node: str) -> None:
        super().__init__(f"unknown node {node!r}")
        self.node = node


class IncompleteScores(ValidationError):
    def __init__(self, missing: list[str]) -> None:
        super().__init__("scores missing for: " + ", ".join(missing))
        self.missing = missing


class IncompleteEff(ValidationError):
    def __init__(self, missing: list[str]) -> None:
        super().__init__("effective scores missing for: " + ", ".join(missing))
        self.missing = missing


class UnknownTerm(ValidationError):
    pass


class MissingInterpretation(ValidationError):
    def __init__(self, patent: str, term: str) -> None:
        super().__init__(f"{patent} has no interpretation for term {term!r}")
        self.patent = patent
        self.term = term


class MissingScope(ValidationError):
    pass


class MissingProjection(ValidationError):
    pass


class MissingFwr(ValidationError):
    pass


class InvalidParams(ValidationError):
    pass


class IterationOverflow(ClaimLatticeError):
    """Fixed-point iteration ran past its proven bound."""


class BudgetExceeded(ClaimLatticeError):
    """A brute-force oracle was asked to enumerate too much."""


class InvalidHistory(ValidationError):
    """Prosecution history violates its own constraints."""
