"""Brute-force reference implementations for the test suite.

These deliberately share nothing with the production propagation or
coverage code: each works from the raw node list with the most literal
algorithm available and refuses instances larger than its budget.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Sequence

from .claim_graph import ClaimDag
from .errors import BudgetExceeded


@dataclass(frozen=True)
class OracleBudget:
    max_nodes: int = 10
    max_segments: int = 4
    max_enumerations: int = 1_100_000

    def check_nodes(self, n: int) -> None:
        if n > self.max_nodes:
            raise BudgetExceeded(f"{n} nodes exceeds oracle budget of {self.max_nodes}")


DEFAULT_BUDGET = OracleBudget()


def _deps(dag: ClaimDag) -> dict[str, tuple[str, ...]]:
    return {n.id: n.deps for n in dag.nodes}


def _ancestors(deps: Mapping[str, Sequence[str]], v: str) -> set[str]:
    seen: set[str] = set()
    frontier = list(deps[v])
    while frontier:
        u = frontier.pop()
        if u not in seen:
            seen.add(u)
            frontier.extend(deps[u])
    return seen


def oracle_claim_strength(dag: ClaimDag, scores: Mapping[str, int],
                          budget: OracleBudget = DEFAULT_BUDGET) -> dict[str, int]:
    """Minimum score over each node and all of its transitive ancestors."""
    budget.check_nodes(len(dag.nodes))
    beta = getattr(scores, "scores", scores)
    deps = _deps(dag)
    return {v: min(int(beta[u]) for u in _ancestors(deps, v) | {v}) for v in deps}


def oracle_full_coverage_exists(dag: ClaimDag, matrix: Mapping[str, Sequence[int]], theta: int,
                                budget: OracleBudget = DEFAULT_BUDGET) -> bool:
    """Try every assignment of evidence segments to nodes."""
    nodes = [n.id for n in dag.nodes]
    budget.check_nodes(len(nodes))
    m = len(next(iter(matrix.values()))) if matrix else 0
    if m > budget.max_segments:
        raise BudgetExceeded(f"{m} segments exceeds oracle budget of {budget.max_segments}")
    if m ** len(nodes) > budget.max_enumerations:
        raise BudgetExceeded(f"{m}^{len(nodes)} assignments exceeds guard")
    for assignment in itertools.product(range(m), repeat=len(nodes)):
        if all(matrix[v][s] >= theta for v, s in zip(nodes, assignment)):
            return True
    return False


def oracle_kleene(dag: ClaimDag, scores: Mapping[str, int], theta: int,
                  budget: OracleBudget = DEFAULT_BUDGET) -> dict[str, int]:
    """Apply the propagation function to the whole table until it stops changing."""
    budget.check_nodes(len(dag.nodes))
    beta = getattr(scores, "scores", scores)
    deps = _deps(dag)
    table = {v: 0 for v in deps}
    for _ in range(len(deps) + 2):
        nxt = {v: int(beta[v]) if all(table[u] >= theta for u in deps[v]) else 0 for v in deps}
        if nxt == table:
            return table
        table = nxt
    raise BudgetExceeded("naive iteration did not stabilise")
