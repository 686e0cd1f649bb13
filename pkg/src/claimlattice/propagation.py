"""Score propagation over a validated claim DAG.

Two semantics are offered. The threshold model zeroes a node whenever some
dependency falls below theta. The meet model takes the weakest score over a
node and everything it transitively depends on. Coverage and certificates
use the threshold model.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .claim_graph import ClaimDag, topo_order
from .errors import IncompleteScores, IterationOverflow, OutOfRange
from .lattice import BOTTOM, BasisPoints, meet

Scores = Mapping[str, int]


@dataclass(frozen=True)
class EffTable:
    eff: dict[str, BasisPoints]
    theta: BasisPoints

    def __getitem__(self, node_id: str) -> BasisPoints:
        return self.eff[node_id]


@dataclass(frozen=True)
class FixpointResult:
    eff: EffTable
    iterations: int


def _beta(scores: object) -> Scores:
    return getattr(scores, "scores", scores)  # accept ScoreTable or plain map


def _check_complete(dag: ClaimDag, beta: Scores) -> None:
    missing = [nid for nid in dag.ids if nid not in beta]
    if missing:
        raise IncompleteScores(missing)


def _check_theta(theta: int) -> BasisPoints:
    t = BasisPoints(theta)
    if t == 0:
        raise OutOfRange("theta must be positive")
    return t


def deps_met(dag: ClaimDag, eff: Mapping[str, int], node_id: str, theta: int) -> bool:
    return all(eff[d] >= theta for d in dag.node(node_id).deps)


def compute_eff(dag: ClaimDag, scores: object, theta: int) -> EffTable:
    """One topological pass of the threshold model."""
    beta = _beta(scores)
    _check_complete(dag, beta)
    t = _check_theta(theta)
    order, _ = topo_order(dag)
    eff: dict[str, BasisPoints] = {}
    for nid in order:
        eff[nid] = BasisPoints(beta[nid]) if deps_met(dag, eff, nid, t) else BOTTOM
    return EffTable({nid: eff[nid] for nid in dag.ids}, t)


def claim_strength(dag: ClaimDag, scores: object) -> dict[str, BasisPoints]:
    """Meet of a node's own score with the strengths of its dependencies."""
    beta = _beta(scores)
    _check_complete(dag, beta)
    order, _ = topo_order(dag)
    strength: dict[str, BasisPoints] = {}
    for nid in order:
        s = BasisPoints(beta[nid])
        for d in dag.node(nid).deps:
            s = meet(s, strength[d])
        strength[nid] = s
    return {nid: strength[nid] for nid in dag.ids}


def propagate_once(dag: ClaimDag, beta: Scores, prev: Mapping[str, int], theta: int) -> dict[str, BasisPoints]:
    """The propagation function: every node reads the previous table only."""
    return {
        nid: BasisPoints(beta[nid]) if deps_met(dag, prev, nid, theta) else BOTTOM
        for nid in dag.ids
    }


def kleene_fixpoint(dag: ClaimDag, scores: object, theta: int) -> FixpointResult:
    """Iterate from bottom until two consecutive tables agree.

    The reported count includes the final pass that detects stability, so it
    is at most ``height + 2``.
    """
    beta = _beta(scores)
    _check_complete(dag, beta)
    t = _check_theta(theta)
    limit = len(dag) + 2
    current: dict[str, BasisPoints] = {nid: BOTTOM for nid in dag.ids}
    passes = 0
    while True:
        passes += 1
        if passes > limit:
            raise IterationOverflow(f"no fixed point after {limit} passes")
        nxt = propagate_once(dag, beta, current, t)
        if nxt == current:
            break
        current = nxt
    bound = dag.height + 2
    if passes > bound:
        raise IterationOverflow(f"{passes} passes exceeds height bound {bound}")
    return FixpointResult(EffTable(current, t), passes)
