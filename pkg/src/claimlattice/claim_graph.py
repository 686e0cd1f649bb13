"""Claim DAG model: typed, weighted limitations with dependency edges.

Edges point from a node to the nodes it depends on. Loading validates the
whole structure and caches a deterministic topological order with depths.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Iterable, Mapping

from .errors import (
    CycleError,
    DanglingDep,
    DuplicateId,
    NonPositiveWeight,
    ParseError,
    SchemaError,
)
from .lattice import to_fraction

SCHEMA_VERSION = 1


class NodeType(str, Enum):
    PREAMBLE = "preamble"
    STRUCTURAL = "structural"
    FUNCTIONAL = "functional"
    QUANTITATIVE = "quantitative"
    WHEREIN = "wherein"
    COUPLING = "coupling"
    SIGNAL = "signal"


DEFAULT_WEIGHTS: dict[NodeType, Fraction] = {
    NodeType.WHEREIN: Fraction(3),
    NodeType.QUANTITATIVE: Fraction(2),
    NodeType.FUNCTIONAL: Fraction(3, 2),
    NodeType.COUPLING: Fraction(3, 2),
    NodeType.SIGNAL: Fraction(3, 2),
    NodeType.STRUCTURAL: Fraction(1),
    NodeType.PREAMBLE: Fraction(3, 10),
}


def weight_scheme(overrides: Mapping[Any, Any] | None = None) -> dict[NodeType, Fraction]:
    """Default weights with optional per-type overrides (decimal strings)."""
    scheme = dict(DEFAULT_WEIGHTS)
    for key, raw in (overrides or {}).items():
        try:
            nt = NodeType(key)
        except ValueError as exc:
            raise SchemaError(f"unknown node type in weights: {key!r}") from exc
        if isinstance(raw, Fraction):
            w = raw
        elif isinstance(raw, str):
            try:
                w = to_fraction(raw)
            except ParseError as exc:
                raise SchemaError(f"weight for {key!r} is not a decimal: {raw!r}") from exc
        else:
            raise SchemaError(f"weight for {key!r} must be a decimal string, got {raw!r}")
        if w <= 0:
            raise NonPositiveWeight(f"weight for {key!r} must be positive, got {raw!r}")
        scheme[nt] = w
    return scheme


@dataclass(frozen=True)
class ClaimNode:
    id: str
    text: str
    node_type: NodeType
    deps: tuple[str, ...] = ()
    ann: frozenset[str] = field(default_factory=frozenset)


class ClaimDag:
    """Validated claim DAG. Construction raises on any structural defect."""

    def __init__(
        self,
        nodes: Iterable[ClaimNode],
        weights: Mapping[NodeType, Fraction] | None = None,
    ) -> None:
        self.nodes: tuple[ClaimNode, ...] = tuple(nodes)
        self.weights: dict[NodeType, Fraction] = dict(weights or DEFAULT_WEIGHTS)
        if not self.nodes:
            raise SchemaError("a claim needs at least one node")
        for nt in NodeType:
            w = self.weights.get(nt)
            if w is None:
                raise SchemaError(f"weight scheme lacks type {nt.value!r}")
            if w <= 0:
                raise NonPositiveWeight(f"weight for {nt.value!r} must be positive")
        self._index: dict[str, int] = {}
        for i, n in enumerate(self.nodes):
            if n.id in self._index:
                raise DuplicateId(n.id)
            self._index[n.id] = i
        for n in self.nodes:
            seen: set[str] = set()
            for d in n.deps:
                if d not in self._index:
                    raise DanglingDep(n.id, d)
                if d in seen:
                    raise DuplicateId(d, where=f"deps of {n.id!r}")
                seen.add(d)
        self._check_acyclic()
        self._order, self._depth = self._toposort()

    # --- structure -------------------------------------------------------

    def _check_acyclic(self) -> None:
        white, grey, black = 0, 1, 2
        color = {n.id: white for n in self.nodes}
        for root in self.nodes:
            if color[root.id] != white:
                continue
            path = [root.id]
            stack = [iter(root.deps)]
            color[root.id] = grey
            while stack:
                nxt = next(stack[-1], None)
                if nxt is None:
                    stack.pop()
                    color[path.pop()] = black
                    continue
                if color[nxt] == grey:
                    start = path.index(nxt)
                    raise CycleError(path[start:] + [nxt])
                if color[nxt] == white:
                    color[nxt] = grey
                    path.append(nxt)
                    stack.append(iter(self.node(nxt).deps))

    def _toposort(self) -> tuple[tuple[str, ...], dict[str, int]]:
        pending = {n.id: len(n.deps) for n in self.nodes}
        users: dict[str, list[str]] = {n.id: [] for n in self.nodes}
        for n in self.nodes:
            for d in n.deps:
                users[d].append(n.id)
        ready = [self._index[i] for i, c in pending.items() if c == 0]
        heapq.heapify(ready)
        order: list[str] = []
        depth: dict[str, int] = {}
        while ready:
            nid = self.nodes[heapq.heappop(ready)].id
            deps = self.node(nid).deps
            depth[nid] = 1 + max(depth[d] for d in deps) if deps else 0
            order.append(nid)
            for u in users[nid]:
                pending[u] -= 1
                if pending[u] == 0:
                    heapq.heappush(ready, self._index[u])
        return tuple(order), depth

    # --- queries ---------------------------------------------------------

    def __len__(self) -> int:
        return len(self.nodes)

    def __contains__(self, node_id: object) -> bool:
        return node_id in self._index

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(n.id for n in self.nodes)

    def node(self, node_id: str) -> ClaimNode:
        return self.nodes[self._index[node_id]]

    def index_of(self, node_id: str) -> int:
        return self._index[node_id]

    def weight(self, node_id: str) -> Fraction:
        return self.weights[self.node(node_id).node_type]

    def depth(self, node_id: str) -> int:
        return self._depth[node_id]

    @property
    def height(self) -> int:
        return max(self._depth.values())

    def terms(self) -> frozenset[str]:
        out: set[str] = set()
        for n in self.nodes:
            out |= n.ann
        return frozenset(out)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ClaimDag):
            return NotImplemented
        return self.nodes == other.nodes and self.weights == other.weights

    def __hash__(self) -> int:  # pragma: no cover - rarely hashed
        return hash(self.nodes)


def topo_order(dag: ClaimDag) -> tuple[list[str], dict[str, int]]:
    """Dependencies first; ties follow input order. Also returns depths."""
    return list(dag._order), dict(dag._depth)


def total_weight(dag: ClaimDag) -> Fraction:
    return sum((dag.weight(n.id) for n in dag.nodes), Fraction(0))


# --- file format ---------------------------------------------------------


def _require(obj: Mapping[str, Any], key: str, kind: type | tuple[type, ...], where: str) -> Any:
    if key not in obj:
        raise SchemaError(f"{where}: missing field {key!r}")
    val = obj[key]
    if isinstance(val, bool) or not isinstance(val, kind):
        raise SchemaError(f"{where}: field {key!r} has wrong type")
    return val


def parse_json(document: bytes | str, what: str) -> Any:
    try:
        if isinstance(document, bytes):
            document = document.decode("utf-8")
        return json.loads(document)
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SchemaError(f"{what} is not valid UTF-8 JSON: {exc}") from exc


def claim_from_obj(doc: Any) -> ClaimDag:
    if not isinstance(doc, dict):
        raise SchemaError("claim file must be a JSON object")
    version = _require(doc, "schema_version", int, "claim")
    if version != SCHEMA_VERSION:
        raise SchemaError(f"unsupported claim schema_version {version}")
    raw_nodes = _require(doc, "nodes", list, "claim")
    nodes = []
    for i, raw in enumerate(raw_nodes):
        where = f"nodes[{i}]"
        if not isinstance(raw, dict):
            raise SchemaError(f"{where} must be an object")
        nid = _require(raw, "id", str, where)
        text = _require(raw, "text", str, where)
        type_name = _require(raw, "type", str, where)
        try:
            nt = NodeType(type_name)
        except ValueError as exc:
            raise SchemaError(f"{where}: unknown type {type_name!r}") from exc
        deps = _require(raw, "deps", list, where)
        if not all(isinstance(d, str) for d in deps):
            raise SchemaError(f"{where}: deps must be strings")
        ann = raw.get("ann", [])
        if not isinstance(ann, list) or not all(isinstance(t, str) for t in ann):
            raise SchemaError(f"{where}: ann must be a list of strings")
        nodes.append(ClaimNode(nid, text, nt, tuple(deps), frozenset(ann)))
    weights = doc.get("weights")
    if weights is not None and not isinstance(weights, dict):
        raise SchemaError("claim: weights must be an object")
    return ClaimDag(nodes, weight_scheme(weights))


def load_claim(document: bytes | str) -> ClaimDag:
    """Parse and validate a claim file."""
    return claim_from_obj(parse_json(document, "claim file"))


def fraction_to_decimal(q: Fraction) -> str:
    """Exact decimal string for a terminating fraction."""
    rest = q.denominator
    for p in (2, 5):
        while rest % p == 0:
            rest //= p
    if rest != 1:
        raise ValueError(f"{q} has no finite decimal expansion")
    places = 0
    while q.denominator != 1:
        q *= 10
        places += 1
    digits = str(abs(q.numerator)).rjust(places + 1, "0")
    sign = "-" if q < 0 else ""
    if places == 0:
        return sign + digits
    return f"{sign}{digits[:-places]}.{digits[-places:]}"


def claim_to_obj(dag: ClaimDag) -> dict[str, Any]:
    nodes = []
    for n in dag.nodes:
        item: dict[str, Any] = {
            "id": n.id,
            "type": n.node_type.value,
            "text": n.text,
            "deps": list(n.deps),
        }
        if n.ann:
            item["ann"] = sorted(n.ann)
        nodes.append(item)
    return {
        "schema_version": SCHEMA_VERSION,
        "nodes": nodes,
        "weights": {nt.value: fraction_to_decimal(w) for nt, w in sorted(
            dag.weights.items(), key=lambda kv: kv[0].value)},
    }


def dump_claim(dag: ClaimDag) -> bytes:
    return json.dumps(claim_to_obj(dag), indent=2, ensure_ascii=False).encode("utf-8") + b"\n"


def canonical_claim_obj(dag: ClaimDag) -> dict[str, Any]:
    """Normalized claim record hashed into certificates.

    Weights are explicit rational pairs and ``ann`` is always a sorted list,
    so two files describing the same DAG hash identically.
    """
    return {
        "nodes": [
            {
                "id": n.id,
                "type": n.node_type.value,
                "text": n.text,
                "deps": list(n.deps),
                "ann": sorted(n.ann),
            }
            for n in dag.nodes
        ],
        "weights": {
            nt.value: {"num": w.numerator, "den": w.denominator}
            for nt, w in dag.weights.items()
        },
    }
