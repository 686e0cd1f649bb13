"""Doctrine-of-equivalents analysis.

Phase 1 tags each limitation with a ``Tag`` after removing evidence
segments that fall in surrendered scope.
Phase 2 enforces dependencies on the resulting scores in topological order.
Classification tags are never changed by phase 2.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Mapping, Sequence

from .certificate import Certificate, generate_certificate
from .claim_graph import ClaimDag, parse_json, topo_order, total_weight
from .coverage import CoverageValue, coverage_for
from .errors import (
    InvalidHistory,
    InvalidParams,
    MissingFwr,
    MissingProjection,
    MissingScope,
    SchemaError,
    UnknownNode,
)
from .lattice import BOTTOM, SCALE, BasisPoints, discretize, to_fraction
from .scoring import EvidenceSet


class Reason(str, Enum):
    PATENTABILITY = "Patentability"
    S112 = "S112"
    OTHER = "Other"


class Tag(str, Enum):
    LITERAL = "Literal"
    EQUIVALENT = "Equivalent"
    NO_MATCH = "NoMatch"


@dataclass(frozen=True)
class Amendment:
    node: str
    k: int
    reason: Reason


@dataclass(frozen=True)
class Argument:
    node: str
    disclaimed: frozenset[str]


@dataclass(frozen=True)
class Rebuttal:
    unforeseeable: bool = False
    tangential: bool = False
    alternative_justification: bool = False

    @property
    def any(self) -> bool:
        return self.unforeseeable or self.tangential or self.alternative_justification


@dataclass(frozen=True)
class ScopeSpace:
    implementations: tuple[tuple[str, str], ...]
    amendments: Mapping[int, tuple[frozenset[str], frozenset[str]]]

    def __post_init__(self) -> None:
        if not self.implementations:
            raise SchemaError("scope space needs at least one implementation")
        ids = [i for i, _ in self.implementations]
        if len(set(ids)) != len(ids):
            raise SchemaError("duplicate implementation id in scope space")
        everything = set(ids)
        for k, (orig, amend) in self.amendments.items():
            if not amend <= orig <= everything:
                raise SchemaError(f"amendment {k}: scope must narrow (amend within orig within all)")

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(i for i, _ in self.implementations)


@dataclass(frozen=True)
class ProsecutionHistory:
    amendments: tuple[Amendment, ...] = ()
    arguments: tuple[Argument, ...] = ()
    rebuttals: Mapping[tuple[str, int, int], Rebuttal] = field(default_factory=dict)

    def __post_init__(self) -> None:
        other = {(a.node, a.k) for a in self.amendments if a.reason is Reason.OTHER}
        for (node, _seg, k), r in self.rebuttals.items():
            if (node, k) in other and r.any:
                raise InvalidHistory(f"amendment {k} on {node} has reason Other; rebuttals must be false")

    def touches(self, node: str) -> bool:
        return any(a.node == node for a in self.amendments) or any(a.node == node for a in self.arguments)

    def rebutted(self, node: str, segment: int, k: int) -> bool:
        r = self.rebuttals.get((node, segment, k))
        return bool(r and r.any)


@dataclass(frozen=True)
class DoeParams:
    theta_lit: BasisPoints = BasisPoints(7000)
    theta_eq: BasisPoints = BasisPoints(4500)
    theta_vit: BasisPoints = BasisPoints(0)
    theta_prop: BasisPoints | None = None
    delta: Fraction = Fraction(1)

    def __post_init__(self) -> None:
        if self.theta_prop is None:
            object.__setattr__(self, "theta_prop", self.theta_lit)
        if not 0 < self.theta_eq < self.theta_lit:
            raise InvalidParams("need 0 < theta_eq < theta_lit")
        if not 0 <= self.theta_vit < self.theta_eq:
            raise InvalidParams("need 0 <= theta_vit < theta_eq")
        if self.theta_prop not in (self.theta_lit, self.theta_eq):
            raise InvalidParams("theta_prop must equal theta_lit or theta_eq")
        if not 0 < self.delta <= 1:
            raise InvalidParams("need 0 < delta <= 1")


@dataclass(frozen=True)
class Fwr:
    f: BasisPoints
    w: BasisPoints
    r: BasisPoints

    def min(self) -> BasisPoints:
        return min(self.f, self.w, self.r)


@dataclass(frozen=True)
class DoeContext:
    scope_spaces: Mapping[str, ScopeSpace] = field(default_factory=dict)
    history: ProsecutionHistory = field(default_factory=ProsecutionHistory)
    projection_scores: Mapping[str, Mapping[str, Sequence[int]]] = field(default_factory=dict)
    segment_scores: Mapping[str, Sequence[int]] = field(default_factory=dict)
    fwr_scores: Mapping[str, Mapping[int, Fwr]] = field(default_factory=dict)
    params: DoeParams = field(default_factory=DoeParams)


@dataclass(frozen=True)
class Classification:
    node: str
    tag: Tag
    beta: BasisPoints
    eff_phase1: BasisPoints
    eff_doe: BasisPoints
    witness: int | None = None
    fwr: Fwr | None = None
    vitiated: bool = False
    estopped: tuple[int, ...] = ()
    conservative: bool = False

    def to_obj(self, params: DoeParams) -> dict[str, Any]:
        out: dict[str, Any] = {
            "tag": self.tag.value,
            "beta": int(self.beta),
            "literal_test": {"beta": int(self.beta), "theta_lit": int(params.theta_lit),
                             "passes": self.beta >= params.theta_lit},
            "estopped_segments": list(self.estopped),
            "eff_phase1": int(self.eff_phase1),
            "eff_doe": int(self.eff_doe),
        }
        if self.conservative:
            out["argument_estoppel"] = "conservative"
        if self.witness is not None:
            out["witness"] = self.witness
            out["vitiated"] = self.vitiated
        if self.fwr is not None:
            out["fwr"] = {
                p: {"score": int(v), "theta_eq": int(params.theta_eq), "passes": v >= params.theta_eq}
                for p, v in (("f", self.fwr.f), ("w", self.fwr.w), ("r", self.fwr.r))
            }
        return out


def project(node: str, segment: int, scope: ScopeSpace,
            projection_scores: Mapping[str, Mapping[str, Sequence[int]]]) -> str:
    """Implementation a segment most resembles; ties go to the earlier one."""
    table = projection_scores.get(node)
    if table is None:
        raise MissingProjection(f"no projection scores for {node}")
    best_id, best = None, -1
    for impl in scope.ids:
        row = table.get(impl)
        if row is None or segment >= len(row):
            raise MissingProjection(f"no projection score for {node}/{impl}/segment {segment}")
        if row[segment] > best:
            best_id, best = impl, row[segment]
    assert best_id is not None
    return best_id


def estopped_region(node: str, evidence: EvidenceSet, scope: ScopeSpace | None,
                    ph: ProsecutionHistory,
                    projection_scores: Mapping[str, Mapping[str, Sequence[int]]]) -> frozenset[int]:
    """Segments whose projected implementation was surrendered."""
    if not ph.touches(node):
        return frozenset()
    if scope is None:
        raise MissingScope(f"prosecution history names {node} but it has no scope space")
    amendments = [a for a in ph.amendments if a.node == node]
    for a in amendments:
        if a.k not in scope.amendments:
            raise MissingScope(f"scope space of {node} lacks amendment {a.k}")
    disclaimed: set[str] = set()
    for arg in ph.arguments:
        if arg.node == node:
            disclaimed |= arg.disclaimed
    out = set()
    for seg in evidence.segments:
        s = seg.index
        impl = project(node, s, scope, projection_scores)
        for a in amendments:
            orig, amend = scope.amendments[a.k]
            if impl in orig and impl not in amend and not ph.rebutted(node, s, a.k):
                out.add(s)
        if impl in disclaimed:
            out.add(s)
    return frozenset(out)


def classify(node: str, beta: int, segment_scores: Sequence[int] | None, estopped: frozenset[int],
             fwr_scores: Mapping[int, Fwr], params: DoeParams) -> Classification:
    b = BasisPoints(beta)
    est = tuple(sorted(estopped))
    if b >= params.theta_lit:
        return Classification(node, Tag.LITERAL, b, b, b, estopped=est)
    if segment_scores is None:
        raise SchemaError(f"per-segment scores are required for {node} (below theta_lit)")
    candidates = [s for s in range(len(segment_scores)) if s not in estopped]
    if not candidates:
        return Classification(node, Tag.NO_MATCH, b, BOTTOM, BOTTOM, estopped=est)
    star = candidates[0]
    for s in candidates[1:]:
        if segment_scores[s] > segment_scores[star]:
            star = s
    prongs = fwr_scores.get(star)
    if prongs is None:
        raise MissingFwr(f"no function-way-result scores for {node} segment {star}")
    vitiated = segment_scores[star] < params.theta_vit
    passes = min(prongs.f, prongs.w, prongs.r) >= params.theta_eq
    if passes and not vitiated:
        value = discretize(params.delta * Fraction(prongs.min(), SCALE))
        return Classification(node, Tag.EQUIVALENT, b, value, value, star, prongs, False, est)
    return Classification(node, Tag.NO_MATCH, b, BOTTOM, BOTTOM, star, prongs, vitiated, est)


@dataclass(frozen=True)
class DoeReport:
    classifications: dict[str, Classification]
    w_doe: CoverageValue
    literal_coverage: CoverageValue
    params: DoeParams
    certificate: Certificate

    def to_obj(self) -> dict[str, Any]:
        p = self.params
        return {
            "params": {"theta_lit": int(p.theta_lit), "theta_eq": int(p.theta_eq),
                       "theta_vit": int(p.theta_vit), "theta_prop": int(p.theta_prop),
                       "delta": {"num": p.delta.numerator, "den": p.delta.denominator}},
            "classification": {k: c.to_obj(p) for k, c in self.classifications.items()},
            "w_doe": self.w_doe.to_obj(),
            "literal_coverage": self.literal_coverage.to_obj(),
            "certificate": self.certificate.to_obj(),
        }


def doe_analyze(dag: ClaimDag, scores: object, evidence: EvidenceSet, ctx: DoeContext) -> DoeReport:
    beta = getattr(scores, "scores", scores)
    params = ctx.params
    for nid in list(ctx.scope_spaces) + list(ctx.segment_scores) + list(ctx.fwr_scores):
        if nid not in dag:
            raise UnknownNode(nid)
    phase1: dict[str, Classification] = {}
    for n in dag.nodes:
        seg = ctx.segment_scores.get(n.id)
        if seg is not None:
            if len(seg) != len(evidence):
                raise SchemaError(f"segment scores for {n.id} must cover all {len(evidence)} segments")
            if max(seg) != beta[n.id]:
                raise SchemaError(f"segment scores for {n.id} disagree with its best-match score")
        est = estopped_region(n.id, evidence, ctx.scope_spaces.get(n.id), ctx.history, ctx.projection_scores)
        c = classify(n.id, beta[n.id], seg, est, ctx.fwr_scores.get(n.id, {}), params)
        if any(a.node == n.id for a in ctx.history.arguments):
            c = Classification(c.node, c.tag, c.beta, c.eff_phase1, c.eff_doe, c.witness, c.fwr,
                               c.vitiated, c.estopped, True)
        phase1[n.id] = c

    order, _ = topo_order(dag)
    final: dict[str, BasisPoints] = {}
    for nid in order:
        blocked = any(final[d] < params.theta_prop for d in dag.node(nid).deps)
        final[nid] = BOTTOM if blocked else phase1[nid].eff_phase1
    classes = {}
    for nid in dag.ids:
        c = phase1[nid]
        classes[nid] = Classification(c.node, c.tag, c.beta, c.eff_phase1, final[nid], c.witness,
                                      c.fwr, c.vitiated, c.estopped, c.conservative)
    w = sum((dag.weight(v) * Fraction(final[v], SCALE) for v in dag.ids), Fraction(0))
    w_doe = CoverageValue(w / total_weight(dag) * 100)
    literal = coverage_for(dag, beta, params.theta_lit)
    cert = generate_certificate(dag, scores, params.theta_lit)
    return DoeReport(classes, w_doe, literal, params, cert)


# --- file format ---------------------------------------------------------


def _bp(raw: Any, where: str) -> BasisPoints:
    if isinstance(raw, bool) or not isinstance(raw, int):
        raise SchemaError(f"{where} must be an integer basis-point value")
    return BasisPoints(raw)


def _strs(raw: Any, where: str) -> frozenset[str]:
    if not isinstance(raw, list) or not all(isinstance(x, str) for x in raw):
        raise SchemaError(f"{where} must be a list of strings")
    return frozenset(raw)


def _flag(raw: Any, key: str, where: str) -> bool:
    v = raw.get(key, False)
    if not isinstance(v, bool):
        raise SchemaError(f"{where}.{key} must be a boolean")
    return v


def params_from_obj(raw: Any) -> DoeParams:
    if raw is None:
        return DoeParams()
    if not isinstance(raw, dict):
        raise SchemaError("params must be an object")
    kw: dict[str, Any] = {}
    for key in ("theta_lit", "theta_eq", "theta_vit", "theta_prop"):
        if key in raw:
            kw[key] = _bp(raw[key], f"params.{key}")
    if "delta" in raw:
        if not isinstance(raw["delta"], str):
            raise SchemaError("params.delta must be a decimal string")
        kw["delta"] = to_fraction(raw["delta"])
    return DoeParams(**kw)


def context_from_obj(doc: Any) -> DoeContext:
    if not isinstance(doc, dict):
        raise SchemaError("DOE context must be an object")
    scopes = {}
    for node, raw in (doc.get("scope_spaces") or {}).items():
        where = f"scope_spaces[{node!r}]"
        if not isinstance(raw, dict) or not isinstance(raw.get("implementations"), list):
            raise SchemaError(f"{where} needs an implementations list")
        impls = []
        for item in raw["implementations"]:
            if not isinstance(item, dict) or not isinstance(item.get("id"), str):
                raise SchemaError(f"{where}: each implementation needs an id")
            impls.append((item["id"], str(item.get("text", ""))))
        amends = {}
        for a in raw.get("amendments", []):
            if not isinstance(a, dict):
                raise SchemaError(f"{where}: amendments must be objects")
            k = a.get("k")
            if isinstance(k, bool) or not isinstance(k, int):
                raise SchemaError(f"{where}: amendment k must be an integer")
            amends[k] = (_strs(a.get("orig"), f"{where}.orig"), _strs(a.get("amend"), f"{where}.amend"))
        scopes[node] = ScopeSpace(tuple(impls), amends)

    ph_raw = doc.get("prosecution_history") or {}
    if not isinstance(ph_raw, dict):
        raise SchemaError("prosecution_history must be an object")
    amendments = []
    for a in ph_raw.get("amendments", []):
        try:
            amendments.append(Amendment(a["node"], a["k"], Reason(a["reason"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"bad amendment entry {a!r}") from exc
    arguments = [Argument(a["node"], _strs(a.get("disclaimed"), "disclaimed"))
                 for a in ph_raw.get("arguments", []) if isinstance(a, dict) and "node" in a]
    rebuttals = {}
    for r in ph_raw.get("rebuttals", []):
        if not isinstance(r, dict) or not {"node", "segment", "k"} <= set(r):
            raise SchemaError(f"bad rebuttal entry {r!r}")
        rebuttals[(r["node"], r["segment"], r["k"])] = Rebuttal(
            _flag(r, "unforeseeable", "rebuttal"), _flag(r, "tangential", "rebuttal"),
            _flag(r, "alternative_justification", "rebuttal"))
    history = ProsecutionHistory(tuple(amendments), tuple(arguments), rebuttals)

    projection = {}
    for node, table in (doc.get("projection_scores") or {}).items():
        if not isinstance(table, dict):
            raise SchemaError(f"projection_scores[{node!r}] must be an object")
        projection[node] = {impl: [_bp(x, f"projection_scores[{node!r}][{impl!r}]") for x in row]
                            for impl, row in table.items()}
    segment_scores = {}
    for node, row in (doc.get("segment_scores") or {}).items():
        if not isinstance(row, list):
            raise SchemaError(f"segment_scores[{node!r}] must be a list")
        segment_scores[node] = [_bp(x, f"segment_scores[{node!r}]") for x in row]
    fwr = {}
    for node, table in (doc.get("fwr_scores") or {}).items():
        if not isinstance(table, dict):
            raise SchemaError(f"fwr_scores[{node!r}] must be an object")
        fwr[node] = {}
        for seg, prong in table.items():
            try:
                idx = int(seg)
            except ValueError as exc:
                raise SchemaError(f"fwr_scores[{node!r}] key {seg!r} is not a segment index") from exc
            if not isinstance(prong, dict):
                raise SchemaError(f"fwr_scores[{node!r}][{seg!r}] must be an object")
            fwr[node][idx] = Fwr(*(_bp(prong.get(p), f"fwr_scores[{node!r}][{seg!r}].{p}") for p in "fwr"))
    return DoeContext(scopes, history, projection, segment_scores, fwr, params_from_obj(doc.get("params")))


def load_doe_context(document: bytes | str) -> DoeContext:
    return context_from_obj(parse_json(document, "DOE context"))
