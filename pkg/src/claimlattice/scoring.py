"""Match scores at the trust boundary.

A small TF-IDF cosine scorer fused with supplied semantic scores, plus
loaders for precomputed score tables and evidence files.

The lexical score is exact and platform independent: IDF weights come from
``decimal`` logarithms (correctly rounded) and the final square root is an
integer square root, so identical inputs give identical rationals everywhere.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field
from decimal import Context, Decimal
from fractions import Fraction
from typing import Any, Callable, Iterable, Mapping

from .claim_graph import ClaimDag, ClaimNode, parse_json
from .errors import MissingNode, OutOfRange, SchemaError, UnknownNode
from .lattice import BasisPoints, Exact, discretize, to_fraction

_TOKEN_RE = re.compile(r"[^0-9a-z]+")
_LN_CONTEXT = Context(prec=40)
_SQRT_DIGITS = 30


def tokenize(text: str) -> list[str]:
    """Lowercase, split on anything that is not an ASCII letter or digit."""
    return [t for t in _TOKEN_RE.split(text.lower()) if t]


class Corpus:
    """Shared document-frequency table over claim and evidence texts."""

    def __init__(self, documents: Iterable[str]) -> None:
        docs = [set(tokenize(d)) for d in documents]
        self.size = len(docs)
        df: Counter[str] = Counter()
        for d in docs:
            df.update(d)
        self._idf: dict[str, Fraction] = {}
        for term, count in df.items():
            ratio = Decimal(1 + self.size) / Decimal(1 + count)
            self._idf[term] = Fraction(ratio.ln(_LN_CONTEXT)) + 1

    def idf(self, term: str) -> Fraction | None:
        return self._idf.get(term)

    def vector(self, text: str) -> dict[str, Fraction]:
        tf = Counter(tokenize(text))
        out = {}
        for term, count in tf.items():
            w = self._idf.get(term)
            if w is not None:
                out[term] = count * w
        return out


def _exact_sqrt(q: Fraction) -> Fraction:
    """Square root of a non-negative rational, exact when it is a perfect square."""
    rn, rd = math.isqrt(q.numerator), math.isqrt(q.denominator)
    if rn * rn == q.numerator and rd * rd == q.denominator:
        return Fraction(rn, rd)
    scale = 10 ** _SQRT_DIGITS
    return Fraction(math.isqrt(q.numerator * scale * scale // q.denominator), scale)


def lexical_score(t1: str, t2: str, corpus: Corpus) -> Fraction:
    """TF-IDF cosine similarity in ``[0, 1]``; 0 if either vector is empty."""
    a, b = corpus.vector(t1), corpus.vector(t2)
    if not a or not b:
        return Fraction(0)
    dot = sum((w * b[t] for t, w in a.items() if t in b), Fraction(0))
    if dot == 0:
        return Fraction(0)
    na = sum((w * w for w in a.values()), Fraction(0))
    nb = sum((w * w for w in b.values()), Fraction(0))
    cos = _exact_sqrt(dot * dot / (na * nb))
    return min(cos, Fraction(1))


def fuse(lex: Exact, sem: Exact, alpha: Exact = 1) -> BasisPoints:
    """``discretize(alpha*lex + (1-alpha)*sem)``."""
    lq, sq, aq = to_fraction(lex), to_fraction(sem), to_fraction(alpha)
    for name, v in (("lexical", lq), ("semantic", sq), ("alpha", aq)):
        if v < 0 or v > 1:
            raise OutOfRange(f"{name} score outside [0, 1]: {v}")
    return discretize(aq * lq + (1 - aq) * sq)


# --- evidence ------------------------------------------------------------


@dataclass(frozen=True)
class Segment:
    index: int
    text: str


@dataclass(frozen=True)
class EvidenceSet:
    segments: tuple[Segment, ...]

    def __post_init__(self) -> None:
        if not self.segments:
            raise SchemaError("evidence needs at least one segment")
        for i, seg in enumerate(self.segments):
            if seg.index != i:
                raise SchemaError(f"segment indices must be 0..m-1 in order; got {seg.index} at {i}")

    @classmethod
    def of(cls, texts: Iterable[str]) -> "EvidenceSet":
        return cls(tuple(Segment(i, t) for i, t in enumerate(texts)))

    def __len__(self) -> int:
        return len(self.segments)


def load_evidence(document: bytes | str) -> EvidenceSet:
    doc = parse_json(document, "evidence file")
    if not isinstance(doc, dict) or not isinstance(doc.get("segments"), list):
        raise SchemaError("evidence file must be an object with a 'segments' list")
    segs = []
    for i, raw in enumerate(doc["segments"]):
        if not isinstance(raw, dict):
            raise SchemaError(f"segments[{i}] must be an object")
        idx, text = raw.get("index"), raw.get("text")
        if isinstance(idx, bool) or not isinstance(idx, int) or not isinstance(text, str):
            raise SchemaError(f"segments[{i}] needs integer 'index' and string 'text'")
        segs.append(Segment(idx, text))
    return EvidenceSet(tuple(segs))


# --- matching ------------------------------------------------------------


@dataclass
class MatcherConfig:
    """Fusion weight plus the corpus the lexical part is computed over.

    ``semantic`` holds externally produced scores keyed ``(node_id, segment)``.
    Missing pairs count as 0.
    """

    corpus: Corpus
    alpha: Fraction = Fraction(1)
    semantic: Mapping[tuple[str, int], Fraction] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.alpha = to_fraction(self.alpha)
        if self.alpha < 0 or self.alpha > 1:
            raise OutOfRange(f"alpha outside [0, 1]: {self.alpha}")

    @classmethod
    def for_texts(cls, dag: ClaimDag, evidence: EvidenceSet, **kw: Any) -> "MatcherConfig":
        docs = [n.text for n in dag.nodes] + [s.text for s in evidence.segments]
        return cls(Corpus(docs), **kw)

    def score(self, node: ClaimNode, segment: Segment) -> BasisPoints:
        lex = lexical_score(node.text, segment.text, self.corpus) if self.alpha else Fraction(0)
        sem = self.semantic.get((node.id, segment.index), Fraction(0))
        return fuse(lex, sem, self.alpha)


Scorer = Callable[[ClaimNode, Segment], int]


def best_match(node: ClaimNode, evidence: EvidenceSet, scorer: Scorer) -> tuple[BasisPoints, int]:
    """Highest score over all segments; ties go to the lowest index."""
    best, witness = -1, 0
    for seg in evidence.segments:
        s = scorer(node, seg)
        if s > best:
            best, witness = s, seg.index
    return BasisPoints(best), witness


# --- score tables --------------------------------------------------------


@dataclass(frozen=True)
class ScoreTable:
    construction_id: str
    scores: Mapping[str, BasisPoints]
    witness: Mapping[str, int] | None = None

    def __getitem__(self, node_id: str) -> BasisPoints:
        return self.scores[node_id]

    def with_overrides(self, overrides: Mapping[str, int], construction_id: str) -> "ScoreTable":
        merged = dict(self.scores)
        for k, v in overrides.items():
            merged[k] = BasisPoints(v)
        return ScoreTable(construction_id, merged)

    def to_obj(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "schema_version": 1,
            "construction_id": self.construction_id,
            "scores": {k: int(v) for k, v in self.scores.items()},
        }
        if self.witness is not None:
            out["witness"] = dict(self.witness)
        return out


def score_dag(dag: ClaimDag, evidence: EvidenceSet, config: MatcherConfig,
              construction_id: str = "computed") -> ScoreTable:
    """Best-match every node against the evidence."""
    scores, witness = {}, {}
    for n in dag.nodes:
        scores[n.id], witness[n.id] = best_match(n, evidence, config.score)
    return ScoreTable(construction_id, scores, witness)


def _int_field(raw: Any, where: str) -> int:
    if isinstance(raw, bool) or not isinstance(raw, int):
        raise SchemaError(f"{where} must be an integer")
    return raw


def score_table_from_obj(doc: Any, dag: ClaimDag) -> ScoreTable:
    if not isinstance(doc, dict):
        raise SchemaError("score table must be a JSON object")
    if doc.get("schema_version") != 1:
        raise SchemaError("score table needs schema_version 1")
    cid = doc.get("construction_id")
    if not isinstance(cid, str):
        raise SchemaError("score table needs a string construction_id")
    raw = doc.get("scores")
    if not isinstance(raw, dict):
        raise SchemaError("score table needs a 'scores' object")
    scores = score_overrides_from_obj(raw, dag, "scores")
    for nid in dag.ids:
        if nid not in scores:
            raise MissingNode(nid)
    witness = None
    if "witness" in doc:
        if not isinstance(doc["witness"], dict):
            raise SchemaError("witness must be an object")
        witness = {}
        for k, v in doc["witness"].items():
            if k not in dag:
                raise UnknownNode(k)
            witness[k] = _int_field(v, f"witness[{k!r}]")
    return ScoreTable(cid, {nid: scores[nid] for nid in dag.ids}, witness)


def score_overrides_from_obj(raw: Any, dag: ClaimDag, where: str) -> dict[str, BasisPoints]:
    """Validate a ``{node_id: int}`` map against ``dag``."""
    if not isinstance(raw, dict):
        raise SchemaError(f"{where} must be an object")
    out = {}
    for k, v in raw.items():
        if k not in dag:
            raise UnknownNode(k)
        out[k] = BasisPoints(_int_field(v, f"{where}[{k!r}]"))
    return out


def load_score_table(document: bytes | str, dag: ClaimDag) -> ScoreTable:
    return score_table_from_obj(parse_json(document, "score table"), dag)

