"""Use-case drivers built on the coverage core (everything except equivalents)."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Mapping, Sequence

from .certificate import Certificate, generate_certificate
from .claim_graph import ClaimDag, load_claim, parse_json, topo_order
from .coverage import CoverageValue, weighted_coverage
from .errors import IncompleteScores, MissingInterpretation, SchemaError, UnknownTerm
from .lattice import BasisPoints
from .propagation import compute_eff
from .scoring import ScoreTable, score_overrides_from_obj, score_table_from_obj


def _scores_of(scores: object) -> Mapping[str, int]:
    return getattr(scores, "scores", scores)


def _require_complete(dag: ClaimDag, beta: Mapping[str, int]) -> None:
    missing = [nid for nid in dag.ids if nid not in beta]
    if missing:
        raise IncompleteScores(missing)


# --- freedom to operate --------------------------------------------------


@dataclass(frozen=True)
class GapEntry:
    node: str
    beta: int
    margin: int
    path: tuple[str, ...]


@dataclass(frozen=True)
class FtoResult:
    clear: bool
    node: str | None = None
    beta: int | None = None
    theta: int = 0
    certificate: Certificate | None = None
    gaps: tuple[GapEntry, ...] = ()

    @property
    def tag(self) -> str:
        return "Clear" if self.clear else "Risk"

    def to_obj(self) -> dict[str, Any]:
        if self.clear:
            assert self.certificate is not None
            return {"result": "Clear", "node": self.node, "beta": self.beta, "theta": self.theta,
                    "certificate": self.certificate.to_obj()}
        return {
            "result": "Risk",
            "theta": self.theta,
            "gaps": [{"node": g.node, "beta": g.beta, "margin": g.margin, "path": list(g.path)}
                     for g in self.gaps],
            "note": "gap ranking is a diagnostic and is not certified",
        }


def weakest_paths(dag: ClaimDag, beta: Mapping[str, int]) -> dict[str, tuple[str, ...]]:
    """Per node, a root-to-node dependency path along which the meet is smallest.

    Ties go to the earliest dependency in the node's own list.
    """
    order, _ = topo_order(dag)
    best: dict[str, tuple[int, tuple[str, ...]]] = {}
    for nid in order:
        own = int(beta[nid])
        choice: tuple[int, tuple[str, ...]] | None = None
        for d in dag.node(nid).deps:
            if choice is None or best[d][0] < choice[0]:
                choice = best[d]
        if choice is None:
            best[nid] = (own, (nid,))
        else:
            best[nid] = (min(own, choice[0]), choice[1] + (nid,))
    return {nid: best[nid][1] for nid in dag.ids}


def fto(dag: ClaimDag, scores: object, theta: int) -> FtoResult:
    """Clear on the first node (dependency order) scoring below theta, else Risk."""
    beta = _scores_of(scores)
    _require_complete(dag, beta)
    t = BasisPoints(theta)
    order, _ = topo_order(dag)
    for nid in order:
        if beta[nid] < t:
            cert = generate_certificate(dag, scores, t, fto_node=nid)
            return FtoResult(True, nid, int(beta[nid]), int(t), cert)
    paths = weakest_paths(dag, beta)
    ranked = sorted(dag.ids, key=lambda v: (int(beta[v]) - int(t), dag.index_of(v)))
    gaps = tuple(GapEntry(v, int(beta[v]), int(beta[v]) - int(t), paths[v]) for v in ranked)
    return FtoResult(False, theta=int(t), gaps=gaps)


# --- construction sensitivity --------------------------------------------


@dataclass(frozen=True)
class ConstructionOutcome:
    construction_id: str
    coverage: CoverageValue
    satisfied: bool
    scope: int
    certificate: Certificate


@dataclass(frozen=True)
class SensitivityReport:
    constructions: tuple[ConstructionOutcome, ...]
    perturbed: dict[str, ConstructionOutcome]
    determinative: tuple[str, ...]
    breakers: dict[str, tuple[str, ...]]
    threshold_construction: str | None
    monotonicity_flags: tuple[tuple[str, str], ...]
    threshold_cov: Fraction

    def to_obj(self) -> dict[str, Any]:
        def outcome(o: ConstructionOutcome) -> dict[str, Any]:
            return {"construction_id": o.construction_id, "coverage": o.coverage.to_obj(),
                    "satisfied": o.satisfied, "scope": o.scope,
                    "certificate": o.certificate.to_obj()}

        return {
            "threshold_cov": {"num": self.threshold_cov.numerator, "den": self.threshold_cov.denominator},
            "constructions": [outcome(o) for o in self.constructions],
            "perturbations": {t: outcome(o) for t, o in sorted(self.perturbed.items())},
            "determinative": list(self.determinative),
            "breakers": {k: list(v) for k, v in self.breakers.items()},
            "threshold_construction": self.threshold_construction,
            "monotonicity_flags": [{"term": t, "node": n} for t, n in self.monotonicity_flags],
        }


def _evaluate(dag: ClaimDag, table: ScoreTable, theta: int, threshold_cov: Fraction) -> ConstructionOutcome:
    eff = compute_eff(dag, table, theta)
    cov = weighted_coverage(dag, eff)
    scope = sum(1 for v in eff.eff.values() if v >= eff.theta)
    cert = generate_certificate(dag, table, theta)
    return ConstructionOutcome(table.construction_id, cov, cov.value >= threshold_cov, scope, cert)


def sensitivity(dag: ClaimDag, base_scores: ScoreTable, alt_tables: Sequence[ScoreTable],
                term_perturbations: Mapping[str, Mapping[str, int]], theta: int,
                threshold_cov: Fraction | int = 70) -> SensitivityReport:
    """Evaluate every construction and every single-term perturbation of the base."""
    thr = Fraction(threshold_cov)
    tables = [base_scores, *alt_tables]
    for tbl in tables:
        _require_complete(dag, tbl.scores)
    vocabulary = dag.terms()
    for term, override in term_perturbations.items():
        if term not in vocabulary:
            raise UnknownTerm(f"term {term!r} is not annotated on any node")
        for nid in override:
            if nid not in dag or term not in dag.node(nid).ann:
                raise UnknownTerm(f"term {term!r} does not annotate node {nid!r}")

    outcomes = tuple(_evaluate(dag, tbl, theta, thr) for tbl in tables)
    base = outcomes[0]
    base_eff = compute_eff(dag, base_scores, theta).eff

    perturbed = {}
    determinative = []
    flags = []
    for term in sorted(term_perturbations):
        override = term_perturbations[term]
        for nid, value in override.items():
            if value > base_scores[nid]:
                flags.append((term, nid))
        variant = base_scores.with_overrides(override, f"{base_scores.construction_id}+{term}")
        out = _evaluate(dag, variant, theta, thr)
        perturbed[term] = out
        if out.satisfied != base.satisfied:
            determinative.append(term)

    breakers = {}
    for tbl, out in zip(tables[1:], outcomes[1:]):
        if not out.satisfied:
            eff_j = compute_eff(dag, tbl, theta).eff
            breakers[out.construction_id] = tuple(
                v for v in dag.ids if eff_j[v] < theta <= base_eff[v])

    threshold = None
    best_scope = None
    for out in outcomes:
        if out.satisfied and (best_scope is None or out.scope < best_scope):
            threshold, best_scope = out.construction_id, out.scope

    return SensitivityReport(outcomes, perturbed, tuple(determinative), breakers, threshold,
                             tuple(flags), thr)


def load_sensitivity_input(document: bytes | str, dag: ClaimDag,
                           base_dir: Path | None = None) -> tuple[ScoreTable, list[ScoreTable], dict[str, dict[str, int]]]:
    """Parse ``{base_table, alt_tables, perturbations}``.

    Tables may be inline objects or file paths relative to ``base_dir``.
    """
    doc = parse_json(document, "sensitivity input")
    if not isinstance(doc, dict) or "base_table" not in doc:
        raise SchemaError("sensitivity input needs a base_table")

    def table(raw: Any) -> ScoreTable:
        if isinstance(raw, str):
            path = (base_dir or Path.cwd()) / raw
            return score_table_from_obj(parse_json(path.read_bytes(), str(path)), dag)
        return score_table_from_obj(raw, dag)

    alts = doc.get("alt_tables", [])
    if not isinstance(alts, list):
        raise SchemaError("alt_tables must be a list")
    perts_raw = doc.get("perturbations", {})
    if not isinstance(perts_raw, dict):
        raise SchemaError("perturbations must be an object")
    perts = {t: dict(score_overrides_from_obj(o, dag, f"perturbations[{t!r}]")) for t, o in perts_raw.items()}
    return table(doc["base_table"]), [table(a) for a in alts], perts


# --- consistency ---------------------------------------------------------


def normalize(text: str) -> str:
    return " ".join(text.split()).casefold()


@dataclass(frozen=True)
class Patent:
    name: str
    dag: ClaimDag
    interpretations: Mapping[str, str]


@dataclass(frozen=True)
class ConsistencyResult:
    consistent: bool
    checked: tuple[tuple[str, int, int], ...] = ()
    i: int | None = None
    j: int | None = None
    patent_i: str | None = None
    patent_j: str | None = None
    term: str | None = None
    interp_i: str | None = None
    interp_j: str | None = None

    def to_obj(self) -> dict[str, Any]:
        if self.consistent:
            return {"result": "Consistent",
                    "checked": [{"term": t, "i": i, "j": j} for t, i, j in self.checked]}
        return {"result": "Inconsistent", "i": self.i, "j": self.j, "patent_i": self.patent_i,
                "patent_j": self.patent_j, "term": self.term, "interp_i": self.interp_i,
                "interp_j": self.interp_j}


def consistency(portfolio: Sequence[Patent], vocabulary: Sequence[str] | None = None) -> ConsistencyResult:
    """Every pair of patents sharing a term must interpret it identically.

    Terms are visited in sorted order and pairs by index, so the reported
    counterexample is deterministic.
    """
    for p in portfolio:
        for term in sorted(p.dag.terms()):
            if term not in p.interpretations:
                raise MissingInterpretation(p.name, term)
    if vocabulary is None:
        vocab: set[str] = set()
        for p in portfolio:
            vocab |= p.dag.terms()
    else:
        vocab = set(vocabulary)
    checked = []
    for term in sorted(vocab):
        users = [k for k, p in enumerate(portfolio) if term in p.dag.terms()]
        for a_pos, a in enumerate(users):
            for b in users[a_pos + 1:]:
                left = portfolio[a].interpretations[term]
                right = portfolio[b].interpretations[term]
                checked.append((term, a, b))
                if normalize(left) != normalize(right):
                    return ConsistencyResult(False, tuple(checked), a, b, portfolio[a].name,
                                             portfolio[b].name, term, left, right)
    return ConsistencyResult(True, tuple(checked))


def load_portfolio(document: bytes | str, base_dir: Path | None = None) -> tuple[list[Patent], list[str] | None]:
    """A list of ``{claim_file, interpretations, id?}``, or an object wrapping
    that list under ``patents`` with an optional ``vocabulary``.

    Claim paths resolve against ``base_dir``.
    """
    doc = parse_json(document, "portfolio")
    vocabulary = None
    if isinstance(doc, dict):
        vocabulary = doc.get("vocabulary")
        if vocabulary is not None and (not isinstance(vocabulary, list)
                                        or not all(isinstance(t, str) for t in vocabulary)):
            raise SchemaError("vocabulary must be a list of strings")
        doc = doc.get("patents")
    if not isinstance(doc, list):
        raise SchemaError("portfolio must be a list of patents")
    root = base_dir or Path.cwd()
    out = []
    for k, entry in enumerate(doc):
        if not isinstance(entry, dict) or not isinstance(entry.get("claim_file"), str):
            raise SchemaError(f"portfolio[{k}] needs a claim_file")
        interp = entry.get("interpretations", {})
        if not isinstance(interp, dict) or not all(isinstance(v, str) for v in interp.values()):
            raise SchemaError(f"portfolio[{k}].interpretations must map terms to strings")
        name = entry.get("id", f"P{k + 1}")
        if not isinstance(name, str):
            raise SchemaError(f"portfolio[{k}].id must be a string")
        path = root / entry["claim_file"]
        try:
            data = path.read_bytes()
        except OSError as exc:
            raise SchemaError(f"cannot read claim file {path}: {exc}") from exc
        out.append(Patent(name, load_claim(data), dict(interp)))
    return out, vocabulary
