"""Trusted certificate checker.

Kept deliberately small and self-contained. It re-derives every number from the
certificate's own claim record and never imports the generator's propagation or coverage code. Any input
bytes produce a result; nothing escapes as an exception.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Any

_REQUIRED = ("acyclic", "lattice", "propagation", "bounded", "coverage_equality")
_TYPES = ("preamble", "structural", "functional", "quantitative", "wherein", "coupling", "signal")
_TOP = 10000


@dataclass(frozen=True)
class VerificationResult:
    verified: bool
    reason: str | None = None
    locus: str | None = None

    def __str__(self) -> str:
        if self.verified:
            return "Verified"
        return f"Rejected({self.reason}: {self.locus})"


VERIFIED = VerificationResult(True)


class _Reject(Exception):
    def __init__(self, reason: str, locus: str) -> None:
        super().__init__(reason, locus)
        self.reason = reason
        self.locus = locus


def _is_int(x: Any) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def _rational(x: Any, where: str) -> Fraction:
    if not isinstance(x, dict) or set(x) != {"num", "den"}:
        raise _Reject("schema", where)
    n, d = x["num"], x["den"]
    if not (_is_int(n) and _is_int(d)) or d <= 0 or gcd(n, d) != 1:
        raise _Reject("schema", where)
    return Fraction(n, d)


def _want(obj: dict, key: str, kind: type) -> Any:
    val = obj.get(key)
    if not isinstance(val, kind) or isinstance(val, bool):
        raise _Reject("schema", key)
    return val


def _canon(obj: Any) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode("utf-8")


def _read_claim(claim: Any) -> tuple[list[str], dict[str, list[str]], dict[str, Fraction]]:
    """Node ids with their dependency lists, plus per-node weights."""
    if not isinstance(claim, dict) or set(claim) != {"nodes", "weights"}:
        raise _Reject("schema", "claim")
    weights_raw = claim["weights"]
    if not isinstance(weights_raw, dict) or set(weights_raw) != set(_TYPES):
        raise _Reject("schema", "claim.weights")
    weights = {}
    for t in _TYPES:
        w = _rational(weights_raw[t], f"claim.weights.{t}")
        if w <= 0:
            raise _Reject("schema", f"claim.weights.{t}")
        weights[t] = w
    nodes = claim["nodes"]
    if not isinstance(nodes, list) or not nodes:
        raise _Reject("schema", "claim.nodes")
    ids: list[str] = []
    deps: dict[str, list[str]] = {}
    node_w: dict[str, Fraction] = {}
    for i, n in enumerate(nodes):
        where = f"claim.nodes[{i}]"
        if not isinstance(n, dict) or set(n) != {"id", "type", "text", "deps", "ann"}:
            raise _Reject("schema", where)
        nid, t, d = n["id"], n["type"], n["deps"]
        if not isinstance(nid, str) or nid in deps or t not in _TYPES or not isinstance(n["text"], str):
            raise _Reject("schema", where)
        if not isinstance(n["ann"], list) or not all(isinstance(a, str) for a in n["ann"]):
            raise _Reject("schema", where)
        if not isinstance(d, list) or not all(isinstance(x, str) for x in d) or len(set(d)) != len(d):
            raise _Reject("schema", where)
        ids.append(nid)
        deps[nid] = list(d)
        node_w[nid] = weights[t]
    for nid in ids:
        for d in deps[nid]:
            if d not in deps:
                raise _Reject("acyclic", f"{nid} -> {d} (dangling)")
    return ids, deps, node_w


def _sort(ids: list[str], deps: dict[str, list[str]]) -> list[str]:
    placed: set[str] = set()
    order: list[str] = []
    remaining = list(ids)
    while remaining:
        progress = [v for v in remaining if all(d in placed for d in deps[v])]
        if not progress:
            raise _Reject("acyclic", ",".join(remaining))
        for v in progress:
            placed.add(v)
            order.append(v)
        remaining = [v for v in remaining if v not in placed]
    return order


def _int_map(raw: Any, ids: list[str], where: str) -> dict[str, int]:
    if not isinstance(raw, dict) or set(raw) != set(ids) or not all(_is_int(v) for v in raw.values()):
        raise _Reject("schema", where)
    return dict(raw)


def _audit(obligations: Any, fto: bool) -> dict[str, Any]:
    names = list(_REQUIRED) + (["no_match"] if fto else [])
    if not isinstance(obligations, list) or len(obligations) != len(names):
        raise _Reject("schema", "obligations")
    by_name = {}
    for want, ob in zip(names, obligations):
        if not isinstance(ob, dict) or set(ob) != {"name", "status", "detail"} or ob["name"] != want:
            raise _Reject("schema", f"obligations.{want}")
        by_name[want] = ob
    for name in names:
        status = by_name[name]["status"]
        if status == "assumed":
            raise _Reject("assumed_obligation", name)
        if status != "checked":
            raise _Reject("untrusted_status", name)
    return {n: ob["detail"] for n, ob in by_name.items()}


def _check(doc: Any, claim_bytes: bytes | None) -> None:
    if not isinstance(doc, dict):
        raise _Reject("schema", "root")
    if doc.get("schema_version") != 1 or isinstance(doc.get("schema_version"), bool):
        raise _Reject("schema", "schema_version")
    kind = doc.get("kind")
    if kind not in ("coverage", "fto_clear"):
        raise _Reject("schema", "kind")
    fto = kind == "fto_clear"
    expected_keys = {"schema_version", "kind", "claim", "claim_digest", "construction_id", "scores",
                     "theta", "eff", "coverage", "obligations", "generator"} | ({"fto"} if fto else set())
    if set(doc) != expected_keys:
        raise _Reject("schema", "fields")
    _want(doc, "construction_id", str)
    _want(doc, "generator", dict)
    details = _audit(doc["obligations"], fto)

    ids, deps, weight = _read_claim(doc["claim"])
    digest = _want(doc, "claim_digest", dict)
    if set(digest) != {"algorithm", "hex"} or digest["algorithm"] != "sha256":
        raise _Reject("claim_digest", "algorithm")
    if hashlib.sha256(_canon(doc["claim"])).hexdigest() != digest["hex"]:
        raise _Reject("claim_digest", "embedded claim")
    if claim_bytes is not None:
        from .claim_graph import canonical_claim_obj, load_claim
        try:
            supplied = canonical_claim_obj(load_claim(claim_bytes))
        except Exception:
            raise _Reject("claim_digest", "supplied claim file does not load") from None
        if hashlib.sha256(_canon(supplied)).hexdigest() != digest["hex"]:
            raise _Reject("claim_digest", "supplied claim file")

    order = _sort(ids, deps)
    claimed_order = details["acyclic"].get("order") if isinstance(details["acyclic"], dict) else None
    if not isinstance(claimed_order, list) or sorted(map(str, claimed_order)) != sorted(ids) \
            or len(claimed_order) != len(ids):
        raise _Reject("acyclic", "order")
    pos = {v: i for i, v in enumerate(claimed_order)}
    for v in ids:
        for d in deps[v]:
            if pos[d] >= pos[v]:
                raise _Reject("acyclic", f"{d} after {v}")

    scores = _int_map(doc["scores"], ids, "scores")
    for v in ids:
        if not 0 <= scores[v] <= _TOP:
            raise _Reject("lattice", v)
    theta = doc["theta"]
    if not _is_int(theta) or not 0 < theta <= _TOP:
        raise _Reject("lattice", "theta")

    eff = _int_map(doc["eff"], ids, "eff")
    mine: dict[str, int] = {}
    zeroed = []
    for v in order:
        blocked = [d for d in deps[v] if mine[d] < theta]
        mine[v] = 0 if blocked else scores[v]
        if blocked:
            zeroed.append(v)
    for v in ids:
        if eff[v] != mine[v]:
            raise _Reject("propagation", v)
    ledger = details["propagation"].get("zeroed") if isinstance(details["propagation"], dict) else None
    if not isinstance(ledger, list) or sorted(
            e.get("node") if isinstance(e, dict) else None for e in ledger) != sorted(zeroed):
        raise _Reject("propagation", "zeroing ledger")

    coverage = _rational(doc["coverage"], "coverage")
    if not 0 <= coverage <= 100:
        raise _Reject("bounded", "coverage")
    total_w = sum(weight.values(), Fraction(0))
    num = sum((weight[v] * Fraction(mine[v], _TOP) for v in ids), Fraction(0))
    if coverage != num / total_w * 100:
        raise _Reject("coverage_equality", "coverage")
    ce = details["coverage_equality"]
    if not isinstance(ce, dict) or _rational(ce.get("weighted_sum"), "weighted_sum") != num \
            or _rational(ce.get("total_weight"), "total_weight") != total_w:
        raise _Reject("coverage_equality", "detail")

    if fto:
        f = _want(doc, "fto", dict)
        node = f.get("node")
        if node not in scores or f.get("beta") != scores[node] or f.get("theta") != theta:
            raise _Reject("no_match", "fto")
        if not scores[node] < theta:
            raise _Reject("no_match", str(node))


def verify_certificate(document: bytes | str, claim_bytes: bytes | None = None) -> VerificationResult:
    """Check a serialized certificate. Never raises."""
    try:
        raw = document.decode("utf-8") if isinstance(document, (bytes, bytearray)) else document
        doc = json.loads(raw, parse_float=_no_float, parse_constant=_no_float)
    except Exception:
        return VerificationResult(False, "parse", "document")
    try:
        _check(doc, claim_bytes)
    except _Reject as r:
        return VerificationResult(False, r.reason, r.locus)
    except Exception as exc:  # defensive: malformed shapes the checks did not anticipate
        return VerificationResult(False, "schema", type(exc).__name__)
    return VERIFIED


def _no_float(text: str) -> Any:
    raise ValueError(f"non-integer number {text}")
