"""Certificate generation and canonical encoding.

The generator is untrusted: it computes results with the production modules
and records them together with an obligation ledger. ``verifier`` checks the
result without importing any of that code.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from . import __version__
from .claim_graph import ClaimDag, canonical_claim_obj, topo_order, total_weight
from .coverage import rational_obj, weighted_coverage, weighted_sum
from .errors import ValidationError
from .lattice import SCALE, BasisPoints
from .propagation import compute_eff

SCHEMA_VERSION = 1
DIGEST_ALGORITHM = "sha256"
OBLIGATIONS = ("acyclic", "lattice", "propagation", "bounded", "coverage_equality")
FTO_OBLIGATION = "no_match"
CHECKED = "checked"
ASSUMED = "assumed"
EXTENSION = ".cert.json"


def _reject_floats(obj: Any, path: str = "$") -> None:
    if isinstance(obj, float):
        raise ValueError(f"float at {path}; certificates carry integers and rationals only")
    if isinstance(obj, dict):
        for k, v in obj.items():
            if not isinstance(k, str):
                raise ValueError(f"non-string key at {path}")
            _reject_floats(v, f"{path}.{k}")
    elif isinstance(obj, (list, tuple)):
        for i, v in enumerate(obj):
            _reject_floats(v, f"{path}[{i}]")


def canonical_bytes(obj: Any) -> bytes:
    """Sorted keys, no whitespace, UTF-8, no floats."""
    _reject_floats(obj)
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False,
                      allow_nan=False).encode("utf-8")


def claim_digest(dag: ClaimDag) -> dict[str, str]:
    data = canonical_bytes(canonical_claim_obj(dag))
    return {"algorithm": DIGEST_ALGORITHM, "hex": hashlib.sha256(data).hexdigest()}


@dataclass(frozen=True)
class Certificate:
    data: dict[str, Any]

    @property
    def coverage(self) -> Fraction:
        c = self.data["coverage"]
        return Fraction(c["num"], c["den"])

    @property
    def kind(self) -> str:
        return self.data["kind"]

    def to_obj(self) -> dict[str, Any]:
        return json.loads(canonical_bytes(self.data))


def canonical_serialize(cert: Certificate | dict[str, Any]) -> bytes:
    return canonical_bytes(cert.data if isinstance(cert, Certificate) else cert)


def parse_certificate(document: bytes | str) -> Certificate:
    if isinstance(document, bytes):
        document = document.decode("utf-8")
    obj = json.loads(document)
    if not isinstance(obj, dict):
        raise ValueError("certificate must be a JSON object")
    _reject_floats(obj)
    return Certificate(obj)


def _obligation(name: str, detail: Any) -> dict[str, Any]:
    return {"name": name, "status": CHECKED, "detail": detail}


def generate_certificate(dag: ClaimDag, scores: object, theta: int, *,
                         fto_node: str | None = None) -> Certificate:
    """Build a certificate for the coverage of ``scores`` at ``theta``.

    With ``fto_node`` the certificate also records a per-element no-match
    witness: that node's score is below theta, so no evidence assignment can
    satisfy every limitation.
    """
    beta = getattr(scores, "scores", scores)
    construction = getattr(scores, "construction_id", "unnamed")
    eff = compute_eff(dag, beta, theta)
    cov = weighted_coverage(dag, eff)
    order, depth = topo_order(dag)
    zeroed = []
    for nid in order:
        blocked = [d for d in dag.node(nid).deps if eff.eff[d] < eff.theta]
        if blocked:
            zeroed.append({"node": nid, "blocked_by": blocked})
    values = [int(v) for v in beta.values()]
    obligations = [
        _obligation("acyclic", {"order": order, "depth": depth}),
        _obligation("lattice", {"min": min(values), "max": max(values), "scanned": len(values),
                                "range": [0, SCALE]}),
        _obligation("propagation", {"zeroed": zeroed}),
        _obligation("bounded", {"lower": rational_obj(Fraction(0)), "upper": rational_obj(Fraction(100)),
                                "value": rational_obj(cov.value)}),
        _obligation("coverage_equality", {
            "weighted_sum": rational_obj(weighted_sum(dag, eff.eff)),
            "total_weight": rational_obj(total_weight(dag)),
        }),
    ]
    data: dict[str, Any] = {
        "schema_version": SCHEMA_VERSION,
        "kind": "coverage",
        "claim": canonical_claim_obj(dag),
        "claim_digest": claim_digest(dag),
        "construction_id": construction,
        "scores": {nid: int(beta[nid]) for nid in dag.ids},
        "theta": int(eff.theta),
        "eff": {nid: int(v) for nid, v in eff.eff.items()},
        "coverage": rational_obj(cov.value),
        "obligations": obligations,
        "generator": {"tool": "claimlattice", "version": __version__},
    }
    if fto_node is not None:
        if fto_node not in dag:
            raise ValidationError(f"unknown node {fto_node!r}")
        b = BasisPoints(beta[fto_node])
        if b >= eff.theta:
            raise ValidationError(f"{fto_node} meets theta; no per-element impossibility")
        data["kind"] = "fto_clear"
        data["fto"] = {"node": fto_node, "beta": int(b), "theta": int(eff.theta)}
        obligations.append(_obligation(FTO_OBLIGATION, {"node": fto_node, "beta": int(b),
                                                        "theta": int(eff.theta)}))
    return Certificate(data)
