"""Weighted and flat coverage plus the waterfall gap decomposition.

All values are exact rationals in percent. Rounding happens only in the
``display`` helpers.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Mapping

from .claim_graph import ClaimDag, total_weight
from .errors import EmptyInput, IncompleteEff, IncompleteScores
from .lattice import SCALE, round_half_up
from .propagation import EffTable, compute_eff


def format_fixed(q: Fraction, places: int) -> str:
    """Round half up (away from zero) to ``places`` decimals."""
    scaled = round_half_up(q * 10 ** places)
    sign = "-" if scaled < 0 else ""
    digits = str(abs(scaled)).rjust(places + 1, "0")
    if places == 0:
        return sign + digits
    return f"{sign}{digits[:-places]}.{digits[-places:]}"


def rational_obj(q: Fraction) -> dict[str, int]:
    return {"num": q.numerator, "den": q.denominator}


@dataclass(frozen=True, order=True)
class CoverageValue:
    value: Fraction

    @property
    def display(self) -> str:
        return format_fixed(self.value, 1)

    def to_obj(self) -> dict[str, Any]:
        return {**rational_obj(self.value), "display": self.display}

    def __str__(self) -> str:
        return self.display


def weighted_sum(dag: ClaimDag, eff: Mapping[str, int]) -> Fraction:
    """Sum of weight times effective score, scores on the unit interval."""
    return sum((dag.weight(nid) * Fraction(eff[nid], SCALE) for nid in dag.ids), Fraction(0))


def weighted_coverage(dag: ClaimDag, eff: EffTable | Mapping[str, int]) -> CoverageValue:
    table = eff.eff if isinstance(eff, EffTable) else eff
    missing = [nid for nid in dag.ids if nid not in table]
    if missing:
        raise IncompleteEff(missing)
    return CoverageValue(weighted_sum(dag, table) / total_weight(dag) * 100)


def coverage_for(dag: ClaimDag, scores: object, theta: int) -> CoverageValue:
    return weighted_coverage(dag, compute_eff(dag, scores, theta))


def flat_coverage(scores: object) -> CoverageValue:
    """Unweighted mean of the raw scores, in percent."""
    values = list(getattr(scores, "scores", scores).values())
    if not values:
        raise EmptyInput("flat coverage of an empty score table")
    return CoverageValue(Fraction(sum(int(v) for v in values), SCALE * len(values)) * 100)


@dataclass(frozen=True)
class WaterfallRow:
    node: str
    kind: str  # "direct" or "cascade"
    delta_pp: Fraction

    def to_obj(self) -> dict[str, Any]:
        return {
            "node": self.node,
            "kind": self.kind,
            "delta_num": self.delta_pp.numerator,
            "delta_den": self.delta_pp.denominator,
            "display_pp": format_fixed(self.delta_pp, 3),
        }


@dataclass(frozen=True)
class WaterfallReport:
    rows: tuple[WaterfallRow, ...]
    total_pp: Fraction

    def to_obj(self) -> list[dict[str, Any]]:
        return [r.to_obj() for r in self.rows]


def waterfall(dag: ClaimDag, scores_base: object, scores_alt: object, theta: int) -> WaterfallReport:
    """Split the coverage gap between two constructions into per-node rows.

    A node that keeps its dependencies under the alternative contributes only
    a direct row. A node zeroed by a dependency contributes its counterfactual
    raw drop as direct and the rest of its loss as cascade. Rows follow input
    order with direct before cascade; zero rows are dropped.
    """
    base_beta = getattr(scores_base, "scores", scores_base)
    alt_beta = getattr(scores_alt, "scores", scores_alt)
    for table in (base_beta, alt_beta):
        missing = [nid for nid in dag.ids if nid not in table]
        if missing:
            raise IncompleteScores(missing)
    eff_b = compute_eff(dag, base_beta, theta).eff
    eff_a = compute_eff(dag, alt_beta, theta).eff
    scale = 100 / (total_weight(dag) * SCALE)
    rows: list[WaterfallRow] = []
    total = Fraction(0)
    for nid in dag.ids:
        w = dag.weight(nid)
        loss = w * (eff_b[nid] - eff_a[nid])
        if loss == 0:
            continue
        alt_met = all(eff_a[d] >= theta for d in dag.node(nid).deps)
        if alt_met:
            direct, cascade = loss, Fraction(0)
        else:
            direct = w * max(0, eff_b[nid] - alt_beta[nid])
            cascade = loss - direct
        for kind, amount in (("direct", direct), ("cascade", cascade)):
            if amount:
                rows.append(WaterfallRow(nid, kind, amount * scale))
        total += loss * scale
    return WaterfallReport(tuple(rows), total)


def coverage_report(dag: ClaimDag, scores: object, theta: int, *,
                    alt_scores: object | None = None, include_flat: bool = True) -> dict[str, Any]:
    """The JSON report shape for a single analysis run."""
    eff = compute_eff(dag, scores, theta)
    cov = weighted_coverage(dag, eff)
    report: dict[str, Any] = {
        "coverage": cov.to_obj(),
        "theta": int(eff.theta),
        "eff": {k: int(v) for k, v in eff.eff.items()},
    }
    if include_flat:
        report["flat"] = flat_coverage(scores).to_obj()
    if alt_scores is not None:
        wf = waterfall(dag, scores, alt_scores, theta)
        report["alt_coverage"] = coverage_for(dag, alt_scores, theta).to_obj()
        report["waterfall"] = wf.to_obj()
        report["waterfall_total"] = {**rational_obj(wf.total_pp), "display_pp": format_fixed(wf.total_pp, 3)}
    return report
