import json
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from claimlattice.analyses import (
    Patent, consistency, fto, load_portfolio, load_sensitivity_input, normalize, sensitivity,
)
from claimlattice.certificate import canonical_serialize
from claimlattice.claim_graph import ClaimDag, ClaimNode, NodeType, load_claim
from claimlattice.errors import IncompleteScores, MissingInterpretation, UnknownTerm
from claimlattice.oracles import oracle_full_coverage_exists
from claimlattice.scoring import ScoreTable, load_score_table
from claimlattice.verifier import verify_certificate
from expected import I1
from strategies import dags

MANY = settings(max_examples=1000, deadline=None)
DERIVED = json.loads((Path(__file__).parent / "derivations" / "c12_only.expected.json").read_text())


@pytest.fixture(scope="module")
def memory(read):
    return load_claim(read("memory_module.claim.json"))


# --- fto -----------------------------------------------------------------


def test_fto_filter_clear(read):
    dag = load_claim(read("filter.claim.json"))
    res = fto(dag, load_score_table(read("filter_fto.scores.json"), dag), 6500)
    assert res.clear and res.node == "E1" and res.beta == 5800 and res.theta == 6500
    assert verify_certificate(canonical_serialize(res.certificate), read("filter.claim.json")).verified
    matrix = {"E1": [5800, 5100, 2000, 4000], "E2": [4400, 3000, 1200, 900]}
    assert not oracle_full_coverage_exists(dag, matrix, 6500)


def test_fto_risk_sorted(memory):
    res = fto(memory, I1, 6500)
    assert not res.clear
    margins = [g.margin for g in res.gaps]
    assert margins == sorted(margins)
    assert res.gaps[0].node == "C13"
    assert res.gaps[0].path[-1] == "C13" and res.gaps[0].path[0] == "C1"
    obj = res.to_obj()
    assert obj["result"] == "Risk" and "certificate" not in obj


def test_fto_incomplete(memory):
    with pytest.raises(IncompleteScores):
        fto(memory, {"C1": 1}, 6500)


def test_fto_four_node_instance():
    nodes = [ClaimNode("A", "a", NodeType.PREAMBLE), ClaimNode("B", "b", NodeType.STRUCTURAL, ("A",)),
             ClaimNode("C", "c", NodeType.FUNCTIONAL, ("B",)), ClaimNode("D", "d", NodeType.WHEREIN, ("A",))]
    dag = ClaimDag(nodes)
    matrix = {"A": [9000, 100], "B": [7000, 8000], "C": [6000, 6400], "D": [9900, 0]}
    beta = {k: max(v) for k, v in matrix.items()}
    res = fto(dag, beta, 6500)
    assert res.clear and res.node == "C"
    assert not oracle_full_coverage_exists(dag, matrix, 6500)


@st.composite
def small_instances(draw):
    dag = draw(dags(max_nodes=5))
    m = draw(st.integers(1, 4))
    values = st.one_of(st.integers(0, 10000), st.sampled_from([6499, 6500]))
    matrix = {nid: draw(st.lists(values, min_size=m, max_size=m)) for nid in dag.ids}
    return dag, matrix


@MANY
@given(small_instances())
def test_fto_sound_against_brute_force(instance):
    dag, matrix = instance
    beta = {k: max(v) for k, v in matrix.items()}
    res = fto(dag, beta, 6500)
    exists = oracle_full_coverage_exists(dag, matrix, 6500)
    if res.clear:
        assert beta[res.node] < 6500
        assert not exists
        assert verify_certificate(canonical_serialize(res.certificate)).verified
    else:
        assert all(b >= 6500 for b in beta.values())
        assert exists


# --- sensitivity ---------------------------------------------------------


def test_sensitivity_case_study(memory, read, fixtures):
    base, alts, perts = load_sensitivity_input(read("memory_sensitivity.json"), memory, fixtures)
    rep = sensitivity(memory, base, alts, perts, 6500, 70)
    assert set(rep.determinative) == {"first number of ranks", "rank translation"}
    assert rep.threshold_construction == "I1"
    c12 = rep.perturbed["rank translation"]
    assert c12.coverage.display == DERIVED["coverage_display"] == "68.7"
    assert [c12.coverage.value.numerator, c12.coverage.value.denominator] == DERIVED["coverage"]
    assert not c12.satisfied
    assert [o.satisfied for o in rep.constructions] == [True, False]
    assert rep.breakers == {"I2": ("C3", "C11", "C12", "C13")}
    assert rep.monotonicity_flags == ()
    for o in rep.constructions:
        assert verify_certificate(canonical_serialize(o.certificate)).verified


def test_sensitivity_none_satisfied(memory):
    low = ScoreTable("low", {k: 1000 for k in I1})
    rep = sensitivity(memory, low, [], {}, 6500, 70)
    assert rep.threshold_construction is None and rep.determinative == ()


def test_sensitivity_threshold_prefers_smaller_scope(memory):
    base = ScoreTable("I1", dict(I1))
    narrower = ScoreTable("I3", dict(I1, C8=6000))
    rep = sensitivity(memory, base, [narrower], {}, 6500, 70)
    assert rep.threshold_construction == "I3"
    tie = ScoreTable("I4", dict(I1))
    assert sensitivity(memory, base, [tie], {}, 6500, 70).threshold_construction == "I1"


def test_sensitivity_monotonicity_flag_and_errors(memory):
    base = ScoreTable("I1", dict(I1))
    rep = sensitivity(memory, base, [], {"rank translation": {"C12": 9000}}, 6500, 70)
    assert rep.monotonicity_flags == (("rank translation", "C12"),)
    with pytest.raises(UnknownTerm):
        sensitivity(memory, base, [], {"no such term": {"C12": 1}}, 6500, 70)
    with pytest.raises(UnknownTerm):
        sensitivity(memory, base, [], {"rank translation": {"C3": 1}}, 6500, 70)
    with pytest.raises(IncompleteScores):
        sensitivity(memory, ScoreTable("x", {"C1": 1}), [], {}, 6500, 70)


def test_c12_derivation_script_is_current():
    import subprocess
    import sys
    script = Path(__file__).parent / "derivations" / "c12_only.py"
    out = subprocess.run([sys.executable, str(script)], capture_output=True, text=True, check=True)
    assert json.loads(out.stdout) == DERIVED


# --- consistency ---------------------------------------------------------


def test_consistency_fixtures(read, fixtures):
    pf, vocab = load_portfolio(read("portfolio.json"), fixtures)
    res = consistency(pf, vocab)
    assert not res.consistent
    assert (res.patent_i, res.patent_j, res.term) == ("P1", "P2", "rank translation")
    pf2, vocab2 = load_portfolio(read("portfolio_revised.json"), fixtures)
    res2 = consistency(pf2, vocab2)
    assert res2.consistent
    assert ("DDR memory devices", 0, 1) in res2.checked and ("rank translation", 0, 1) in res2.checked


def test_consistency_single_and_missing(memory):
    interp = {"rank translation": "x", "first number of ranks": "y", "DDR memory devices": "z"}
    assert consistency([Patent("P1", memory, interp)]).consistent
    with pytest.raises(MissingInterpretation):
        consistency([Patent("P1", memory, {"rank translation": "x"})])


def test_normalize():
    assert normalize("  Foo\t BAR\n baz ") == "foo bar baz"
    assert normalize("Straße") == normalize("STRASSE")


def _patent(name, terms, interp):
    nodes = [ClaimNode(f"{name}{i}", "t", NodeType.STRUCTURAL, (), frozenset({t})) for i, t in enumerate(terms)]
    return Patent(name, ClaimDag(nodes), interp)


@MANY
@given(st.lists(st.dictionaries(st.sampled_from("abcd"), st.sampled_from(["x", "X ", "y"]), min_size=1),
                min_size=1, max_size=4), st.randoms())
def test_consistency_verdict_independent_of_order(maps, rnd):
    portfolio = [_patent(f"P{i}", sorted(m), m) for i, m in enumerate(maps)]
    shuffled = list(portfolio)
    rnd.shuffle(shuffled)
    vocab = sorted({t for m in maps for t in m})
    r1 = consistency(portfolio, vocab)
    r2 = consistency(shuffled, list(reversed(vocab)))
    assert r1.consistent == r2.consistent
    brute = all(normalize(a[t]) == normalize(b[t]) for a in maps for b in maps for t in a if t in b)
    assert r1.consistent == brute
    if not r1.consistent:
        assert normalize(r1.interp_i) != normalize(r1.interp_j)
