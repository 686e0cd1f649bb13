import json

import pytest
from hypothesis import given, settings

from claimlattice.claim_graph import load_claim
from claimlattice.errors import IncompleteScores
from claimlattice.oracles import OracleBudget, oracle_claim_strength, oracle_kleene
from claimlattice.propagation import claim_strength, compute_eff, kleene_fixpoint
from claimlattice.scoring import load_score_table
from expected import I1, I2, I2_ZEROED
from strategies import dag_and_scores, dag_and_two_ordered_scores, thetas

MANY = settings(max_examples=1000, deadline=None)


@pytest.fixture(scope="module")
def memory(read):
    return load_claim(read("memory_module.claim.json"))


def chain(n=3):
    nodes = [{"id": c, "type": "structural", "text": c, "deps": [p] if p else []}
             for p, c in zip([None] + list("ABCDEFG")[: n - 1], list("ABCDEFG")[:n])]
    return load_claim(json.dumps({"schema_version": 1, "nodes": nodes}))


def test_running_example(read):
    dag = load_claim(read("running_example.claim.json"))
    scores = load_score_table(read("running_example.scores.json"), dag)
    assert compute_eff(dag, scores, 6500).eff == dict(scores.scores)


def test_i1_and_i2(memory):
    assert compute_eff(memory, I1, 6500).eff == I1
    eff2 = compute_eff(memory, I2, 6500).eff
    assert {k for k, v in eff2.items() if v == 0} == I2_ZEROED
    assert eff2["C11"] == 0 and I2["C11"] == 7800
    assert claim_strength(memory, I2)["C11"] > 0  # meet model keeps it; threshold model zeroes it


def test_claim_strength_examples(memory):
    assert claim_strength(memory, I1)["C13"] == 7700
    assert claim_strength(memory, I1)["C1"] == 9000
    dag = chain(4)
    s = claim_strength(dag, {"A": 9000, "B": 4500, "C": 9900, "D": 8000})
    assert s == {"A": 9000, "B": 4500, "C": 4500, "D": 4500}


def test_kleene_examples(memory):
    res = kleene_fixpoint(memory, I1, 6500)
    assert res.eff.eff == compute_eff(memory, I1, 6500).eff
    assert res.iterations <= 8
    c = chain(3)
    assert kleene_fixpoint(c, {"A": 9000, "B": 9000, "C": 9000}, 6500).iterations <= 4
    zero = kleene_fixpoint(memory, {k: 0 for k in I1}, 6500)
    assert zero.iterations == 1 and set(zero.eff.eff.values()) == {0}
    assert oracle_kleene(memory, I2, 6500, OracleBudget(max_nodes=15)) == compute_eff(memory, I2, 6500).eff


def test_incomplete(memory):
    partial = dict(I1)
    del partial["C5"]
    for fn in (lambda: compute_eff(memory, partial, 6500), lambda: claim_strength(memory, partial),
               lambda: kleene_fixpoint(memory, partial, 6500)):
        with pytest.raises(IncompleteScores):
            fn()


@MANY
@given(dag_and_scores(), thetas)
def test_eff_dichotomy_and_bound(pair, theta):
    dag, scores = pair
    eff = compute_eff(dag, scores, theta).eff
    for n in dag.nodes:
        assert eff[n.id] in (scores[n.id], 0)
        assert eff[n.id] <= scores[n.id]
        if any(eff[d] < theta for d in n.deps):
            assert eff[n.id] == 0
        else:
            assert eff[n.id] == scores[n.id]


@MANY
@given(dag_and_two_ordered_scores(), thetas)
def test_eff_monotone(triple, theta):
    dag, lo, hi = triple
    a, b = compute_eff(dag, lo, theta).eff, compute_eff(dag, hi, theta).eff
    assert all(a[v] <= b[v] for v in dag.ids)


@MANY
@given(dag_and_scores(max_nodes=10))
def test_weakest_link_and_oracle(pair):
    dag, scores = pair
    s = claim_strength(dag, scores)
    for n in dag.nodes:
        assert s[n.id] <= scores[n.id]
        for d in n.deps:
            assert s[n.id] <= s[d]
    assert s == oracle_claim_strength(dag, scores)


@MANY
@given(dag_and_two_ordered_scores())
def test_claim_strength_monotone(triple):
    dag, lo, hi = triple
    a, b = claim_strength(dag, lo), claim_strength(dag, hi)
    assert all(a[v] <= b[v] for v in dag.ids)


@MANY
@given(dag_and_scores(max_nodes=10), thetas)
def test_kleene_agrees_with_topological_pass(pair, theta):
    dag, scores = pair
    res = kleene_fixpoint(dag, scores, theta)
    direct = compute_eff(dag, scores, theta).eff
    assert res.eff.eff == direct == oracle_kleene(dag, scores, theta)
    assert res.iterations <= dag.height + 2
