import json
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from claimlattice.claim_graph import ClaimNode, NodeType, load_claim
from claimlattice.errors import MissingNode, OutOfRange, SchemaError, UnknownNode
from claimlattice.scoring import (
    Corpus, EvidenceSet, MatcherConfig, Segment, best_match, fuse, lexical_score, load_evidence,
    load_score_table, score_dag, tokenize,
)
from expected import I1, I2

MANY = settings(max_examples=1000, deadline=None)
WORDS = ["filter", "signal", "rank", "memory", "circuit", "noise", "board", "delay", "sample", "notch"]


def test_tokenize():
    assert tokenize("DDR-3 Memory, ranks!") == ["ddr", "3", "memory", "ranks"]
    assert tokenize("   ") == []


def test_lexical_identity_and_disjoint():
    corpus = Corpus(["noise filter stage", "memory rank circuit"])
    assert lexical_score("noise filter stage", "noise filter stage", corpus) == 1
    assert lexical_score("noise filter", "memory rank", corpus) == 0
    assert lexical_score("", "noise", corpus) == 0
    assert lexical_score("unseen words", "noise", corpus) == 0


def test_lexical_partial_overlap_is_strictly_between():
    corpus = Corpus(["noise filter stage", "noise gate", "filter bank"])
    s = lexical_score("noise filter", "noise gate", corpus)
    assert 0 < s < 1


texts = st.lists(st.sampled_from(WORDS), max_size=6).map(" ".join)


@MANY
@given(st.lists(texts, min_size=1, max_size=5), texts, texts)
def test_lexical_symmetric_and_bounded(docs, a, b):
    corpus = Corpus(docs + [a, b])
    s = lexical_score(a, b, corpus)
    assert s == lexical_score(b, a, corpus)
    assert 0 <= s <= 1
    assert isinstance(s, Fraction)


def test_fuse_examples():
    assert fuse("1.0", "0.6", "0.5") == 8000
    alpha = Fraction(3, 10)
    assert fuse(0, 1, alpha) == 7000  # zero-vector self match keeps only the semantic share
    assert fuse("0.4321", "0.4321", "0.77") == 4321
    with pytest.raises(OutOfRange):
        fuse("1.1", "0", "1")
    with pytest.raises(OutOfRange):
        fuse("0.5", "0.5", "2")


@MANY
@given(st.fractions(0, 1), st.fractions(0, 1), st.fractions(0, 1))
def test_fuse_bounded(lex, sem, alpha):
    assert 0 <= fuse(lex, sem, alpha) <= 10000


def _node(text="x", nid="V"):
    return ClaimNode(nid, text, NodeType.FUNCTIONAL)


def test_best_match_singleton_and_ties():
    ev = EvidenceSet.of(["only"])
    assert best_match(_node(), ev, lambda n, s: 4200) == (4200, 0)
    ev2 = EvidenceSet.of(["a", "b", "c"])
    assert best_match(_node(), ev2, lambda n, s: [10, 30, 30][s.index]) == (30, 1)


@MANY
@given(st.lists(st.integers(0, 10000), min_size=1, max_size=8))
def test_best_match_equals_brute_force(row):
    ev = EvidenceSet.of([str(i) for i in range(len(row))])
    score, witness = best_match(_node(), ev, lambda n, s: row[s.index])
    assert score == max(row)
    assert witness == row.index(max(row))


def test_semantic_input_reproduces_external_score(read):
    dag = load_claim(read("filter.claim.json"))
    ev = EvidenceSet.of(["amplifier datasheet section one", "amplifier datasheet section two"])
    cfg = MatcherConfig.for_texts(dag, ev, alpha=0,
                                  semantic={("E1", 0): Fraction("0.58"), ("E1", 1): Fraction("0.41")})
    assert best_match(dag.node("E1"), ev, cfg.score) == (5800, 0)


def test_score_dag_lexical(read):
    dag = load_claim(read("filter.claim.json"))
    ev = EvidenceSet.of([dag.node("E1").text, "unrelated words entirely"])
    table = score_dag(dag, ev, MatcherConfig.for_texts(dag, ev))
    assert table.scores["E1"] == 10000 and table.witness["E1"] == 0


def test_evidence_validation(read):
    assert len(load_evidence(read("filter.evidence.json"))) == 2
    with pytest.raises(SchemaError):
        EvidenceSet(())
    with pytest.raises(SchemaError):
        EvidenceSet((Segment(1, "x"),))
    with pytest.raises(SchemaError):
        load_evidence(b'{"segments": [{"index": "0", "text": "x"}]}')


def test_load_score_tables(read):
    dag = load_claim(read("memory_module.claim.json"))
    assert dict(load_score_table(read("memory_i1.scores.json"), dag).scores) == I1
    assert dict(load_score_table(read("memory_i2.scores.json"), dag).scores) == I2


def _table(scores):
    return json.dumps({"schema_version": 1, "construction_id": "X", "scores": scores})


def test_score_table_errors(read):
    dag = load_claim(read("memory_module.claim.json"))
    missing = {k: v for k, v in I1.items() if k != "C7"}
    with pytest.raises(MissingNode) as info:
        load_score_table(_table(missing), dag)
    assert info.value.node == "C7"
    with pytest.raises(UnknownNode):
        load_score_table(_table(dict(I1, C99=1)), dag)
    with pytest.raises(OutOfRange):
        load_score_table(_table(dict(I1, C1=10001)), dag)
    with pytest.raises(SchemaError):
        load_score_table(_table(dict(I1, C1=0.9)), dag)
    with pytest.raises(SchemaError):
        load_score_table(b"[]", dag)
