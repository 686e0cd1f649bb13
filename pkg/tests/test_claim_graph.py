import json
from fractions import Fraction

import pytest
from hypothesis import given, settings

from claimlattice.claim_graph import (
    ClaimDag, ClaimNode, NodeType, dump_claim, fraction_to_decimal, load_claim, topo_order, total_weight,
)
from claimlattice.errors import CycleError, DanglingDep, DuplicateId, NonPositiveWeight, SchemaError
from expected import DEPTHS, MEMORY_TOTAL_WEIGHT
from strategies import dags

MANY = settings(max_examples=1000, deadline=None)


def doc(nodes, **extra):
    return json.dumps({"schema_version": 1, "nodes": nodes, **extra})


def node(i, deps=(), t="structural"):
    return {"id": i, "type": t, "text": f"text {i}", "deps": list(deps)}


def test_memory_module(read):
    dag = load_claim(read("memory_module.claim.json"))
    assert len(dag) == 15
    assert total_weight(dag) == MEMORY_TOTAL_WEIGHT
    order, depth = topo_order(dag)
    assert depth == DEPTHS
    assert depth["C13"] == 6
    assert order.index("C12") < order.index("C13")


def test_total_weight_examples(read):
    assert total_weight(load_claim(read("running_example.claim.json"))) == Fraction("3.3")
    assert total_weight(load_claim(doc([node("P", t="preamble")]))) == Fraction("0.3")


def test_single_node():
    dag = load_claim(doc([node("A")]))
    assert topo_order(dag) == (["A"], {"A": 0})


def test_cycle_reported():
    with pytest.raises(CycleError) as info:
        load_claim(doc([node("C1", ["C2"]), node("C2", ["C1"])]))
    assert info.value.cycle == ["C1", "C2", "C1"]


def test_self_loop():
    with pytest.raises(CycleError) as info:
        load_claim(doc([node("A", ["A"])]))
    assert info.value.cycle == ["A", "A"]


def test_structural_errors():
    with pytest.raises(DanglingDep):
        load_claim(doc([node("A", ["Z"])]))
    with pytest.raises(DuplicateId):
        load_claim(doc([node("A"), node("A")]))
    with pytest.raises(DuplicateId):
        load_claim(doc([node("A"), node("B", ["A", "A"])]))
    with pytest.raises(SchemaError):
        load_claim(doc([]))
    with pytest.raises(SchemaError):
        load_claim(doc([node("A", t="bogus")]))
    with pytest.raises(SchemaError):
        load_claim(b"{not json")
    with pytest.raises(SchemaError):
        load_claim(json.dumps({"nodes": [node("A")]}))
    with pytest.raises(NonPositiveWeight):
        load_claim(doc([node("A")], weights={"structural": "0"}))
    with pytest.raises(SchemaError):
        load_claim(doc([node("A")], weights={"structural": 1.5}))


def test_weight_override():
    dag = load_claim(doc([node("A"), node("B", t="wherein")], weights={"wherein": "4.25"}))
    assert total_weight(dag) == Fraction("5.25")


def test_stable_order_and_chain():
    dag = load_claim(doc([node("A"), node("B")]))
    assert topo_order(dag)[0] == ["A", "B"]
    chain = load_claim(doc([node("C", ["B"]), node("B", ["A"]), node("A")]))
    order, depth = topo_order(chain)
    assert order == ["A", "B", "C"] and [depth[x] for x in order] == [0, 1, 2]


def test_ids_case_sensitive():
    dag = load_claim(doc([node("a"), node("A", ["a"])]))
    assert dag.ids == ("a", "A")


def test_fraction_to_decimal():
    assert fraction_to_decimal(Fraction(3, 10)) == "0.3"
    assert fraction_to_decimal(Fraction(3)) == "3"
    assert fraction_to_decimal(Fraction(-1, 8)) == "-0.125"
    with pytest.raises(ValueError):
        fraction_to_decimal(Fraction(1, 3))


@MANY
@given(dags(random_weights=True))
def test_round_trip(dag):
    again = load_claim(dump_claim(dag))
    assert again == dag


@MANY
@given(dags())
def test_topo_order_is_linear_extension(dag):
    order, depth = topo_order(dag)
    assert sorted(order) == sorted(dag.ids)
    pos = {v: i for i, v in enumerate(order)}
    for n in dag.nodes:
        for d in n.deps:
            assert pos[d] < pos[n.id]
            assert depth[d] < depth[n.id]
        assert depth[n.id] == (1 + max(depth[d] for d in n.deps) if n.deps else 0)


@MANY
@given(dags())
def test_topo_order_ties_follow_input_order(dag):
    order, _ = topo_order(dag)
    placed = set()
    for nid in order:
        ready_earlier = [
            n.id for n in dag.nodes
            if n.id not in placed and all(d in placed for d in n.deps)
        ]
        assert nid == ready_earlier[0]
        placed.add(nid)


def test_node_type_enumeration():
    assert len(NodeType) == 7
    assert ClaimDag([ClaimNode("X", "t", NodeType.SIGNAL)]).weight("X") == Fraction(3, 2)
