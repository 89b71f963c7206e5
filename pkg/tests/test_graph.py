import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qus.errors import GraphError
from qus.graph import (
    Walk,
    ancestors,
    d_separated,
    extend_graph,
    is_d_blocked,
    make_cdag,
    relatives,
    topological_order,
)

from oracles import dsep_by_walks, open_walk_pairs, random_cdag, small_subsets

CHAIN = make_cdag([], ["X", "Y", "Z"], [("X", "Y"), ("Y", "Z")])
NAMES = {"X": "Q(X)", "Y": "Q(Y|X)"}
EXTENDED = extend_graph(CHAIN, ["X", "Y"], NAMES)


def test_topological_orders():
    assert topological_order(CHAIN) == ["X", "Y", "Z"]
    assert topological_order(make_cdag(["b"], ["c", "a"], [])) == ["b", "c", "a"]
    order = topological_order(EXTENDED)
    assert order.index("Q(X)") < order.index("X")
    assert order.index("Q(Y|X)") < order.index("Y")
    reverse = make_cdag([], ["c", "b", "a"], [("a", "b"), ("b", "c")])
    assert topological_order(reverse) == ["a", "b", "c"]


def test_construction_rejects_bad_graphs():
    with pytest.raises(GraphError):
        make_cdag([], ["a", "b"], [("a", "b"), ("b", "a")])
    with pytest.raises(GraphError):
        make_cdag(["j"], ["a"], [("a", "j")])
    with pytest.raises(GraphError):
        make_cdag(["a"], ["a"], [])
    with pytest.raises(GraphError):
        make_cdag([], ["a"], [("a", "q")])


def test_relatives():
    assert relatives(CHAIN, "Z", "ancestors") == {"X", "Y", "Z"}
    assert relatives(CHAIN, "Z", "descendants") == {"Z"}
    assert relatives(CHAIN, "X", "descendants") == {"X", "Y", "Z"}
    assert relatives(EXTENDED, "Y", "parents") == {"X", "Q(Y|X)"}
    assert relatives(CHAIN, "Y", "children") == {"Z"}
    assert ancestors(CHAIN, ["X", "Y"]) == {"X", "Y"}
    with pytest.raises(GraphError):
        relatives(CHAIN, "W", "parents")
    with pytest.raises(ValueError):
        relatives(CHAIN, "X", "cousins")


def test_walk_blocking_examples():
    collider = make_cdag([], ["X", "Y", "Z"], [("X", "Y"), ("Z", "Y")])
    assert is_d_blocked(CHAIN, Walk.parse("X -> Y -> Z"), {"Y"})
    assert not is_d_blocked(CHAIN, Walk.parse("X -> Y -> Z"), set())
    assert is_d_blocked(collider, Walk.parse("X -> Y <- Z"), set())
    assert not is_d_blocked(collider, Walk.parse("X -> Y <- Z"), {"Y"})
    assert is_d_blocked(CHAIN, Walk.parse("X"), {"X"})
    assert not is_d_blocked(CHAIN, Walk.parse("X"), set())
    with pytest.raises(GraphError):
        is_d_blocked(CHAIN, Walk.parse("X <- Y"), set())
    with pytest.raises(GraphError):
        Walk.parse("X => Y")


def test_repeated_node_walk():
    # X -> Y <- X: Y is a collider in C, X repeats
    w = Walk.parse("X -> Y <- X")
    assert not is_d_blocked(CHAIN, w, {"Y"})
    assert is_d_blocked(CHAIN, w, set())


def test_chain_and_extended_dsep():
    assert d_separated(CHAIN, {"Z"}, {"X"}, {"Y"})
    assert not d_separated(CHAIN, {"Z"}, {"X"}, set())
    assert d_separated(EXTENDED, {"Z"}, {"X", "Q(X)", "Q(Y|X)"}, {"Y"})
    # J is always part of the target: Z reaches Q(Y|X) without conditioning
    assert not d_separated(EXTENDED, {"Z"}, set(), set())
    assert d_separated(EXTENDED, {"Z"}, set(), {"Y"})


def test_endpoint_in_c_blocks():
    for b in ({"Y"}, {"Z"}, {"X", "Y", "Z"}, set()):
        assert d_separated(CHAIN, {"X"}, b, {"X"})
        assert d_separated(EXTENDED, {"X"}, b, {"X"})
    assert d_separated(CHAIN, {"Z"}, {"X"}, {"X"})


def test_overlapping_sets_are_not_separated():
    assert not d_separated(CHAIN, {"X"}, {"X"}, set())


def test_asymmetry_witness():
    g = make_cdag(["j"], ["a", "b"], [("j", "a")])
    # b is isolated: no walk at all leaves it
    assert d_separated(g, {"b"}, {"a"}, set())
    assert not d_separated(g, {"a"}, {"b"}, set())


def test_unknown_node():
    with pytest.raises(GraphError):
        d_separated(CHAIN, {"Q"}, {"X"}, set())


def test_extend_graph():
    assert EXTENDED.inputs == ("Q(X)", "Q(Y|X)")
    assert EXTENDED.edges == CHAIN.edges | {("Q(X)", "X"), ("Q(Y|X)", "Y")}
    assert extend_graph(CHAIN, []) == CHAIN
    sink = extend_graph(CHAIN, ["Z"])
    assert sink.inputs == ("I_Z",) and len(sink.edges) == len(CHAIN.edges) + 1
    with pytest.raises(GraphError):
        extend_graph(sink, ["Z"])           # I_Z already exists
    with pytest.raises(GraphError):
        extend_graph(EXTENDED, ["Q(X)"])    # not an output


def _all_triples(g, size=2):
    nodes = list(g.nodes)
    for a in small_subsets(nodes, size, 1):
        for b in small_subsets(nodes, size):
            for c in small_subsets(nodes, size):
                yield a, b, c


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_reachability_matches_walk_oracle(seed):
    g = random_cdag(np.random.default_rng(seed), max_nodes=5)
    cache = {}
    for a, b, c in _all_triples(g):
        key = frozenset(c)
        if key not in cache:
            cache[key] = open_walk_pairs(g, c)
        assert d_separated(g, a, b, c) == dsep_by_walks(g, a, b, c, cache[key]), (g, a, b, c)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_symmetric_without_inputs(seed):
    g = random_cdag(np.random.default_rng(seed), max_nodes=6, max_inputs=0)
    for a, b, c in _all_triples(g):
        if b:
            assert d_separated(g, a, b, c) == d_separated(g, b, a, c)


def test_asymmetry_occurs_on_random_graphs():
    rng = np.random.default_rng(5)
    seen = False
    for _ in range(50):
        g = random_cdag(rng, max_nodes=5, max_inputs=2, min_nodes=3)
        if not g.inputs:
            continue
        for a, b, c in _all_triples(g, 1):
            if b and d_separated(g, a, b, c) != d_separated(g, b, a, c):
                seen = True
                break
        if seen:
            break
    assert seen
