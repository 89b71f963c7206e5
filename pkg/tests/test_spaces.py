import itertools

import pytest
from hypothesis import given, settings, strategies as st

from qus.errors import CapExceeded, SpaceError
from qus.spaces import (
    BOOL,
    UNIT,
    FinEvent,
    FinSpace,
    FnPoint,
    Tagged,
    atoms,
    coproduct,
    copairing,
    curry,
    distribute,
    evaluate,
    event_to_indicator,
    exponential,
    indicator_to_event,
    injection,
    label,
    nodes_space,
    pairing,
    product,
    projection,
    uncurry,
)

B = atoms("B", ["0", "1"])
ABC = atoms("L", ["a", "b", "c"])
THREE = atoms("T", ["0", "1", "2"])


def test_product_examples():
    p = product([B, ABC])
    assert len(p) == 6
    assert p.points[0] == ("0", "a") and p.points[-1] == ("1", "c")
    assert len(product([B, B, B])) == 8
    unary = product([B])
    assert [pt[0] for pt in unary.points] == list(B.points)


def test_product_projections_match_slots():
    p = product([B, ABC, THREE])
    for i in range(3):
        pr = projection(p, i)
        assert all(pr(pt) == pt[i] for pt in p.points)


def test_product_cap(monkeypatch):
    monkeypatch.setenv("QUS_CAP", "7")
    with pytest.raises(CapExceeded):
        product([B, B, B])
    monkeypatch.setenv("QUS_CAP", "8")
    assert len(product([B, B, B])) == 8


def test_coproduct_examples():
    c = coproduct([B, atoms("A", ["a"])])
    assert c.points == (Tagged(0, "0"), Tagged(0, "1"), Tagged(1, "a"))
    assert len(coproduct([atoms("X", ["x"])])) == 1
    twice = coproduct([B, B])
    assert len(twice) == 4 and len(set(twice.points)) == 4


def test_coproduct_universal_property():
    c = coproduct([B, ABC])
    f = FnPoint.from_callable(B, THREE, lambda x: "2" if x == "1" else "0")
    g = FnPoint.constant(ABC, THREE, "1")
    h = copairing([f, g], c)
    assert all(h(injection(c, 0)(x)) == f(x) for x in B.points)
    assert all(h(injection(c, 1)(x)) == g(x) for x in ABC.points)


def test_exponential_examples():
    assert len(exponential(THREE, B)) == 8
    one = atoms("One", ["*"])
    e = exponential(one, B)
    assert len(e) == 2 and [f("*") for f in e.points] == ["0", "1"]
    assert len(exponential(B, THREE)) == 9


def test_exponential_lexicographic():
    e = exponential(B, THREE)
    tables = [f.table for f in e.points]
    assert tables == sorted(tables, key=lambda t: tuple(THREE.position(v) for v in t))
    assert tables[0] == ("0", "0") and tables[1] == ("0", "1")


def test_exponential_cap(monkeypatch):
    monkeypatch.setenv("QUS_CAP", "100")
    with pytest.raises(CapExceeded):
        exponential(atoms("Z", [str(i) for i in range(7)]), B)


def test_eval_examples():
    assert evaluate(FnPoint.identity(B), "1") == "1"
    assert all(evaluate(FnPoint.constant(THREE, ABC, "a"), z) == "a" for z in THREE.points)
    swap = FnPoint.from_callable(B, B, lambda x: "1" if x == "0" else "0")
    assert evaluate(swap, "0") == "1"
    with pytest.raises(SpaceError):
        evaluate(swap, "2")


def test_fnpoint_rejects_partial_or_foreign_tables():
    with pytest.raises(SpaceError):
        FnPoint(B, B, ("0",))
    with pytest.raises(SpaceError):
        FnPoint(B, B, ("0", "7"))


def test_indicator_examples():
    f = event_to_indicator(FinEvent(B, {"0"}))
    assert f.table == ("1", "0")
    assert event_to_indicator(FinEvent(THREE, set())).table == ("0", "0", "0")
    assert event_to_indicator(FinEvent(THREE, set(THREE.points))).table == ("1", "1", "1")


def test_indicator_round_trip_all_events():
    for r in range(len(THREE) + 1):
        for members in itertools.combinations(THREE.points, r):
            ev = FinEvent(THREE, set(members))
            assert indicator_to_event(event_to_indicator(ev)) == ev
    for f in exponential(THREE, BOOL).points:
        assert event_to_indicator(indicator_to_event(f)) == f


def test_indicator_inverse_needs_two_point_codomain():
    with pytest.raises(SpaceError):
        indicator_to_event(FnPoint.constant(B, THREE, "0"))


def test_event_must_be_subset():
    with pytest.raises(SpaceError):
        FinEvent(B, {"2"})


def test_curry_eval():
    xy = product([B, THREE])
    g = FnPoint.from_callable(xy, ABC, lambda p: "abc"[(int(p[0]) + int(p[1])) % 3])
    h = curry(g)
    for x, y in xy.points:
        assert evaluate(h(x), y) == g((x, y))
    assert uncurry(h, xy) == g


def test_distributivity_is_bijective():
    d = distribute(B, [THREE, ABC])
    assert len(d.domain) == len(d.codomain) == 2 * (3 + 3)
    assert len(set(d.table)) == len(d.table)


def test_pairing():
    f = FnPoint.identity(B)
    g = FnPoint.constant(B, ABC, "c")
    p = pairing([f, g])
    assert p("1") == ("1", "c")


def test_distinct_points_required():
    with pytest.raises(SpaceError):
        atoms("X", ["0", "0"])


def test_nodes_space():
    assert nodes_space([]) == UNIT
    assert nodes_space([B]) == B
    assert nodes_space([B, THREE]) == product([B, THREE])


def test_labels_and_lookup():
    p = product([B, exponential(B, B)])
    for pt in p.points:
        assert p.lookup(label(pt)) == pt
    assert label(("0", ("1", "a"))) == "(0,(1,a))"


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(1, 4), min_size=1, max_size=3))
def test_product_cardinality(sizes):
    spaces = [atoms(f"S{i}", [str(j) for j in range(n)]) for i, n in enumerate(sizes)]
    p = product(spaces)
    n = 1
    for s in sizes:
        n *= s
    assert len(p) == n == len(set(p.points))
    assert p.shape == tuple(sizes)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 3), st.integers(1, 3))
def test_exponential_cardinality(nz, nx):
    z = atoms("Z", [str(i) for i in range(nz)])
    x = atoms("X", [str(i) for i in range(nx)])
    e = exponential(z, x)
    assert len(e) == nx ** nz
    assert all(isinstance(f, FnPoint) and f.domain == z and f.codomain == x for f in e.points)


def test_finspace_equality_is_by_name_and_points():
    assert FinSpace("X", ("0", "1")) == FinSpace("X", ("0", "1"))
    assert FinSpace("X", ("0", "1")) != FinSpace("Y", ("0", "1"))
    assert hash(FinSpace("X", ("0", "1"))) == hash(FinSpace("X", ("0", "1")))
