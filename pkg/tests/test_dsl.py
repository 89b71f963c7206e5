import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qus.dsl import ParseError, format_weight, parse, serialize, tokenize
from qus.graph import d_separated
from qus.spaces import FnPoint, exponential, product

from corpus import GOLDEN, MALFORMED

CHAIN = (GOLDEN[0].parent / "chain.model").read_text()


def test_space_example():
    m = parse("space X = {0,1}")
    assert m.env.spaces["X"].points == ("0", "1")
    assert m.env.spaces["X"].name == "X"


def test_kernel_example():
    m = parse("space X = {0,1}\nspace Y = {0,1}\nkernel K : X -> Y = { 0: [0.5,0.5]; 1: [0.1,0.9] }")
    k = m.env.kernels["K"]
    assert k.matrix.tolist() == [[0.5, 0.5], [0.1, 0.9]]


def test_rows_may_come_in_any_order():
    m = parse("space X = {a,b}\nkernel K : X -> X = { b: [0, 1]; a: [1, 0] }")
    assert m.env.kernels["K"].matrix.tolist() == [[1, 0], [0, 1]]
    assert serialize(m).endswith("{ a: [1, 0]; b: [0, 1] }\n")


def test_chain_file_query():
    m = parse(CHAIN)
    q = m.queries[0]
    assert q.kind == "dsep" and q.a == ("Z",) and q.b == ("X",) and q.c == ("Y",)
    assert d_separated(m.env.graphs[q.target], q.a, q.b, q.c)


def test_comments_and_whitespace():
    text = "# header\nspace X = {0,1}   # trailing\n\n\tdist P : X = [1/4, 3/4]\n"
    m = parse(text)
    assert m.env.dists["P"].weights.tolist() == [0.25, 0.75]
    assert serialize(m) == "space X = {0, 1}\ndist P : X = [0.25, 0.75]\n"


def test_structural_spaces():
    m = parse("space X = {0,1}\nspace Y = {a,b,c}\nspace P = X * Y\nspace E = Y ^ X")
    assert m.env.spaces["P"] == product([m.env.spaces["X"], m.env.spaces["Y"]])
    assert m.env.spaces["E"] == exponential(m.env.spaces["X"], m.env.spaces["Y"])
    assert len(m.env.spaces["E"]) == 9


def test_function_and_tuple_keys():
    text = (GOLDEN[0].parent / "exponential.model").read_text()
    m = parse(text)
    k = m.env.kernels["EVAL"]
    x, e = k.domain.factors
    for xp, f in k.domain.points:
        assert isinstance(f, FnPoint)
        assert k((xp, f))[f(xp)] == 1.0


def test_weight_precision():
    assert float(format_weight(1 / 3)) == 1 / 3
    m = parse("space X = {0,1,2}\ndist P : X = [1/3, 1/3, 1/3]")
    again = parse(serialize(m))
    assert again.env.dists["P"].weights.tolist() == m.env.dists["P"].weights.tolist()


def test_empty_model():
    assert serialize(parse("")) == ""
    assert serialize(parse("# only a comment\n")) == ""


def test_weights_are_renormalized_within_tolerance():
    m = parse("space X = {0,1}\ndist P : X = [0.3333333333, 0.6666666667]")
    assert abs(m.env.dists["P"].weights.sum() - 1.0) < 1e-15
    with pytest.raises(ParseError):
        parse("space X = {0,1}\ndist P : X = [0.333, 0.666]")


def test_tokens_carry_positions():
    toks = tokenize("space X\n  = {0}")
    assert [(t.text, t.line, t.col) for t in toks[:3]] == [("space", 1, 1), ("X", 1, 7), ("=", 2, 3)]


def test_family_levels():
    m = parse((GOLDEN[0].parent / "markov_family.model").read_text())
    fam = m.env.families["CH"]
    levels = fam.levels()
    assert len(levels) == 5 and len(levels[-1].codomain) == 32


@pytest.mark.parametrize("path", GOLDEN, ids=lambda p: p.name)
def test_golden_round_trip(path):
    text = path.read_text()
    assert serialize(parse(text)) == text


def test_golden_corpus_size():
    assert len(GOLDEN) >= 15


@pytest.mark.parametrize("name,text", MALFORMED, ids=[n for n, _ in MALFORMED])
def test_malformed_is_rejected_with_position(name, text):
    with pytest.raises(ParseError) as info:
        parse(text)
    assert info.value.line >= 1 and info.value.col >= 1


def test_malformed_suite_size():
    assert len(MALFORMED) >= 30


@settings(max_examples=300, deadline=None)
@given(st.text(alphabet=st.sampled_from(list("spacedistkrnlgh XYZ01{}[](),;:=*^/<>|_-#.\n\t")), max_size=80))
def test_parser_totality(text):
    try:
        parse(text)
    except ParseError as exc:
        assert exc.line >= 1 and exc.col >= 1


@settings(max_examples=200, deadline=None)
@given(st.text(max_size=60))
def test_parser_totality_arbitrary_text(text):
    try:
        parse(text)
    except ParseError:
        pass


def _random_model(rng) -> str:
    lines, spaces = [], []
    for i in range(int(rng.integers(1, 4))):
        n = int(rng.integers(1, 4))
        lines.append(f"space S{i} = {{{','.join(f'a{j}' for j in range(n))}}}")
        spaces.append((f"S{i}", [f"a{j}" for j in range(n)]))
    for i in range(int(rng.integers(0, 3))):
        name, pts = spaces[rng.integers(len(spaces))]
        w = rng.dirichlet(np.ones(len(pts)))
        lines.append(f"dist D{i} : {name} = [{', '.join(repr(float(x)) for x in w)}]")
    for i in range(int(rng.integers(0, 3))):
        (dn, dp), (cn, cp) = (spaces[rng.integers(len(spaces))] for _ in range(2))
        rows = "; ".join(
            f"{p}: [{', '.join(repr(float(x)) for x in rng.dirichlet(np.ones(len(cp))))}]"
            for p in rng.permutation(dp)
        )
        lines.append(f"kernel K{i} : {dn} -> {cn} = {{ {rows} }}")
    return "\n".join(lines) + "\n"


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_serialize_is_idempotent(seed):
    m = parse(_random_model(np.random.default_rng(seed)))
    once = serialize(m)
    again = parse(once)
    assert serialize(again) == once
    for name, k in m.env.kernels.items():
        assert np.array_equal(again.env.kernels[name].matrix, k.matrix)
    for name, d in m.env.dists.items():
        assert np.array_equal(again.env.dists[name].weights, d.weights)
