"""Model-description language.

A ``.model`` file is a sequence of declarations::

    space X = {0,1}
    space XY = X * Y
    space E = Y ^ X                     # functions X -> Y
    dist PX : X = [0.5, 0.5]
    kernel PYX : X -> Y = { 0: [0.8, 0.2]; 1: [0.2, 0.8] }
    graph G { inputs: ; outputs: X, Y; edges: X -> Y }
    cbn M on G { X : PX; Y : PYX }
    family F depth 3 { base: PX; step: iid }
    query dsep G : {Y} _||_ {X} | {}
    query tci M : {Y} _||_ {X} | {}

Names are unique per kind and must be declared before use.  Kernel row
keys are points of the domain (tuples ``(a,b)``, functions ``<a,b>``) and
every domain point needs exactly one row.  Weights may be decimals or
``p/q`` fractions; a row must sum to 1 within ``1e-9`` and is renormalized.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Union

import numpy as np

from .errors import QusError
from .extension import chain_family, iid_conditionals, markov_conditionals
from .graph import Cdag
from .cbn import CbnModel
from .monad import Dist, Kernel
from .spaces import FinSpace, atoms, exponential, label, nodes_space, product

WEIGHT_SUM_TOL = 1e-9

KEYWORDS = {
    "space", "dist", "kernel", "graph", "cbn", "on", "family", "depth", "query",
    "inputs", "outputs", "edges", "base", "step", "iid", "dsep", "tci",
}


class ParseError(QusError):
    """Lexical, syntactic or validation error at a source position."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(message)
        self.message = message
        self.line = line
        self.col = col

    def __str__(self):
        return f"{self.line}:{self.col}: {self.message}"


@dataclass(frozen=True)
class Span:
    line: int
    col: int


@dataclass(frozen=True)
class Token:
    kind: str        # NAME, NUMBER, PUNCT, EOF
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<indep>_\|\|_)
  | (?P<arrow>->)
  | (?P<number>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[{}()\[\]<>,;:=*^/|])
    """,
    re.VERBOSE,
)


def tokenize(text: str) -> list[Token]:
    tokens = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "number":
            tokens.append(Token("NUMBER", m.group(), line, col))
        elif kind == "name":
            tokens.append(Token("NAME", m.group(), line, col))
        elif kind in ("punct", "arrow", "indep"):
            tokens.append(Token("PUNCT", m.group(), line, col))
        pos = m.end()
    tokens.append(Token("EOF", "", line, pos - line_start + 1))
    return tokens


# --- AST ----------------------------------------------------------------

@dataclass(frozen=True)
class AtomSet:
    labels: tuple
    span: Span = field(default=Span(0, 0), compare=False)


@dataclass(frozen=True)
class SpaceRef:
    name: str
    span: Span = field(default=Span(0, 0), compare=False)


@dataclass(frozen=True)
class Prod:
    factors: tuple
    span: Span = field(default=Span(0, 0), compare=False)


@dataclass(frozen=True)
class Power:
    """``base ^ exponent``: all maps ``exponent -> base``."""

    base: Any
    exponent: Any
    span: Span = field(default=Span(0, 0), compare=False)


SpaceExpr = Union[AtomSet, SpaceRef, Prod, Power]


@dataclass(frozen=True)
class SpaceDecl:
    name: str
    expr: SpaceExpr
    span: Span = field(default=Span(0, 0), compare=False)


@dataclass(frozen=True)
class DistDecl:
    name: str
    space: SpaceExpr
    weights: tuple
    span: Span = field(default=Span(0, 0), compare=False)


@dataclass(frozen=True)
class KernelDecl:
    name: str
    domain: SpaceExpr
    codomain: SpaceExpr
    rows: tuple      # ((canonical key label, weights), ...) in domain order
    span: Span = field(default=Span(0, 0), compare=False)


@dataclass(frozen=True)
class GraphDecl:
    name: str
    inputs: tuple
    outputs: tuple
    edges: tuple
    span: Span = field(default=Span(0, 0), compare=False)


@dataclass(frozen=True)
class Binding:
    node: str
    kind: str        # "space" for input nodes, "ref" for dist / kernel names
    target: str
    span: Span = field(default=Span(0, 0), compare=False)


@dataclass(frozen=True)
class CbnDecl:
    name: str
    graph: str
    bindings: tuple
    span: Span = field(default=Span(0, 0), compare=False)


@dataclass(frozen=True)
class FamilyDecl:
    name: str
    depth: int
    base: str
    step: str        # a kernel name or "iid"
    span: Span = field(default=Span(0, 0), compare=False)


@dataclass(frozen=True)
class QueryDecl:
    kind: str        # "dsep" or "tci"
    target: str
    a: tuple
    b: tuple
    c: tuple
    span: Span = field(default=Span(0, 0), compare=False)


Declaration = Union[SpaceDecl, DistDecl, KernelDecl, GraphDecl, CbnDecl, FamilyDecl, QueryDecl]


@dataclass
class Env:
    spaces: dict = field(default_factory=dict)
    dists: dict = field(default_factory=dict)
    kernels: dict = field(default_factory=dict)
    graphs: dict = field(default_factory=dict)
    cbns: dict = field(default_factory=dict)
    families: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Family:
    """A conditional family with its declared depth."""

    base: Kernel
    conds: Any
    depth: int

    def levels(self) -> list[Kernel]:
        return chain_family(self.conds, self.base, self.depth)


@dataclass(frozen=True)
class ModelFile:
    declarations: tuple = ()
    env: Env = field(default_factory=Env, compare=False, repr=False)

    @property
    def queries(self) -> list[QueryDecl]:
        return [d for d in self.declarations if isinstance(d, QueryDecl)]


# --- parser -------------------------------------------------------------

class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def error(self, message: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.tok
        return ParseError(message, tok.line, tok.col)

    def at(self, text: str) -> bool:
        return self.tok.kind in ("PUNCT", "NAME") and self.tok.text == text

    def advance(self) -> Token:
        tok = self.tok
        if tok.kind != "EOF":
            self.i += 1
        return tok

    def expect(self, text: str) -> Token:
        if not self.at(text):
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        return self.advance()

    def name(self, what: str = "name") -> Token:
        tok = self.tok
        if tok.kind != "NAME" or tok.text in KEYWORDS:
            found = tok.text or "end of input"
            raise self.error(f"expected {what}, found {found!r}")
        return self.advance()

    def span(self, tok: Token | None = None) -> Span:
        tok = tok or self.tok
        return Span(tok.line, tok.col)

    def parse(self) -> list:
        decls = []
        while self.tok.kind != "EOF":
            decls.append(self.declaration())
        return decls

    def declaration(self):
        tok = self.tok
        if tok.kind != "NAME":
            raise self.error(f"expected a declaration, found {tok.text!r}")
        rule = {
            "space": self.space_decl, "dist": self.dist_decl, "kernel": self.kernel_decl,
            "graph": self.graph_decl, "cbn": self.cbn_decl, "family": self.family_decl,
            "query": self.query_decl,
        }.get(tok.text)
        if rule is None:
            raise self.error(f"unknown declaration keyword {tok.text!r}")
        self.advance()
        return rule(self.span(tok))

    # space expressions
    def space_expr(self):
        if self.at("{"):
            return self.atom_set()
        return self.space_term()

    def atom_set(self) -> AtomSet:
        start = self.expect("{")
        labels = [self.atom()]
        while self.at(","):
            self.advance()
            labels.append(self.atom())
        self.expect("}")
        seen = set()
        for lab, tok in labels:
            if lab in seen:
                raise self.error(f"duplicate atom {lab!r}", tok)
            seen.add(lab)
        return AtomSet(tuple(lab for lab, _ in labels), self.span(start))

    def atom(self):
        tok = self.tok
        if tok.kind in ("NAME", "NUMBER"):
            self.advance()
            return tok.text, tok
        raise self.error(f"expected an atom, found {tok.text or 'end of input'!r}")

    def space_term(self):
        start = self.tok
        factors = [self.space_factor()]
        while self.at("*"):
            self.advance()
            factors.append(self.space_factor())
        if len(factors) == 1:
            return factors[0]
        return Prod(tuple(factors), self.span(start))

    def space_factor(self):
        start = self.tok
        base = self.space_primary()
        if self.at("^"):
            self.advance()
            return Power(base, self.space_primary(), self.span(start))
        return base

    def space_primary(self):
        if self.at("("):
            self.advance()
            inner = self.space_term()
            self.expect(")")
            return inner
        tok = self.name("a space name")
        return SpaceRef(tok.text, self.span(tok))

    def space_decl(self, span):
        name = self.name("a space name").text
        self.expect("=")
        return SpaceDecl(name, self.space_expr(), span)

    # weights and points
    def number(self) -> float:
        tok = self.tok
        if tok.kind != "NUMBER":
            raise self.error(f"expected a number, found {tok.text or 'end of input'!r}")
        self.advance()
        if self.at("/"):
            self.advance()
            den = self.tok
            if den.kind != "NUMBER" or not den.text.isdigit() or not tok.text.isdigit():
                raise self.error("fractions need integer numerator and denominator", den)
            self.advance()
            if int(den.text) == 0:
                raise self.error("zero denominator", den)
            return float(Fraction(int(tok.text), int(den.text)))
        return float(tok.text)

    def weights(self) -> tuple:
        start = self.expect("[")
        values = [self.number()]
        while self.at(","):
            self.advance()
            values.append(self.number())
        self.expect("]")
        total = sum(values)
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            raise self.error(f"weights sum to {total!r}, not 1", start)
        return tuple(values), start

    def point(self) -> str:
        """A point literal, returned as its canonical label."""
        for open_, close in (("(", ")"), ("<", ">")):
            if self.at(open_):
                self.advance()
                parts = [self.point()]
                while self.at(","):
                    self.advance()
                    parts.append(self.point())
                self.expect(close)
                return open_ + ",".join(parts) + close
        return self.atom()[0]

    def dist_decl(self, span):
        name = self.name("a distribution name").text
        self.expect(":")
        space = self.space_term()
        self.expect("=")
        w, tok = self.weights()
        return DistDecl(name, space, w, span), tok

    def kernel_decl(self, span):
        name = self.name("a kernel name").text
        self.expect(":")
        dom = self.space_term()
        self.expect("->")
        cod = self.space_term()
        self.expect("=")
        self.expect("{")
        rows = []
        while not self.at("}"):
            key_tok = self.tok
            key = self.point()
            self.expect(":")
            w, wtok = self.weights()
            rows.append((key, w, key_tok, wtok))
            if not self.at(";"):
                break
            self.advance()
        self.expect("}")
        return KernelDecl(name, dom, cod, (), span), rows

    def names(self, stop: str) -> list[Token]:
        out = []
        if self.at(stop):
            return out
        out.append(self.name("a node name"))
        while self.at(","):
            self.advance()
            out.append(self.name("a node name"))
        return out

    def graph_decl(self, span):
        name = self.name("a graph name").text
        self.expect("{")
        self.expect("inputs")
        self.expect(":")
        inputs = self.names(";")
        self.expect(";")
        self.expect("outputs")
        self.expect(":")
        outputs = self.names(";")
        self.expect(";")
        self.expect("edges")
        self.expect(":")
        edges = []
        if not self.at("}") and not self.at(";"):
            edges.append(self.edge())
            while self.at(","):
                self.advance()
                edges.append(self.edge())
        if self.at(";"):
            self.advance()
        self.expect("}")
        return GraphDecl(name, tuple(t.text for t in inputs), tuple(t.text for t in outputs),
                         tuple((a.text, b.text) for a, b in edges), span), (inputs, outputs, edges)

    def edge(self):
        a = self.name("a node name")
        self.expect("->")
        b = self.name("a node name")
        return a, b

    def cbn_decl(self, span):
        name = self.name("a model name").text
        self.expect("on")
        graph = self.name("a graph name")
        self.expect("{")
        bindings = []
        while not self.at("}"):
            node = self.name("a node name")
            self.expect(":")
            if self.at("space"):
                self.advance()
                target = self.name("a space name")
                bindings.append(Binding(node.text, "space", target.text, self.span(node)))
            else:
                target = self.name("a distribution or kernel name")
                bindings.append(Binding(node.text, "ref", target.text, self.span(node)))
            if not self.at(";"):
                break
            self.advance()
        self.expect("}")
        return CbnDecl(name, graph.text, tuple(bindings), span), graph

    def family_decl(self, span):
        name = self.name("a family name").text
        self.expect("depth")
        tok = self.tok
        if tok.kind != "NUMBER" or not tok.text.isdigit():
            raise self.error("family depth must be a nonnegative integer")
        self.advance()
        self.expect("{")
        self.expect("base")
        self.expect(":")
        base = self.name("a distribution name")
        self.expect(";")
        self.expect("step")
        self.expect(":")
        if self.at("iid"):
            step = self.advance()
        else:
            step = self.name("a kernel name or 'iid'")
        if self.at(";"):
            self.advance()
        self.expect("}")
        return FamilyDecl(name, int(tok.text), base.text, step.text, span), (base, step)

    def node_set(self):
        self.expect("{")
        toks = self.names("}")
        self.expect("}")
        return toks

    def query_decl(self, span):
        tok = self.tok
        if not (self.at("dsep") or self.at("tci")):
            raise self.error(f"expected 'dsep' or 'tci', found {tok.text or 'end of input'!r}")
        kind = self.advance().text
        target = self.name("a graph or model name")
        self.expect(":")
        a = self.node_set()
        self.expect("_||_")
        b = self.node_set()
        self.expect("|")
        c = self.node_set()
        names = lambda ts: tuple(t.text for t in ts)
        return QueryDecl(kind, target.text, names(a), names(b), names(c), span), (target, a, b, c)


# --- resolution ---------------------------------------------------------

def _pos(tok_or_span) -> tuple[int, int]:
    return tok_or_span.line, tok_or_span.col


class _Resolver:
    def __init__(self):
        self.env = Env()
        self.names = {k: set() for k in ("space", "dist", "kernel", "graph", "cbn", "family")}

    def fail(self, message, where):
        raise ParseError(message, *_pos(where))

    def declare(self, kind, name, where):
        if name in self.names[kind]:
            self.fail(f"{kind} {name!r} is already declared", where)
        self.names[kind].add(name)

    def space(self, expr) -> FinSpace:
        try:
            if isinstance(expr, AtomSet):
                return atoms("{" + ",".join(expr.labels) + "}", expr.labels)
            if isinstance(expr, SpaceRef):
                if expr.name not in self.env.spaces:
                    self.fail(f"unknown space {expr.name!r}", expr.span)
                return self.env.spaces[expr.name]
            if isinstance(expr, Prod):
                return product([self.space(f) for f in expr.factors])
            if isinstance(expr, Power):
                return exponential(self.space(expr.exponent), self.space(expr.base))
        except ParseError:
            raise
        except QusError as exc:
            self.fail(str(exc), expr.span)
        raise TypeError(f"not a space expression: {expr!r}")

    def space_decl(self, d: SpaceDecl):
        self.declare("space", d.name, d.span)
        if isinstance(d.expr, AtomSet):
            try:
                sp = atoms(d.name, d.expr.labels)
            except QusError as exc:
                self.fail(str(exc), d.expr.span)
        else:
            sp = self.space(d.expr)
        self.env.spaces[d.name] = sp
        return d

    def dist_decl(self, d: DistDecl, wtok):
        self.declare("dist", d.name, d.span)
        sp = self.space(d.space)
        if len(d.weights) != len(sp):
            self.fail(f"distribution {d.name!r} needs {len(sp)} weights, got {len(d.weights)}", wtok)
        w = np.array(d.weights, dtype=np.float64)
        self.env.dists[d.name] = Dist(sp, w / w.sum())
        return d

    def kernel_decl(self, d: KernelDecl, rows):
        self.declare("kernel", d.name, d.span)
        dom, cod = self.space(d.domain), self.space(d.codomain)
        by_pos = {}
        for key, w, key_tok, wtok in rows:
            try:
                point = dom.lookup(key)
            except QusError:
                self.fail(f"{key!r} is not a point of {dom.name}", key_tok)
            i = dom.position(point)
            if i in by_pos:
                self.fail(f"duplicate row for {key!r}", key_tok)
            if len(w) != len(cod):
                self.fail(f"row {key!r} needs {len(cod)} weights, got {len(w)}", wtok)
            by_pos[i] = (label(point), w)
        missing = [label(p) for i, p in enumerate(dom.points) if i not in by_pos]
        if missing:
            self.fail(f"kernel {d.name!r} has no row for {missing[0]!r}", d.span)
        ordered = tuple(by_pos[i] for i in range(len(dom)))
        m = np.array([w for _, w in ordered], dtype=np.float64).reshape(len(dom), len(cod))
        self.env.kernels[d.name] = Kernel(dom, cod, m / m.sum(axis=1, keepdims=True))
        return KernelDecl(d.name, d.domain, d.codomain, ordered, d.span)

    def graph_decl(self, d: GraphDecl, toks):
        self.declare("graph", d.name, d.span)
        inputs, outputs, edges = toks
        seen = {}
        for t in inputs + outputs:
            if t.text in seen:
                self.fail(f"node {t.text!r} is listed twice", t)
            seen[t.text] = t
        for a, b in edges:
            for t in (a, b):
                if t.text not in seen:
                    self.fail(f"edge mentions unknown node {t.text!r}", t)
            if b.text in d.inputs:
                self.fail(f"edge {a.text} -> {b.text} points into an input node", b)
        try:
            g = Cdag(d.inputs, d.outputs, frozenset(d.edges))
        except QusError as exc:
            self.fail(str(exc), d.span)
        self.env.graphs[d.name] = g
        return d

    def cbn_decl(self, d: CbnDecl, graph_tok):
        self.declare("cbn", d.name, d.span)
        g = self.env.graphs.get(d.graph)
        if g is None:
            self.fail(f"unknown graph {d.graph!r}", graph_tok)
        bound = {}
        for b in d.bindings:
            if b.node not in g:
                self.fail(f"{b.node!r} is not a node of graph {d.graph!r}", b.span)
            if b.node in bound:
                self.fail(f"node {b.node!r} is bound twice", b.span)
            bound[b.node] = b
        for v in g.nodes:
            if v not in bound:
                self.fail(f"node {v!r} of graph {d.graph!r} has no binding", d.span)
        spaces, kernels = {}, {}
        for v in g.inputs:
            b = bound[v]
            if b.kind != "space":
                self.fail(f"input node {v!r} must be bound to 'space <name>'", b.span)
            if b.target not in self.env.spaces:
                self.fail(f"unknown space {b.target!r}", b.span)
            spaces[v] = self.env.spaces[b.target]
        for v in g.outputs:
            b = bound[v]
            if b.kind != "ref":
                self.fail(f"output node {v!r} needs a distribution or kernel", b.span)
            if b.target in self.env.kernels:
                k = self.env.kernels[b.target]
            elif b.target in self.env.dists:
                k = Kernel.from_dist(self.env.dists[b.target])
            else:
                self.fail(f"unknown distribution or kernel {b.target!r}", b.span)
            spaces[v] = k.codomain
            kernels[v] = k
        rank = {v: i for i, v in enumerate(g._order)}
        for v in g.outputs:
            ps = sorted(g.parents(v), key=rank.get)
            want = nodes_space([spaces[p] for p in ps])
            if kernels[v].domain != want:
                parents = ", ".join(ps) or "no parents"
                self.fail(
                    f"mechanism {bound[v].target!r} of {v!r} has domain {kernels[v].domain.name}, "
                    f"but the parents ({parents}) give {want.name}",
                    bound[v].span,
                )
        self.env.cbns[d.name] = CbnModel(g, spaces, kernels)
        return d

    def family_decl(self, d: FamilyDecl, toks):
        self.declare("family", d.name, d.span)
        base_tok, step_tok = toks
        base = self.env.dists.get(d.base)
        if base is None:
            self.fail(f"unknown distribution {d.base!r}", base_tok)
        if d.step == "iid":
            conds = iid_conditionals(base)
        else:
            k = self.env.kernels.get(d.step)
            if k is None:
                self.fail(f"unknown kernel {d.step!r}", step_tok)
            if k.domain != base.space or k.codomain != base.space:
                self.fail(f"step kernel {d.step!r} must map {base.space.name} to itself", step_tok)
            conds = markov_conditionals(k)
        self.env.families[d.name] = Family(Kernel.from_dist(base), conds, d.depth)
        return d

    def query_decl(self, d: QueryDecl, toks):
        target, a, b, c = toks
        if d.kind == "dsep":
            g = self.env.graphs.get(d.target)
            if g is None:
                self.fail(f"unknown graph {d.target!r}", target)
        else:
            m = self.env.cbns.get(d.target)
            if m is None:
                self.fail(f"unknown model {d.target!r}", target)
            g = m.graph
        for t in a + b + c:
            if t.text not in g:
                self.fail(f"{t.text!r} is not a node", t)
        return d


def parse(text: str) -> ModelFile:
    """Parse and validate model text; every error is a :class:`ParseError` with a position."""
    try:
        p = _Parser(text)
        raw = p.parse()
    except RecursionError:
        raise ParseError("expression nested too deeply", 1, 1) from None
    r = _Resolver()
    decls = []
    for item in raw:
        if isinstance(item, tuple):
            d, extra = item
        else:
            d, extra = item, None
        try:
            if isinstance(d, SpaceDecl):
                decls.append(r.space_decl(d))
            elif isinstance(d, DistDecl):
                decls.append(r.dist_decl(d, extra))
            elif isinstance(d, KernelDecl):
                decls.append(r.kernel_decl(d, extra))
            elif isinstance(d, GraphDecl):
                decls.append(r.graph_decl(d, extra))
            elif isinstance(d, CbnDecl):
                decls.append(r.cbn_decl(d, extra))
            elif isinstance(d, FamilyDecl):
                decls.append(r.family_decl(d, extra))
            else:
                decls.append(r.query_decl(d, extra))
        except ParseError:
            raise
        except QusError as exc:
            raise ParseError(str(exc), *_pos(d.span)) from None
    return ModelFile(tuple(decls), r.env)


# --- serialization ------------------------------------------------------

def format_weight(w: float) -> str:
    return format(float(w), ".17g")


def _weights(ws) -> str:
    return "[" + ", ".join(format_weight(w) for w in ws) + "]"


def space_text(expr, top: bool = True) -> str:
    if isinstance(expr, AtomSet):
        return "{" + ", ".join(expr.labels) + "}"
    if isinstance(expr, SpaceRef):
        return expr.name
    if isinstance(expr, Prod):
        inner = " * ".join(space_text(f, False) for f in expr.factors)
        return inner if top else f"({inner})"
    if isinstance(expr, Power):
        text = f"{space_text(expr.base, False)} ^ {space_text(expr.exponent, False)}"
        return text if top else f"({text})"
    raise TypeError(f"not a space expression: {expr!r}")


def _set(names) -> str:
    return "{" + ", ".join(names) + "}"


def declaration_text(d) -> str:
    if isinstance(d, SpaceDecl):
        return f"space {d.name} = {space_text(d.expr)}"
    if isinstance(d, DistDecl):
        return f"dist {d.name} : {space_text(d.space)} = {_weights(d.weights)}"
    if isinstance(d, KernelDecl):
        rows = "; ".join(f"{key}: {_weights(w)}" for key, w in d.rows)
        return f"kernel {d.name} : {space_text(d.domain)} -> {space_text(d.codomain)} = {{ {rows} }}"
    if isinstance(d, GraphDecl):
        edges = ", ".join(f"{a} -> {b}" for a, b in d.edges)
        return (f"graph {d.name} {{ inputs: {', '.join(d.inputs)}; outputs: {', '.join(d.outputs)}; "
                f"edges: {edges} }}")
    if isinstance(d, CbnDecl):
        parts = "; ".join(
            f"{b.node} : space {b.target}" if b.kind == "space" else f"{b.node} : {b.target}"
            for b in d.bindings
        )
        return f"cbn {d.name} on {d.graph} {{ {parts} }}"
    if isinstance(d, FamilyDecl):
        return f"family {d.name} depth {d.depth} {{ base: {d.base}; step: {d.step} }}"
    if isinstance(d, QueryDecl):
        return f"query {d.kind} {d.target} : {_set(d.a)} _||_ {_set(d.b)} | {_set(d.c)}"
    raise TypeError(f"not a declaration: {d!r}")


def serialize(m: ModelFile) -> str:
    """Canonical text: one declaration per line, declaration order kept."""
    return "".join(declaration_text(d) + "\n" for d in m.declarations)


def kernel_text(name: str, k: Kernel) -> str:
    """A kernel as a single ``kernel`` declaration, named by its spaces."""
    rows = "; ".join(f"{label(z)}: {_weights(r)}" for z, r in zip(k.domain.points, k.matrix))
    return f"kernel {name} : {k.domain.name} -> {k.codomain.name} = {{ {rows} }}"
