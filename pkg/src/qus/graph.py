"""Conditional DAGs and asymmetric d-separation.

A CDAG has input nodes ``J`` (never the head of an edge) and output nodes
``V``.  ``A`` is d-separated from ``B`` given ``C`` when every walk from ``A``
to ``J | B`` is blocked by ``C``; the inclusion of ``J`` makes the relation
asymmetric.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

from .errors import GraphError

INPUT_PREFIX = "I_"


@dataclass(frozen=True)
class Cdag:
    inputs: tuple
    outputs: tuple
    edges: frozenset

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        object.__setattr__(self, "edges", frozenset(tuple(e) for e in self.edges))
        nodes = self.inputs + self.outputs
        if len(set(nodes)) != len(nodes):
            dup = sorted({n for n in nodes if nodes.count(n) > 1})
            raise GraphError(f"duplicate or shared input/output nodes: {dup}")
        known = set(nodes)
        for w, v in self.edges:
            if w not in known or v not in known:
                raise GraphError(f"edge {w}->{v} mentions an unknown node")
            if v in self.inputs:
                raise GraphError(f"edge {w}->{v} points into input node {v}")
            if w == v:
                raise GraphError(f"self-loop at {v}")
        object.__setattr__(self, "_order", tuple(self._kahn()))

    @property
    def nodes(self) -> tuple:
        return self.inputs + self.outputs

    def __contains__(self, v):
        return v in self.inputs or v in self.outputs

    def _kahn(self) -> list:
        order_of = {v: i for i, v in enumerate(self.nodes)}
        indeg = {v: 0 for v in self.nodes}
        children = {v: [] for v in self.nodes}
        for w, v in self.edges:
            indeg[v] += 1
            children[w].append(v)
        ready = sorted((v for v in self.nodes if indeg[v] == 0), key=order_of.get)
        out = []
        while ready:
            v = ready.pop(0)
            out.append(v)
            for c in children[v]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    ready.append(c)
            ready.sort(key=order_of.get)
        if len(out) != len(self.nodes):
            stuck = [v for v in self.nodes if indeg[v] > 0]
            raise GraphError(f"directed cycle through {stuck}")
        return out

    def parents(self, v) -> set:
        self._require(v)
        return {w for w, u in self.edges if u == v}

    def children(self, v) -> set:
        self._require(v)
        return {u for w, u in self.edges if w == v}

    def _require(self, v):
        if v not in self:
            raise GraphError(f"unknown node {v!r}")

    @cached_property
    def _adj(self):
        pa = {v: [] for v in self.nodes}
        ch = {v: [] for v in self.nodes}
        for w, v in sorted(self.edges):
            pa[v].append(w)
            ch[w].append(v)
        return pa, ch


def make_cdag(inputs: Sequence, outputs: Sequence, edges: Iterable) -> Cdag:
    return Cdag(tuple(inputs), tuple(outputs), frozenset(edges))


def topological_order(g: Cdag) -> list:
    """Kahn order, ties broken by declaration order (inputs first, then outputs)."""
    return list(g._order)


def _closure(g: Cdag, v, up: bool) -> set:
    g._require(v)
    pa, ch = g._adj
    step = pa if up else ch
    seen = {v}
    stack = [v]
    while stack:
        u = stack.pop()
        for w in step[u]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return seen


def relatives(g: Cdag, v, kind: str) -> set:
    """``parents``, ``children``, ``ancestors`` or ``descendants`` of ``v``.

    Ancestors and descendants include ``v`` itself (the trivial walk).
    """
    if kind == "parents":
        return g.parents(v)
    if kind == "children":
        return g.children(v)
    if kind == "ancestors":
        return _closure(g, v, up=True)
    if kind == "descendants":
        return _closure(g, v, up=False)
    raise ValueError(f"unknown relative kind {kind!r}")


def ancestors(g: Cdag, nodes: Iterable) -> set:
    out: set = set()
    for v in nodes:
        out |= _closure(g, v, up=True)
    return out


@dataclass(frozen=True)
class Walk:
    """Nodes ``v0..vn`` and, per step, whether the edge points forward (``v_{k-1} -> v_k``)."""

    nodes: tuple
    forward: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "forward", tuple(self.forward))
        if not self.nodes:
            raise GraphError("a walk has at least one node")
        if len(self.forward) != len(self.nodes) - 1:
            raise GraphError("walk needs one orientation per step")

    @classmethod
    def parse(cls, text: str) -> "Walk":
        """Read ``"X -> Y <- Z"`` style notation."""
        tokens = text.split()
        nodes = tokens[0::2]
        arrows = tokens[1::2]
        if any(a not in ("->", "<-") for a in arrows):
            raise GraphError(f"bad walk {text!r}")
        return cls(tuple(nodes), tuple(a == "->" for a in arrows))

    def validate(self, g: Cdag) -> None:
        for v in self.nodes:
            g._require(v)
        for k, fwd in enumerate(self.forward):
            a, b = self.nodes[k], self.nodes[k + 1]
            edge = (a, b) if fwd else (b, a)
            if edge not in g.edges:
                raise GraphError(f"walk step {a}{' -> ' if fwd else ' <- '}{b} is not an edge")


def is_d_blocked(g: Cdag, walk: Walk, c: Iterable) -> bool:
    """Whether ``walk`` is blocked by ``c``: an endpoint in ``c``, a non-collider in ``c``,
    or a collider outside ``c``."""
    walk.validate(g)
    c = set(c)
    if walk.nodes[0] in c or walk.nodes[-1] in c:
        return True
    for k in range(1, len(walk.nodes) - 1):
        head_in = walk.forward[k - 1]       # v_{k-1} -> v_k
        head_out = not walk.forward[k]      # v_k <- v_{k+1}
        collider = head_in and head_out
        mid = walk.nodes[k]
        if collider and mid not in c:
            return True
        if not collider and mid in c:
            return True
    return False


def d_separated(g: Cdag, a: Iterable, b: Iterable, c: Iterable) -> bool:
    """Whether every walk from ``a`` to ``J | b`` is d-blocked by ``c``.

    Breadth-first search over states ``(node, arrived_with_head)``.  Walks
    may revisit nodes, so a collider opens exactly when it lies in ``c``; the
    detour through a descendant in ``c`` is itself a walk the search finds.
    """
    a, b, c = set(a), set(b), set(c)
    for v in a | b | c:
        g._require(v)
    targets = (set(g.inputs) | b) - c
    sources = a - c
    if sources & targets:
        return False
    pa, ch = g._adj
    # head=True: the last edge pointed into the node
    seen = set()
    queue = deque()
    for s in sources:
        for p in pa[s]:
            queue.append((p, False))
        for k in ch[s]:
            queue.append((k, True))
    while queue:
        state = queue.popleft()
        if state in seen:
            continue
        seen.add(state)
        v, head = state
        if v in c:
            if head:
                # collider in c: continue only back up into parents
                for p in pa[v]:
                    queue.append((p, False))
            continue
        if v in targets:
            return False
        for k in ch[v]:
            queue.append((k, True))
        if not head:
            for p in pa[v]:
                queue.append((p, False))
    return True


def extend_graph(g: Cdag, w: Iterable, names: dict | None = None) -> Cdag:
    """Add a fresh input ``I_w`` with the single edge ``I_w -> w`` for each ``w``."""
    w = list(dict.fromkeys(w))
    names = dict(names or {})
    bad = [v for v in w if v not in g.outputs]
    if bad:
        raise GraphError(f"extend_graph: {bad} are not output nodes")
    new_inputs = []
    for v in w:
        node = names.get(v, INPUT_PREFIX + str(v))
        if node in g or node in new_inputs:
            raise GraphError(f"extend_graph: generated node {node!r} collides with an existing node")
        new_inputs.append(node)
    edges = set(g.edges) | {(n, v) for n, v in zip(new_inputs, w)}
    return Cdag(g.inputs + tuple(new_inputs), g.outputs, frozenset(edges))
