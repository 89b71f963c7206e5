"""Brute-force reference implementations used by the tests.

Nothing here shares code paths with the algorithms under test beyond the
basic data types.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np

from qus.monad import Kernel, kernel_product
from qus.spaces import FinSpace, product


def open_walk_pairs(g, c) -> set:
    """All ``(start, end)`` pairs joined by a walk that no node of ``c`` blocks.

    Walks are enumerated depth-first by extending open prefixes.  A walk
    that repeats a (node, arrived-with-head) state contains a loop whose
    removal keeps it open, so only state-simple walks are enumerated.
    """
    c = set(c)
    nbrs = {v: [] for v in g.nodes}
    for w, v in g.edges:
        nbrs[w].append((v, True))    # w -> v traversed forward: head at v
        nbrs[v].append((w, False))   # traversed backward: tail at w
    pairs = set()

    def internal_ok(arrived_head, leaves_tail_first, v):
        # v is a collider iff the walk arrives at v with a head and leaves against an edge into v
        collider = arrived_head and not leaves_tail_first
        return (v in c) if collider else (v not in c)

    def dfs(start, v, head, seen):
        if v not in c:
            pairs.add((start, v))
        for u, forward in nbrs[v]:
            # leaving v forward means v is the tail of the edge
            if head is not None and not internal_ok(head, forward, v):
                continue
            state = (u, forward)
            if state in seen:
                continue
            seen.add(state)
            dfs(start, u, forward, seen)
            seen.remove(state)

    for s in g.nodes:
        if s in c:
            continue
        pairs.add((s, s))
        dfs(s, s, None, set())
    return pairs


def dsep_by_walks(g, a, b, c, pairs=None) -> bool:
    pairs = open_walk_pairs(g, c) if pairs is None else pairs
    targets = set(g.inputs) | set(b)
    return not any((s, t) in pairs for s in a for t in targets)


def joint_by_enumeration(m) -> dict:
    """``{(t, x_V): weight}`` by multiplying kernel entries over full assignments."""
    g = m.graph
    inputs = list(g.inputs)
    outputs = [v for v in m.order if v in g.outputs]
    out = {}
    for tvals in itertools.product(*(m.space_of[j].points for j in inputs)):
        for xvals in itertools.product(*(m.space_of[v].points for v in outputs)):
            val = dict(zip(inputs, tvals))
            val.update(zip(outputs, xvals))
            w = 1.0
            for v in outputs:
                ps = m.parents(v)
                key = "0" if not ps else (val[ps[0]] if len(ps) == 1 else tuple(val[p] for p in ps))
                k = m.kernel_of[v]
                w = w * k.matrix[k.domain.position(key), k.codomain.position(val[v])]
            out[(tvals, xvals)] = w
    return out


def tci_by_search(k: Kernel) -> bool:
    """TCI by trying every per-``z`` choice of witness row from the joint's conditionals.

    Any valid witness agrees with each positive-mass conditional, so the
    search over these candidates (plus one arbitrary row for null ``z``) is
    exhaustive.  Each candidate is checked by forming ``Q (x) K(Y,Z|T)``
    with the kernel product and comparing to ``k`` atomwise.
    """
    x, y, z = k.codomain.factors
    t_space = k.domain
    exact = k.exact
    per_z = []
    for zp in z.points:
        cands = []
        for tp in t_space.points:
            for yp in y.points:
                col = [k.matrix[t_space.position(tp), k.codomain.position((xp, yp, zp))] for xp in x.points]
                mass = sum(col)
                if mass > 0:
                    row = tuple(v / mass for v in col)
                    if row not in cands:
                        cands.append(row)
        if not cands:
            cands.append(tuple([Fraction(1, len(x))] * len(x)) if exact else tuple([1 / len(x)] * len(x)))
        per_z.append(cands)
    yz = product([y, z])
    marg = np.zeros((len(t_space), len(yz)), dtype=object if exact else float)
    for i, (xp, yp, zp) in enumerate(k.codomain.points):
        marg[:, yz.position((yp, zp))] += k.matrix[:, i]
    marg_k = Kernel(t_space, yz, marg)
    dom = product([yz, t_space])
    for choice in itertools.product(*per_z):
        rows = [choice[z.position(p[0][1])] for p in dom.points]
        q = Kernel.from_rows(dom, x, rows)
        built = kernel_product(q, marg_k)   # T -> X * (Y * Z)
        ok = True
        for i, (xp, (yp, zp)) in enumerate(built.codomain.points):
            a = built.matrix[:, i]
            b = k.matrix[:, k.codomain.position((xp, yp, zp))]
            if exact:
                ok = all(u == v for u, v in zip(a, b))
            else:
                ok = bool(np.all(np.abs(a.astype(float) - b.astype(float)) <= 1e-12))
            if not ok:
                break
        if ok:
            return True
    return False


def random_exact_row(rng, n: int, denom: int = 6, zero_prob: float = 0.0) -> list:
    """A random probability vector with rational entries over a common denominator."""
    while True:
        counts = rng.integers(0, denom + 1, size=n)
        if zero_prob:
            counts = np.where(rng.random(n) < zero_prob, 0, counts)
        if counts.sum() > 0:
            break
    total = int(counts.sum())
    return [Fraction(int(c), total) for c in counts]


def random_float_row(rng, n: int, zero_prob: float = 0.0) -> np.ndarray:
    w = rng.dirichlet(np.ones(n))
    if zero_prob and n > 1:
        mask = rng.random(n) < zero_prob
        mask[rng.integers(n)] = False
        w = np.where(mask, 0.0, w)
        w = w / w.sum()
    return w


def random_kernel(rng, domain: FinSpace, codomain: FinSpace, exact: bool = False, zero_prob: float = 0.0) -> Kernel:
    if exact:
        return Kernel.from_rows(domain, codomain,
                                [random_exact_row(rng, len(codomain), zero_prob=zero_prob) for _ in domain.points])
    return Kernel(domain, codomain, np.stack([random_float_row(rng, len(codomain), zero_prob) for _ in domain.points]))


def random_space(rng, name: str, lo: int = 1, hi: int = 5) -> FinSpace:
    n = int(rng.integers(lo, hi + 1))
    return FinSpace(name, tuple(f"{name.lower()}{i}" for i in range(n)))


def random_cdag(rng, max_nodes: int = 5, max_inputs: int = 2, edge_prob: float = 0.4, min_nodes: int = 1):
    """A random CDAG on nodes ``n0..``; edges follow a random order, so it is acyclic."""
    from qus.graph import make_cdag

    n = int(rng.integers(min_nodes, max_nodes + 1))
    names = [f"n{i}" for i in range(n)]
    order = [names[i] for i in rng.permutation(n)]
    k = int(rng.integers(0, min(max_inputs, n) + 1))
    inputs = set(order[:k])   # inputs are sources, so they come first in the order
    edges = [(order[i], order[j]) for i in range(n) for j in range(i + 1, n)
             if order[j] not in inputs and rng.random() < edge_prob]
    return make_cdag([v for v in names if v in inputs], [v for v in names if v not in inputs], edges)


def small_subsets(nodes, max_size: int, min_size: int = 0):
    for r in range(min_size, max_size + 1):
        yield from (set(s) for s in itertools.combinations(nodes, r))
