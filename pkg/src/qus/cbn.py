"""Causal Bayesian networks and transitional conditional independence.

``X _||_ Y | Z`` w.r.t. a kernel ``K(X, Y, Z | T)`` holds when some
``Q(X | Z)``, free of ``T``, satisfies
``K(X, Y, Z | T) = Q(X | Z) (x) K(Y, Z | T)``.  Input nodes of a network
enter queries as dirac copies of the corresponding coordinate of ``T``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import GraphError, ShapeMismatch
from .graph import Cdag, d_separated, extend_graph, topological_order
from .kernels import fallback_row
from .monad import ATOL, Dist, Kernel, is_exact, kernel_product, pushforward
from .spaces import UNIT, FinSpace, evaluate, exponential, nodes_space, product


@dataclass(frozen=True, eq=False)
class CbnModel:
    """A CDAG with a space per node and a kernel per output node.

    The kernel of ``v`` has domain ``nodes_space`` of its parents' spaces in
    canonical (topological) order: the one-point space for no parents, the
    parent's own space for one parent, their product otherwise.
    """

    graph: Cdag
    space_of: Mapping[str, FinSpace]
    kernel_of: Mapping[str, Kernel]

    def __post_init__(self):
        object.__setattr__(self, "space_of", dict(self.space_of))
        object.__setattr__(self, "kernel_of", dict(self.kernel_of))
        for v in self.graph.nodes:
            if v not in self.space_of:
                raise ShapeMismatch(f"node {v!r} has no space")
        for v in self.graph.outputs:
            k = self.kernel_of.get(v)
            if k is None:
                raise ShapeMismatch(f"output node {v!r} has no kernel")
            dom = self.parent_space(v)
            if k.domain != dom:
                raise ShapeMismatch(
                    f"kernel of {v!r} has domain {k.domain.name!r}, parents need {dom.name!r}"
                )
            if k.codomain != self.space_of[v]:
                raise ShapeMismatch(f"kernel of {v!r} does not map into the space of {v!r}")
        extra = set(self.kernel_of) - set(self.graph.outputs)
        if extra:
            raise ShapeMismatch(f"kernels given for non-output nodes {sorted(extra)}")

    @cached_property
    def order(self) -> list:
        return topological_order(self.graph)

    @cached_property
    def _rank(self) -> dict:
        return {v: i for i, v in enumerate(self.order)}

    def canonical(self, nodes: Iterable) -> list:
        """Nodes sorted by the canonical topological order."""
        nodes = set(nodes)
        for v in nodes:
            self.graph._require(v)
        return sorted(nodes, key=self._rank.get)

    def parents(self, v) -> list:
        return self.canonical(self.graph.parents(v))

    def parent_space(self, v) -> FinSpace:
        return nodes_space([self.space_of[p] for p in self.parents(v)])

    def set_space(self, nodes: Iterable) -> FinSpace:
        return nodes_space([self.space_of[v] for v in self.canonical(nodes)])

    @cached_property
    def input_space(self) -> FinSpace:
        return nodes_space([self.space_of[j] for j in self.graph.inputs])

    @cached_property
    def _table(self) -> "_JointTable":
        return _JointTable.build(self)


def _getter(i: int, single: bool):
    if single:
        return lambda t: t
    return lambda t: t[i]


def joint_kernel(m: CbnModel, order: Sequence | None = None) -> Kernel:
    """``P(X_V | do(X_J))`` as the iterated kernel product along a topological order.

    The product is built children-left (reverse topological order) exactly as
    ``P_vk (x) (... (x) P_v1)``; the codomain is then flattened to the product
    of the output spaces in the order used.
    """
    g = m.graph
    if order is None:
        order = m.order
    outputs = [v for v in order if v in g.outputs]
    pos = {v: i for i, v in enumerate(order)}
    for w, v in g.edges:
        if pos[w] >= pos[v]:
            raise GraphError(f"{order} is not a topological order")
    if set(outputs) != set(g.outputs):
        raise GraphError("order must list every output node")
    t_space = m.input_space
    single_input = len(g.inputs) == 1
    from_t = {j: _getter(i, single_input) for i, j in enumerate(g.inputs)}

    def parent_value(v, getters):
        ps = m.parents(v)
        vals = [getters[p] for p in ps]
        if not ps:
            return lambda state: "0"
        if len(ps) == 1:
            return vals[0]
        return lambda state: tuple(f(state) for f in vals)

    if not outputs:
        return Kernel.from_dist(Dist(UNIT, [1.0]), t_space)
    first = outputs[0]
    getters = {j: f for j, f in from_t.items()}
    pv = parent_value(first, getters)
    joint = m.kernel_of[first].pullback(t_space, pv)
    # paths into nested codomain points; state = (codomain point, t)
    path = {first: ()}
    for v in outputs[1:]:
        cod = joint.codomain
        getters = {j: (lambda f: lambda st: f(st[1]))(f) for j, f in from_t.items()}
        for u, p in path.items():
            getters[u] = (lambda p: lambda st: _follow(st[0], p))(p)
        pv = parent_value(v, getters)
        lifted = m.kernel_of[v].pullback(product([cod, t_space]), pv)
        joint = kernel_product(lifted, joint)
        path = {u: (1,) + p for u, p in path.items()}
        path[v] = (0,)
    flat = nodes_space([m.space_of[v] for v in outputs])
    if len(outputs) == 1:
        return joint
    return _relabel_codomain(joint, flat, lambda p: tuple(_follow(p, path[v]) for v in outputs))


def _follow(point, path):
    for i in path:
        point = point[i]
    return point


def _relabel_codomain(k: Kernel, codomain: FinSpace, f) -> Kernel:
    idx = np.array([codomain.position(f(p)) for p in k.codomain.points])
    out = np.zeros_like(k.matrix)
    out[:, idx] = k.matrix
    return Kernel(k.domain, codomain, out)


@dataclass(frozen=True)
class _JointTable:
    """Joint weights over ``(t, v-config)`` plus each node's value index per cell."""

    weights: np.ndarray       # (|T|, |V-config|)
    value_index: dict         # node -> int array broadcastable to weights.shape
    sizes: dict

    @classmethod
    def build(cls, m: CbnModel) -> "_JointTable":
        g = m.graph
        order = m.order
        outputs = [v for v in order if v in g.outputs]
        jk = joint_kernel(m)
        n_t = len(m.input_space)
        n_v = jk.matrix.shape[1]
        value_index = {}
        out_sizes = [len(m.space_of[v]) for v in outputs]
        if outputs:
            grid = np.unravel_index(np.arange(n_v), out_sizes)
            for v, idx in zip(outputs, grid):
                value_index[v] = idx[None, :]
        in_sizes = [len(m.space_of[j]) for j in g.inputs]
        if g.inputs:
            grid = np.unravel_index(np.arange(n_t), in_sizes)
            for j, idx in zip(g.inputs, grid):
                value_index[j] = idx[:, None]
        sizes = {v: len(m.space_of[v]) for v in g.nodes}
        return cls(jk.matrix, value_index, sizes)

    def config_index(self, nodes: Sequence) -> tuple[np.ndarray, int]:
        shape = self.weights.shape
        if not nodes:
            return np.zeros(shape, dtype=np.int64), 1
        idx = np.zeros(shape, dtype=np.int64)
        size = 1
        for v in nodes:
            idx = idx * self.sizes[v] + np.broadcast_to(self.value_index[v], shape)
            size *= self.sizes[v]
        return idx, size

    def grouped(self, a: Sequence, b: Sequence, c: Sequence) -> np.ndarray:
        """Array ``K[t, x_a, x_b, x_c]`` of the grouped coordinates."""
        ia, na = self.config_index(a)
        ib, nb = self.config_index(b)
        ic, nc = self.config_index(c)
        n_t = self.weights.shape[0]
        t_idx = np.broadcast_to(np.arange(n_t)[:, None], self.weights.shape)
        flat = ((t_idx * na + ia) * nb + ib) * nc + ic
        total = n_t * na * nb * nc
        if is_exact(self.weights):
            out = np.zeros(total, dtype=object)
            np.add.at(out, flat.ravel(), self.weights.ravel())
        else:
            out = np.bincount(flat.ravel(), weights=self.weights.ravel(), minlength=total)
        return out.reshape(n_t, na, nb, nc)


@dataclass(frozen=True)
class TciWitness:
    """Outcome of a transitional conditional independence check.

    ``counterexample`` is ``(z, y, t, x)`` at the atom where the best
    factorization misses the joint by the most; ``deviation`` is that miss.
    """

    holds: bool
    q: Kernel | None = None
    counterexample: tuple | None = None
    deviation: float = 0.0


def _tci_array(k4: np.ndarray, tol: float = ATOL, fallback: str = "uniform"):
    """Decide TCI on ``k4[t, x, y, z]``; returns ``(holds, q[z, x], worst cell, deviation)``."""
    n_t, n_x, n_y, n_z = k4.shape
    exact = is_exact(k4)
    kyz = k4.sum(axis=1)                                  # (t, y, z)
    cells = kyz.transpose(2, 0, 1).reshape(n_z, n_t * n_y)  # per z, masses of (t, y)
    q = np.empty((n_z, n_x), dtype=object if exact else np.float64)
    fb = fallback_row(n_x, fallback, exact)
    for z in range(n_z):
        row = cells[z]
        best = int(np.argmax(row))
        mass = row[best]
        if mass > 0:
            t, y = divmod(best, n_y)
            q[z] = k4[t, :, y, z] / mass
        else:
            q[z] = fb
    recon = q.T[None, :, None, :] * kyz[:, None, :, :]     # (t, x, y, z)
    # every positive-mass (t, y) cell of z must carry the same conditional
    pos = kyz > 0
    safe = np.where(pos, kyz, 1)
    cond = k4 / safe[:, None, :, :]
    gap = np.where(pos[:, None, :, :], cond - q.T[None, :, None, :], 0)
    if exact:
        off = gap != 0
        if np.any(off):
            cell = tuple(int(i) for i in np.argwhere(off)[0])
            return False, q, cell, float(abs(recon[cell] - k4[cell]))
        diff = recon != k4
        holds = not bool(np.any(diff))
        if holds:
            return True, q, None, 0.0
        cell = tuple(int(i) for i in np.argwhere(diff)[0])
        return False, q, cell, float(abs(recon[cell] - k4[cell]))
    err = np.abs(recon - k4)
    worst = int(np.argmax(err))
    dev = float(err.flat[worst]) if err.size else 0.0
    cell = tuple(int(i) for i in np.unravel_index(worst, err.shape))
    spread = np.abs(gap)
    if spread.size and spread.max() > tol:
        far = np.unravel_index(int(np.argmax(spread)), spread.shape)
        return False, q, tuple(int(i) for i in far), max(dev, float(err[far]))
    return dev <= tol, q, (None if dev <= tol else cell), dev


def tci_check(k: Kernel, tol: float = ATOL, fallback: str = "uniform") -> TciWitness:
    """Decide ``X _||_ Y | Z`` for ``k : T -> X*Y*Z``.

    The witness row ``Q(z)`` is the conditional of ``X`` at the heaviest
    positive-mass ``(t, y)`` cell of that ``z`` (fallback if ``z`` is null
    under every ``t``).  It holds iff that conditional is shared by every
    positive-mass cell of ``z`` and the factorization verifies atomwise.  On
    finite spaces this is sound and complete: any valid witness must agree
    with every positive-mass conditional.
    """
    factors = k.codomain.factors
    if len(factors) != 3:
        raise ShapeMismatch("tci_check needs a kernel into a product of exactly three spaces")
    x_space, y_space, z_space = factors
    k4 = k.tensor()
    holds, q, cell, dev = _tci_array(k4, tol, fallback)
    q_kernel = Kernel(z_space, x_space, q) if holds else None
    cex = None
    if cell is not None:
        t, x, y, z = cell
        cex = (
            z_space.points[z],
            y_space.points[y],
            k.domain.points[t],
            x_space.points[x],
        )
    return TciWitness(holds, q_kernel, cex, dev)


def grouped_kernel(m: CbnModel, a: Iterable, b: Iterable, c: Iterable) -> Kernel:
    """``K(X_A, X_B, X_C | X_J)`` from the joint kernel, inputs as dirac coordinates."""
    a, b, c = m.canonical(a), m.canonical(b), m.canonical(c)
    arr = m._table.grouped(a, b, c)
    cod = product([m.set_space(a), m.set_space(b), m.set_space(c)])
    return Kernel(m.input_space, cod, arr.reshape(arr.shape[0], -1))


def tci_on_model(m: CbnModel, a: Iterable, b: Iterable, c: Iterable, tol: float = ATOL) -> TciWitness:
    """``X_A _||_ X_B | X_C`` under the joint kernel of ``m``."""
    return tci_check(grouped_kernel(m, a, b, c), tol)


def _subsets(nodes: Sequence, lo: int, hi: int) -> list[tuple]:
    out = []
    for r in range(lo, min(hi, len(nodes)) + 1):
        out.extend(itertools.combinations(nodes, r))
    return out


@dataclass
class GmpReport:
    """Result of sweeping a model for global-Markov-property violations."""

    triples: int = 0
    separated: int = 0
    violations: list = field(default_factory=list)
    tci_without_dsep: int = 0

    @property
    def ok(self) -> bool:
        return not self.violations


def gmp_sweep(m: CbnModel, max_set_size: int = 2, tol: float = ATOL, converse: bool = False) -> GmpReport:
    """Check ``d-separation => TCI`` for every ``(A, B, C)`` with sizes up to ``max_set_size``.

    ``A`` and ``B`` range over nonempty node sets, ``C`` over all sets
    including the empty one.  With ``converse`` the sweep also counts
    triples where TCI holds without d-separation (reported, never failed).
    """
    nodes = list(m.order)
    ab = _subsets(nodes, 1, max_set_size)
    cs = _subsets(nodes, 0, max_set_size)
    table = m._table
    report = GmpReport()
    for c in cs:
        for a in ab:
            for b in ab:
                report.triples += 1
                sep = d_separated(m.graph, a, b, c)
                if not sep and not converse:
                    continue
                holds, _, cell, dev = _tci_array(table.grouped(a, b, c), tol)
                if sep:
                    report.separated += 1
                    if not holds:
                        report.violations.append((set(a), set(b), set(c), dev))
                elif holds:
                    report.tci_without_dsep += 1
    return report


def make_partially_generic(
    m: CbnModel,
    w: Iterable,
    candidates: Mapping[str, Sequence[Kernel] | Mapping[str, Kernel]],
    names: Mapping[str, str] | None = None,
) -> CbnModel:
    """Replace the mechanisms of ``w`` by input nodes ranging over candidate kernels.

    Each ``I_w`` gets a space indexing ``candidates[w]`` (list positions
    ``q0, q1, ...`` or the mapping's keys); the kernel at ``w`` dispatches on
    it.
    """
    w = list(dict.fromkeys(w))
    g2 = extend_graph(m.graph, w, names)
    new_inputs = g2.inputs[len(m.graph.inputs):]
    spaces = dict(m.space_of)
    grids = {}
    for v, node in zip(w, new_inputs):
        cands = candidates.get(v)
        if not cands:
            raise ShapeMismatch(f"no candidate kernels for {v!r}")
        if isinstance(cands, Mapping):
            keys, kernels = list(cands.keys()), list(cands.values())
        else:
            keys, kernels = [f"q{i}" for i in range(len(cands))], list(cands)
        dom = m.parent_space(v)
        for key, kern in zip(keys, kernels):
            if kern.domain != dom or kern.codomain != m.space_of[v]:
                raise ShapeMismatch(f"candidate {key!r} for {v!r} does not map parents of {v!r} to {v!r}")
        spaces[node] = FinSpace(node, tuple(keys))
        grids[v] = (node, kernels)
    shell = _Shell(g2, spaces)
    kernels = {}
    for v in g2.outputs:
        new_parents = shell.parents(v)
        new_dom = nodes_space([spaces[p] for p in new_parents])
        old_parents = m.parents(v)
        if v in grids:
            node, kerns = grids[v]
            kernels[v] = _dispatch_kernel(new_dom, new_parents, node, old_parents, spaces, kerns, m.space_of[v])
        else:
            kernels[v] = m.kernel_of[v].pullback(new_dom, _reorder(new_parents, old_parents))
    return CbnModel(g2, spaces, kernels)


class _Shell:
    """Parent ordering of a graph before kernels are attached."""

    def __init__(self, graph: Cdag, spaces):
        self.graph = graph
        self.rank = {v: i for i, v in enumerate(topological_order(graph))}

    def parents(self, v) -> list:
        return sorted(self.graph.parents(v), key=self.rank.get)


def _reorder(new_parents: list, old_parents: list):
    """Map a config over ``new_parents`` to the config over ``old_parents``."""
    if not old_parents:
        return lambda p: "0"
    if len(new_parents) == 1:
        return lambda p: p
    pos = [new_parents.index(q) for q in old_parents]
    if len(old_parents) == 1:
        return lambda p: p[pos[0]]
    return lambda p: tuple(p[i] for i in pos)


def _dispatch_kernel(new_dom, new_parents, node, old_parents, spaces, kerns, codomain) -> Kernel:
    sel = new_parents.index(node)
    rest = [p for p in new_parents if p != node]
    to_old = _reorder(rest, old_parents)
    rows = []
    for point in new_dom.points:
        coords = point if len(new_parents) > 1 else (point,)
        key = coords[sel]
        others = [x for i, x in enumerate(coords) if i != sel]
        old_point = to_old(tuple(others) if len(others) > 1 else (others[0] if others else "0"))
        kern = kerns[spaces[node].position(key)]
        rows.append(kern.row(old_point).weights)
    return Kernel.from_rows(new_dom, codomain, rows)


def strong_ignorability_model(
    z_space: FinSpace,
    x_space: FinSpace,
    y_space: FinSpace,
    p_z: Dist,
    p_x_given_z: Kernel,
    p_e_given_z: Kernel,
) -> CbnModel:
    """``Z -> X``, ``Z -> E``, ``X -> Y``, ``E -> Y`` with ``E`` a random function ``X -> Y`` and ``Y = E(X)``."""
    e_space = exponential(x_space, y_space)
    if p_e_given_z.codomain != e_space or p_e_given_z.domain != z_space:
        raise ShapeMismatch("P(E|Z) must map Z into the function space Y^X")
    if p_x_given_z.domain != z_space or p_x_given_z.codomain != x_space:
        raise ShapeMismatch("P(X|Z) must map Z into X")
    if p_z.space != z_space:
        raise ShapeMismatch("P(Z) must live on Z")
    g = Cdag((), ("Z", "X", "E", "Y"), frozenset({("Z", "X"), ("Z", "E"), ("X", "Y"), ("E", "Y")}))
    xe = product([x_space, e_space])
    y_kernel = Kernel.deterministic(lambda p: evaluate(p[1], p[0]), xe, y_space)
    return CbnModel(
        g,
        {"Z": z_space, "X": x_space, "E": e_space, "Y": y_space},
        {
            "Z": Kernel.from_dist(p_z),
            "X": p_x_given_z,
            "E": p_e_given_z,
            "Y": y_kernel,
        },
    )


def potential_outcome(e_dist: Dist, x) -> Dist:
    """Law of ``E(x)`` for a random function ``E``."""
    _, y_space = e_dist.space.parts
    return pushforward(lambda f: evaluate(f, x), e_dist, y_space)


def random_kernel(rng: np.random.Generator, domain: FinSpace, codomain: FinSpace, zero_prob: float = 0.0) -> Kernel:
    """Dirichlet rows; each atom is zeroed with probability ``zero_prob`` (one atom always survives)."""
    m = rng.dirichlet(np.ones(len(codomain)), size=len(domain))
    if zero_prob > 0:
        mask = rng.random(m.shape) < zero_prob
        keep = rng.integers(len(codomain), size=len(domain))
        mask[np.arange(len(domain)), keep] = False
        m = np.where(mask, 0.0, m)
        m /= m.sum(axis=1, keepdims=True)
    return Kernel(domain, codomain, m)


def build_model(graph: Cdag, spaces: Mapping[str, FinSpace], row_of) -> CbnModel:
    """Attach kernels through ``row_of(v, parent_values: dict) -> weights``."""
    shell = _Shell(graph, spaces)
    kernels = {}
    for v in graph.outputs:
        ps = shell.parents(v)
        dom = nodes_space([spaces[p] for p in ps])
        rows = []
        for point in dom.points:
            values = dict(zip(ps, point if len(ps) > 1 else (point,)))
            rows.append(row_of(v, values))
        kernels[v] = Kernel.from_rows(dom, spaces[v], rows)
    return CbnModel(graph, spaces, kernels)


def random_cbn(
    rng: np.random.Generator,
    n_nodes: int | None = None,
    max_nodes: int = 5,
    max_inputs: int = 2,
    edge_prob: float = 0.5,
    size: int = 2,
    zero_prob: float = 0.0,
) -> CbnModel:
    """Random CBN over ``size``-point spaces with a random DAG and Dirichlet kernels."""
    n = int(n_nodes if n_nodes is not None else rng.integers(1, max_nodes + 1))
    n_in = int(rng.integers(0, min(max_inputs, n - 1) + 1)) if n > 1 else 0
    names = [f"N{i}" for i in range(n)]
    edges = set()
    for j in range(n_in, n):
        for i in range(j):
            if rng.random() < edge_prob:
                edges.add((names[i], names[j]))
    outputs = names[n_in:]
    rng.shuffle(outputs)
    graph = Cdag(tuple(names[:n_in]), tuple(outputs), frozenset(edges))
    space = FinSpace("B", tuple(str(i) for i in range(size)))
    spaces = {v: space for v in names}
    shell = _Shell(graph, spaces)
    kernels = {
        v: random_kernel(rng, nodes_space([space] * len(shell.parents(v))), space, zero_prob)
        for v in graph.outputs
    }
    return CbnModel(graph, spaces, kernels)


# --- separoid rules -------------------------------------------------------

def _atoms(n: int, name: str) -> FinSpace:
    return FinSpace(name, tuple(str(i) for i in range(n)))


def _dirichlet(rng, n, zero_prob=0.3):
    w = rng.dirichlet(np.ones(n))
    if n > 1 and zero_prob > 0:
        mask = rng.random(n) < zero_prob
        mask[rng.integers(n)] = False
        w = np.where(mask, 0.0, w)
        w /= w.sum()
    return w


class _Table:
    """Lazily drawn random rows keyed by a tuple of parent values."""

    def __init__(self, rng, n, zero_prob=0.3):
        self.rng, self.n, self.zero_prob, self.rows = rng, n, zero_prob, {}

    def __call__(self, *key):
        if key not in self.rows:
            self.rows[key] = _dirichlet(self.rng, self.n, self.zero_prob)
        return self.rows[key]


def _separoid_instance(rule: str, rng: np.random.Generator):
    """Random model satisfying the rule's hypotheses by construction.

    Returns ``(model, hypotheses, conclusion)``, each statement an
    ``(A, B, C)`` triple of node sets.
    """
    dims = {v: int(rng.integers(1, 4)) for v in "TXYZU"}
    sp = {v: _atoms(dims[v], v) for v in "TXYZU"}
    tab = {v: _Table(rng, dims[v]) for v in "TXYZU"}
    order = ("Z", "U", "Y", "X")
    if rule == "a":
        phi = rng.integers(dims["X"], size=dims["Z"])
        edges = {("T", "Z"), ("Z", "Y"), ("T", "Y"), ("Z", "X")}

        def row(v, p):
            if v == "X":
                w = np.zeros(dims["X"])
                w[phi[int(p["Z"])]] = 1.0
                return w
            return tab[v](*sorted(p.items()))

        hyps, concl, nodes = [], ({"X"}, {"Y"}, {"Z"}), ("Z", "Y", "X")
    elif rule == "b":
        sp["D"] = FinSpace("D", ("0",))
        edges = {("T", "Z"), ("Z", "X"), ("T", "X")}

        def row(v, p):
            if v == "D":
                return np.ones(1)
            return tab[v](*sorted(p.items()))

        hyps, concl, nodes = [], ({"X"}, {"D"}, {"Z", "T"}), ("Z", "X", "D")
    elif rule in ("c", "f", "h"):
        # Q1(X|U,Z) (x) Q2(U|Z) (x) K(Y,Z|T)
        edges = {("T", "Z"), ("T", "Y"), ("Z", "Y"), ("Z", "U"), ("U", "X"), ("Z", "X")}

        def row(v, p):
            return tab[v](*sorted(p.items()))

        nodes = order
        if rule == "c":
            hyps, concl = [({"X", "U"}, {"Y"}, {"Z"})], ({"U"}, {"Y"}, {"Z"})
        elif rule == "f":
            hyps, concl = [({"X", "U"}, {"Y"}, {"Z"})], ({"X"}, {"Y"}, {"U", "Z"})
        else:
            hyps = [({"X"}, {"Y"}, {"U", "Z"}), ({"U"}, {"Y"}, {"Z"})]
            concl = ({"X", "U"}, {"Y"}, {"Z"})
    elif rule in ("d", "e", "g"):
        # Q(X|Z) (x) K(Y,U,Z|T)
        edges = {("T", "Z"), ("T", "U"), ("Z", "U"), ("T", "Y"), ("Z", "Y"), ("U", "Y"), ("Z", "X")}

        def row(v, p):
            return tab[v](*sorted(p.items()))

        nodes = order
        if rule == "d":
            hyps, concl = [({"X"}, {"Y", "U"}, {"Z"})], ({"X"}, {"U"}, {"Z"})
        elif rule == "e":
            hyps, concl = [({"X"}, {"Y"}, {"Z"})], ({"X"}, {"T", "Y"}, {"Z"})
        else:
            hyps, concl = [({"X"}, {"Y", "U"}, {"Z"})], ({"X"}, {"Y"}, {"U", "Z"})
    elif rule in ("i", "j"):
        # X follows Q(X|Z) except on (u, z) cells that carry no mass
        null = rng.random((dims["U"], dims["Z"])) < 0.4
        null[rng.integers(dims["U"], size=dims["Z"]), np.arange(dims["Z"])] = False
        if rule == "i":
            edges = {("T", "Z"), ("T", "U"), ("Z", "U"), ("T", "Y"), ("Z", "Y"), ("U", "Y"), ("Z", "X"), ("U", "X")}
            hyps = [({"X"}, {"Y"}, {"U", "Z"}), ({"X"}, {"U"}, {"Z"})]
        else:
            edges = {("T", "Z"), ("Z", "U"), ("T", "Y"), ("Z", "Y"), ("U", "Y"), ("Z", "X"), ("U", "X")}
            hyps = [({"X"}, {"Y"}, {"U", "Z"}), ({"U"}, {"X"}, {"Z"})]
        concl = ({"X"}, {"Y", "U"}, {"Z"})
        nodes = order

        def row(v, p):
            if v == "U":
                z = int(p["Z"])
                w = rng.dirichlet(np.ones(dims["U"])) * ~null[:, z]
                key = (p.get("T"), z)
                if key not in tab["U"].rows:
                    tab["U"].rows[key] = w / w.sum()
                return tab["U"].rows[key]
            if v == "X":
                u, z = int(p["U"]), int(p["Z"])
                return tab["X"]("null", u, z) if null[u, z] else tab["X"](z)
            return tab[v](*sorted(p.items()))
    elif rule == "k":
        # Q1(X|U,Z) (x) Q2(Y|Z) (x) K(U,Z|T)
        edges = {("T", "Z"), ("T", "U"), ("Z", "U"), ("Z", "Y"), ("U", "X"), ("Z", "X")}

        def row(v, p):
            return tab[v](*sorted(p.items()))

        nodes = order
        hyps = [({"X"}, {"Y"}, {"U", "Z"}), ({"Y"}, {"U"}, {"Z"})]
        concl = ({"Y"}, {"X", "U"}, {"Z"})
    else:
        raise ValueError(f"unknown separoid rule {rule!r}")
    graph = Cdag(("T",), nodes, frozenset(edges))
    spaces = {v: sp[v] for v in graph.nodes}
    return build_model(graph, spaces, row), hyps, concl


SEPAROID_RULES = {
    "a": "extended left redundancy",
    "b": "T-restricted right redundancy",
    "c": "left decomposition",
    "d": "right decomposition",
    "e": "T-inverted right decomposition",
    "f": "left weak union",
    "g": "right weak union",
    "h": "left contraction",
    "i": "right contraction",
    "j": "right cross contraction",
    "k": "flipped left cross contraction",
}


@dataclass
class SeparoidResult:
    rule: str
    name: str
    trials: int = 0
    hypothesis_failures: int = 0
    conclusion_failures: int = 0

    @property
    def ok(self) -> bool:
        return self.hypothesis_failures == 0 and self.conclusion_failures == 0


def separoid_suite(trials: int = 200, seed: int = 0, rules: Iterable[str] | None = None,
                   tol: float = ATOL) -> dict[str, SeparoidResult]:
    """Check each rule on ``trials`` random joints built to satisfy its hypotheses."""
    rng = np.random.default_rng(seed)
    out = {}
    for rule in rules or SEPAROID_RULES:
        res = SeparoidResult(rule, SEPAROID_RULES[rule])
        for _ in range(trials):
            m, hyps, concl = _separoid_instance(rule, rng)
            res.trials += 1
            if not all(tci_on_model(m, *h, tol=tol).holds for h in hyps):
                res.hypothesis_failures += 1
            if not tci_on_model(m, *concl, tol=tol).holds:
                res.conclusion_failures += 1
        out[rule] = res
    return out
