"""Kolmogorov extension as lazy sequence samplers, and de Finetti diagnostics.

A conditional family is a callable ``conds(n)`` returning the kernel
``X_{0:n} * Z -> X_{n+1}``; with a base kernel ``Z -> X_0`` it pins down
every prefix law, and the sampler realizes the whole sequence lazily.
"""

from __future__ import annotations

import bisect
import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import nnls

from .errors import ShapeMismatch, SpaceError
from .monad import ATOL, Dist, Kernel, allclose, kernel_product
from .sampling import SampledKernel, Seed, uniform
from .spaces import UNIT, FinSpace, product

MAX_EXCHANGEABLE_N = 6

Conditionals = Callable[[int], Kernel]


def _factors(space: FinSpace) -> tuple:
    return space.factors if space.kind == "product" else (space,)


def check_consistency(family: Sequence[Kernel], tol: float = ATOL) -> bool:
    """Whether each level's prefix marginal reproduces the level below.

    ``family[n]`` is a kernel ``Z -> X_0 * ... * X_n``.
    """
    family = list(family)
    for n, k in enumerate(family):
        if len(_factors(k.codomain)) != n + 1:
            raise ShapeMismatch(f"level {n} must map into {n + 1} coordinates")
        if k.domain != family[0].domain:
            raise ShapeMismatch(f"level {n} has a different domain")
    for n in range(len(family) - 1):
        lower, upper = family[n], family[n + 1]
        if _factors(upper.codomain)[: n + 1] != _factors(lower.codomain):
            raise ShapeMismatch(f"levels {n} and {n + 1} disagree on the coordinate spaces")
        reduced = upper.tensor().sum(axis=-1)
        if not allclose(reduced.reshape(lower.matrix.shape), lower.matrix, tol):
            return False
    return True


class LazySequence:
    """One realized infinite sequence; coordinate ``n`` is drawn on child ``n`` of the seed."""

    def __init__(self, ext: "Extension", z, seed: Seed):
        self._ext, self._z, self._seed = ext, z, seed
        self._values: list = []

    def __getitem__(self, n: int):
        if n < 0:
            raise IndexError("sequence coordinates start at 0")
        while len(self._values) <= n:
            k = len(self._values)
            self._values.append(self._ext._draw(k, tuple(self._values), self._z, self._seed.spawn(k)))
        return self._values[n]

    def prefix(self, n: int) -> tuple:
        """Coordinates ``0..n``."""
        self[n]
        return tuple(self._values[: n + 1])


class Extension(SampledKernel):
    """Sampler ``Z -> X_N`` of the projective limit of a conditional family."""

    def __init__(self, conds: Conditionals, base: Kernel):
        self.conds = conds
        self.base = base
        self._cache: dict = {}
        super().__init__(base.domain, lambda z, s: LazySequence(self, z, s), None)

    def _level(self, n: int):
        """Kernel drawing coordinate ``n`` and its per-row cumulative lists."""
        if n not in self._cache:
            if n == 0:
                k = self.base
            else:
                try:
                    k = self.conds(n - 1)
                except Exception as exc:
                    raise SpaceError(f"conditional generator failed at n={n - 1}: {exc}") from exc
                want = product([self.prefix_space(n - 1), self.base.domain])
                if k.domain != want:
                    raise ShapeMismatch(f"conditional {n - 1} must have domain {want.name}")
            self._cache[n] = (k, [list(r) for r in k.cumulative])
        return self._cache[n]

    def space(self, n: int) -> FinSpace:
        return self._level(n)[0].codomain

    def prefix_space(self, n: int) -> FinSpace:
        return product([self.space(k) for k in range(n + 1)])

    def _draw(self, n: int, prefix: tuple, z, seed: Seed):
        k, cums = self._level(n)
        key = z if n == 0 else (prefix, z)
        row = cums[k.domain.position(key)]
        i = bisect.bisect_right(row, uniform(seed))
        if i >= len(row):
            i = max(j for j in range(len(row)) if row[j] > (row[j - 1] if j else 0.0))
        return k.codomain.points[i]


def extend(conds: Conditionals, base: Kernel) -> Extension:
    return Extension(conds, base)


def prefix_marginal(ext: Extension, n: int, z, samples: int, root: Seed) -> Dist:
    """Empirical law of coordinates ``0..n`` over children ``0..samples-1`` of ``root``."""
    space = ext.prefix_space(n)
    counts = np.zeros(len(space), dtype=np.int64)
    pos = space.index
    for i in range(samples):
        counts[pos[ext(z, root.spawn(i)).prefix(n)]] += 1
    return Dist(space, counts / samples)


def _flatten_prefix(k: Kernel, space: FinSpace) -> Kernel:
    # codomain (x_{n+1}, (x_0..x_n)) -> (x_0..x_{n+1}); a pure reshuffle of columns
    idx = np.array([space.position(rest + (x,)) for x, rest in k.codomain.points])
    out = np.zeros_like(k.matrix)
    out[:, idx] = k.matrix
    return Kernel(k.domain, space, out)


def chain_law(conds: Conditionals, base: Kernel, n: int) -> Kernel:
    """Exact prefix law ``Z -> X_0 * ... * X_n`` as the iterated kernel product."""
    x0 = base.codomain
    law = Kernel(base.domain, product([x0]), base.matrix)
    for m in range(n):
        step = conds(m)
        joint = kernel_product(step, law)
        law = _flatten_prefix(joint, product(list(_factors(law.codomain)) + [step.codomain]))
    return law


def chain_family(conds: Conditionals, base: Kernel, depth: int) -> list[Kernel]:
    """Levels ``0..depth`` of the family generated by ``conds``."""
    return [chain_law(conds, base, n) for n in range(depth + 1)]


def iid_conditionals(dist: Dist, domain: FinSpace = UNIT) -> Conditionals:
    """Every coordinate independent with law ``dist``."""

    def conds(n: int) -> Kernel:
        dom = product([product([dist.space] * (n + 1)), domain])
        return Kernel(dom, dist.space, np.tile(dist.weights, (len(dom), 1)))

    return conds


def markov_conditionals(transition: Kernel, domain: FinSpace = UNIT) -> Conditionals:
    """Coordinate ``n+1`` drawn from ``transition`` at coordinate ``n``."""
    if transition.domain != transition.codomain:
        raise ShapeMismatch("a Markov transition must map a space into itself")
    space = transition.domain

    def conds(n: int) -> Kernel:
        dom = product([product([space] * (n + 1)), domain])
        return transition.pullback(dom, lambda p: p[0][-1])

    return conds


def is_exchangeable(k: Kernel, tol: float = ATOL) -> bool:
    """Whether every coordinate permutation leaves every row of ``k : Z -> X^n`` unchanged."""
    factors = _factors(k.codomain)
    n = len(factors)
    if n > MAX_EXCHANGEABLE_N:
        raise ShapeMismatch(f"exchangeability check enumerates n! permutations; n={n} > {MAX_EXCHANGEABLE_N}")
    if len(set(factors)) != 1:
        raise ShapeMismatch("exchangeability needs identical coordinate spaces")
    t = k.matrix.reshape((len(k.domain),) + tuple(len(f) for f in factors))
    for perm in itertools.permutations(range(n)):
        if not allclose(t.transpose((0,) + tuple(p + 1 for p in perm)), t, tol):
            return False
    return True


@dataclass(frozen=True)
class MixtureFit:
    """Nonnegative least-squares fit of a row as a mixture of iid Bernoulli products."""

    grid: tuple
    weights: np.ndarray
    residual: float

    def weight_at(self, p: float, ndigits: int = 12) -> float:
        key = round(float(p), ndigits)
        for q, w in zip(self.grid, self.weights):
            if round(q, ndigits) == key:
                return float(w)
        return 0.0


def bernoulli_power(p: float, n: int) -> np.ndarray:
    """Weights of ``Bern(p)^n`` over ``{0,1}^n`` in lexicographic order (``1`` = success)."""
    successes = np.array([sum(bits) for bits in itertools.product((0, 1), repeat=n)])
    return p ** successes * (1.0 - p) ** (n - successes)


def definetti_mixture(k: Kernel, grid: Sequence[float]) -> dict:
    """Fit each row of ``k : Z -> X^n`` (``X`` binary) as ``sum_i w_i Bern(p_i)^n``.

    The second point of ``X`` counts as success.  Returns
    ``{z: MixtureFit}``; the residual is the largest atomwise miss.
    """
    factors = _factors(k.codomain)
    if any(len(f) != 2 for f in factors):
        raise ShapeMismatch("de Finetti diagnostic needs a binary coordinate space")
    n = len(factors)
    ps = sorted({round(float(p), 12) for p in grid})
    if any(not 0.0 <= p <= 1.0 for p in ps):
        raise ValueError("grid values must lie in [0, 1]")
    a = np.stack([bernoulli_power(p, n) for p in ps], axis=1)
    out = {}
    for z, row in zip(k.domain.points, np.asarray(k.matrix, dtype=np.float64)):
        w, _ = nnls(a, row)
        resid = float(np.max(np.abs(a @ w - row))) if row.size else 0.0
        out[z] = MixtureFit(tuple(ps), w, resid)
    return out


def bernoulli_mixture(weights: Sequence[float], ps: Sequence[float], n: int,
                      x: FinSpace | None = None) -> Dist:
    """``sum_i w_i Bern(p_i)^n`` as a distribution on ``x^n``."""
    if not math.isclose(sum(weights), 1.0, abs_tol=1e-12):
        raise ValueError("mixture weights must sum to 1")
    x = x or FinSpace("2", ("0", "1"))
    w = sum(wi * bernoulli_power(p, n) for wi, p in zip(weights, ps))
    return Dist(product([x] * n), w)
