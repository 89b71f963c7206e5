"""Sample space as a splittable seed tree, and push-forward samplers.

A :class:`Seed` stands for a point of the sample space.  Its stream of
uniforms is a counter-mode hash of a 64-bit state, and children are derived
by hashing the parent state with the child index, so every output is a pure
function of the root state and the split path.
"""

from __future__ import annotations

import contextlib
import contextvars
from dataclasses import dataclass
from typing import Any, Callable, Sequence

import numpy as np

from .errors import DrawReuseError, ShapeMismatch, SpaceError
from .monad import Dist, Kernel
from .spaces import FinSpace, FnPoint

MASK = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
SPLIT_KEY = 0xD1B54A32D192ED03
_INV_2_53 = 1.0 / (1 << 53)


def mix64(z: int) -> int:
    """SplitMix64 finalizer on a Python int."""
    z &= MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return z ^ (z >> 31)


def _mix64_array(z: np.ndarray) -> np.ndarray:
    z = z.astype(np.uint64)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


_ledger: contextvars.ContextVar[set | None] = contextvars.ContextVar("qus_draw_ledger", default=None)


@contextlib.contextmanager
def draw_ledger():
    """Audit that no (seed, draw index) pair is consumed twice inside the block."""
    used: set = set()
    token = _ledger.set(used)
    try:
        yield used
    finally:
        _ledger.reset(token)


def _record(state: int, k: int) -> None:
    used = _ledger.get()
    if used is None:
        return
    key = (state, k)
    if key in used:
        raise DrawReuseError(f"draw {k} of seed {state:#018x} consumed twice")
    used.add(key)


@dataclass(frozen=True, slots=True)
class Seed:
    state: int
    path: tuple = ()

    @classmethod
    def root(cls, value: int) -> "Seed":
        if not 0 <= value <= MASK:
            raise ValueError("seed must be an unsigned 64-bit integer")
        return cls(mix64(value ^ SPLIT_KEY), ())

    def spawn(self, i: int) -> "Seed":
        """The ``i``-th child; ``split`` uses children 0 and 1."""
        return Seed(mix64(mix64(self.state ^ SPLIT_KEY) + GOLDEN * (i + 1)), self.path + (i,))

    def descend(self, path: Sequence[int]) -> "Seed":
        s = self
        for i in path:
            s = s.spawn(i)
        return s

    def draw(self, k: int = 0) -> float:
        """The ``k``-th uniform in ``[0, 1)`` of this seed's stream."""
        _record(self.state, k)
        return (mix64(self.state + GOLDEN * (k + 1)) >> 11) * _INV_2_53

    def uniforms(self, n: int, start: int = 0) -> np.ndarray:
        """Draws ``start .. start+n-1`` of the stream, vectorized."""
        if _ledger.get() is not None:
            for k in range(start, start + n):
                _record(self.state, k)
        k = np.arange(start + 1, start + n + 1, dtype=np.uint64)
        with np.errstate(over="ignore"):
            z = np.uint64(self.state) + np.uint64(GOLDEN) * k
            return (_mix64_array(z) >> np.uint64(11)).astype(np.float64) * _INV_2_53


def split(s: Seed) -> tuple[Seed, Seed]:
    return s.spawn(0), s.spawn(1)


def uniform(s: Seed) -> float:
    return s.draw(0)


class Sampler:
    """Deterministic map ``Seed -> point`` standing for the push-forward of the uniform measure."""

    def __init__(self, fn: Callable[[Seed], Any], codomain: FinSpace | None = None):
        self.fn = fn
        self.codomain = codomain

    def __call__(self, s: Seed):
        return self.fn(s)

    def __repr__(self):
        cod = self.codomain.name if self.codomain is not None else "?"
        return f"Sampler[{cod}]"


class SampledKernel:
    """Deterministic map ``(z, Seed) -> point``: a kernel in sampler form."""

    def __init__(self, domain: FinSpace, fn: Callable[[Any, Seed], Any], codomain: FinSpace | None = None):
        self.domain = domain
        self.fn = fn
        self.codomain = codomain

    def __call__(self, z, s: Seed):
        return self.fn(z, s)

    def at(self, z) -> Sampler:
        self.domain.position(z)
        return Sampler(lambda s: self.fn(z, s), self.codomain)

    @classmethod
    def from_kernel(cls, k: Kernel) -> "SampledKernel":
        rows = [quantile(k.cumulative[i]) for i in range(len(k.domain))]
        points = k.codomain.points
        pos = k.domain.position

        def fn(z, s):
            return points[rows[pos(z)](uniform(s))]

        return cls(k.domain, fn, k.codomain)


def quantile(cumulative: np.ndarray) -> Callable[[float], int]:
    """Index of the first atom whose cumulative weight strictly exceeds ``u``."""
    cum = np.asarray(cumulative, dtype=np.float64)
    last = len(cum) - 1
    # the top atom with positive mass absorbs u values lost to float rounding
    top = int(np.flatnonzero(np.diff(np.concatenate([[0.0], cum])) > 0)[-1])

    def pick(u: float) -> int:
        i = int(np.searchsorted(cum, u, side="right"))
        return i if i <= last else top

    return pick


def from_dist(d: Dist) -> Sampler:
    """Inverse-CDF sampler over the canonical point order."""
    pick = quantile(np.cumsum(np.asarray(d.weights, dtype=np.float64)))
    points = d.space.points
    return Sampler(lambda s: points[pick(uniform(s))], d.space)


def constant(space: FinSpace, x) -> Sampler:
    space.position(x)
    return Sampler(lambda s: x, space)


def pushforward(f, a: Sampler, codomain: FinSpace | None = None) -> Sampler:
    """``f`` after ``a``; represents ``f_*`` of the represented measure."""
    if isinstance(f, FnPoint):
        if a.codomain is not None and f.domain != a.codomain:
            raise ShapeMismatch("pushforward: map domain does not match sampler codomain")
        codomain = f.codomain
    return Sampler(lambda s: f(a(s)), codomain)


def bind(a: Sampler, k: SampledKernel) -> Sampler:
    """Draw ``x`` from ``a`` on the left child, then ``k(x)`` on the right child."""

    def fn(s):
        left, right = split(s)
        return k(a(left), right)

    return Sampler(fn, k.codomain)


def pair(a: Sampler, b: Sampler, codomain: FinSpace | None = None) -> Sampler:
    """Independent pair drawn on the two split children."""

    def fn(s):
        left, right = split(s)
        return (a(left), b(right))

    return Sampler(fn, codomain)


def _check_partition(partition: Sequence[tuple[float, float]]) -> list[tuple[float, float]]:
    intervals = sorted((float(lo), float(hi)) for lo, hi in partition)
    if not intervals:
        raise SpaceError("patch needs at least one interval")
    edge = 0.0
    for lo, hi in intervals:
        if not lo < hi:
            raise SpaceError(f"empty interval [{lo}, {hi})")
        if lo < edge:
            raise SpaceError(f"intervals overlap at {lo}")
        if lo > edge:
            raise SpaceError(f"gap [{edge}, {lo}) in partition")
        edge = hi
    if edge != 1.0:
        raise SpaceError(f"partition ends at {edge}, not 1")
    return intervals


def patch(partition: Sequence[tuple[float, float]], samplers: Sequence[Sampler]) -> Sampler:
    """Glue samplers along a partition of ``[0, 1)`` into half-open intervals.

    The first uniform of the seed selects the interval; the chosen sampler
    runs on the left split child, so no draw is shared.
    """
    if len(partition) != len(samplers):
        raise SpaceError("patch: partition and sampler lists differ in length")
    _check_partition(partition)
    codomain = samplers[0].codomain
    if any(s.codomain != codomain for s in samplers):
        raise ShapeMismatch("patch: samplers have different codomains")
    bounds = [(float(lo), float(hi), s) for (lo, hi), s in zip(partition, samplers)]

    def fn(s):
        u = uniform(s)
        for lo, hi, smp in bounds:
            if lo <= u < hi:
                return smp(split(s)[0])
        raise AssertionError("partition does not cover the draw")

    return Sampler(fn, codomain)


def empirical(a: Sampler, n: int, root: Seed) -> Dist:
    """Frequency table of ``a`` over the first ``n`` children of ``root``."""
    if a.codomain is None:
        raise SpaceError("empirical distribution needs a finite codomain")
    if n < 1:
        raise ValueError("n must be at least 1")
    counts = np.zeros(len(a.codomain), dtype=np.int64)
    pos = a.codomain.position
    for i in range(n):
        counts[pos(a(root.spawn(i)))] += 1
    return Dist(a.codomain, counts / n)
