"""Exact finite probability monad.

Weights live in numpy arrays.  A float64 array is the default; an ``object``
array of :class:`fractions.Fraction` selects exact rational arithmetic, in
which every comparison below is exact equality instead of ``ATOL``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from numbers import Rational
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import DistributionError, ShapeMismatch
from .spaces import UNIT, FinSpace, FnPoint, label, product

SUM_TOL = 1e-12
ATOL = 1e-12


def as_weights(values) -> np.ndarray:
    """Coerce to a float64 array, or to an exact object array if any entry is a Fraction."""
    if isinstance(values, np.ndarray) and values.dtype != object:
        return values.astype(np.float64, copy=False)
    arr = np.asarray(values, dtype=object)
    flat = arr.ravel()
    kinds = {type(v) for v in flat}
    if kinds == {Fraction}:
        return arr.copy()
    if any(issubclass(k, Fraction) for k in kinds):
        out = np.empty(arr.shape, dtype=object)
        out.ravel()[:] = [Fraction(v) if isinstance(v, Rational) else Fraction(float(v)) for v in flat]
        return out
    return arr.astype(np.float64)


def is_exact(arr: np.ndarray) -> bool:
    return arr.dtype == object


def to_exact(arr: np.ndarray) -> np.ndarray:
    if is_exact(arr):
        return arr
    out = np.empty(arr.shape, dtype=object)
    out.ravel()[:] = [Fraction(float(v)) for v in arr.ravel()]
    return out


def allclose(a: np.ndarray, b: np.ndarray, tol: float = ATOL) -> bool:
    """Atomwise agreement: exact for rational arrays, within ``tol`` otherwise."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        return False
    if is_exact(a) and is_exact(b):
        return bool(np.all(a == b))
    return bool(np.all(np.abs(a.astype(np.float64) - b.astype(np.float64)) <= tol))


def max_abs_diff(a: np.ndarray, b: np.ndarray) -> float:
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64))))


def _check_rows(matrix: np.ndarray, where: str) -> None:
    if is_exact(matrix):
        rows = matrix.reshape(-1, matrix.shape[-1]) if matrix.ndim else matrix.reshape(1, 1)
        for row in rows.tolist():
            # integer arithmetic over a common denominator is much cheaper than Fraction sums
            common = math.lcm(*(v.denominator for v in row)) if row else 1
            nums = [v.numerator * (common // v.denominator) for v in row]
            if any(n < 0 for n in nums):
                raise DistributionError(f"{where}: negative weight")
            if sum(nums) != common:
                raise DistributionError(f"{where}: weights sum to {Fraction(sum(nums), common)}, not 1")
        return
    if not np.all(np.isfinite(matrix)):
        raise DistributionError(f"{where}: non-finite weight")
    if np.any(matrix < 0):
        raise DistributionError(f"{where}: negative weight")
    drift = np.abs(matrix.sum(axis=-1) - 1.0)
    if drift.size and drift.max() > SUM_TOL:
        raise DistributionError(f"{where}: weights sum off by {drift.max():.3g}")


@dataclass(frozen=True, eq=False)
class Dist:
    """Probability measure on a finite space, weights in canonical point order."""

    space: FinSpace
    weights: np.ndarray

    def __post_init__(self):
        w = as_weights(self.weights)
        if w.shape != (len(self.space),):
            raise DistributionError(
                f"distribution on {self.space.name!r} needs {len(self.space)} weights, got {w.shape}"
            )
        _check_rows(w, f"distribution on {self.space.name!r}")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @cached_property
    def _key(self):
        return (self.space, tuple(self.weights.tolist()))

    def __hash__(self):
        return hash(self._key)

    def __eq__(self, other):
        if not isinstance(other, Dist):
            return NotImplemented
        return self._key == other._key

    def __repr__(self):
        body = ", ".join(f"{label(p)}: {w}" for p, w in zip(self.space.points, self.weights) if w != 0)
        return f"Dist[{self.space.name}]({body})"

    @property
    def exact(self) -> bool:
        return is_exact(self.weights)

    def __getitem__(self, point):
        return self.weights[self.space.position(point)]

    def prob(self, event) -> float:
        members = event.members if hasattr(event, "members") else event
        return sum(self[p] for p in members)

    def support(self) -> list:
        return [p for p, w in zip(self.space.points, self.weights) if w > 0]

    def to_exact(self) -> "Dist":
        return Dist(self.space, to_exact(self.weights))

    def isclose(self, other: "Dist", tol: float = ATOL) -> bool:
        return self.space == other.space and allclose(self.weights, other.weights, tol)

    def tv(self, other: "Dist") -> float:
        """Total-variation distance."""
        if self.space != other.space:
            raise ShapeMismatch("total variation between different spaces")
        return 0.5 * float(np.abs(np.asarray(self.weights, float) - np.asarray(other.weights, float)).sum())

    def table(self) -> np.ndarray:
        """Weights reshaped to the factor shape of a product space."""
        return self.weights.reshape(self.space.shape)


@dataclass(frozen=True, eq=False)
class Kernel:
    """Markov kernel between finite spaces: a row-stochastic ``|domain| x |codomain|`` matrix."""

    domain: FinSpace
    codomain: FinSpace
    matrix: np.ndarray

    def __post_init__(self):
        m = as_weights(self.matrix)
        if m.shape != (len(self.domain), len(self.codomain)):
            raise DistributionError(
                f"kernel {self.domain.name} -> {self.codomain.name} needs shape "
                f"{(len(self.domain), len(self.codomain))}, got {m.shape}"
            )
        _check_rows(m, f"kernel {self.domain.name} -> {self.codomain.name}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def __repr__(self):
        return f"Kernel[{self.domain.name} -> {self.codomain.name}]"

    def __eq__(self, other):
        if not isinstance(other, Kernel):
            return NotImplemented
        return (
            self.domain == other.domain
            and self.codomain == other.codomain
            and self.matrix.dtype == other.matrix.dtype
            and bool(np.all(self.matrix == other.matrix))
        )

    __hash__ = None

    @property
    def exact(self) -> bool:
        return is_exact(self.matrix)

    def row(self, z) -> Dist:
        return Dist(self.codomain, self.matrix[self.domain.position(z)])

    def rows(self) -> list[Dist]:
        return [Dist(self.codomain, r) for r in self.matrix]

    def __call__(self, z) -> Dist:
        return self.row(z)

    @cached_property
    def cumulative(self) -> np.ndarray:
        """Row-wise cumulative weights as floats, used by quantile samplers."""
        return np.cumsum(np.asarray(self.matrix, dtype=np.float64), axis=1)

    def isclose(self, other: "Kernel", tol: float = ATOL) -> bool:
        return (
            self.domain == other.domain
            and self.codomain == other.codomain
            and allclose(self.matrix, other.matrix, tol)
        )

    def to_exact(self) -> "Kernel":
        return Kernel(self.domain, self.codomain, to_exact(self.matrix))

    def tensor(self) -> np.ndarray:
        """Matrix reshaped to ``(|domain|, *codomain factor shape)``."""
        return self.matrix.reshape((len(self.domain),) + self.codomain.shape)

    @classmethod
    def from_rows(cls, domain: FinSpace, codomain: FinSpace, rows: Iterable) -> "Kernel":
        rows = [r.weights if isinstance(r, Dist) else as_weights(r) for r in rows]
        if any(is_exact(r) for r in rows):
            rows = [to_exact(r) for r in rows]
            return cls(domain, codomain, np.array(rows, dtype=object).reshape(len(rows), -1))
        return cls(domain, codomain, np.array(rows, dtype=np.float64).reshape(len(rows), -1))

    @classmethod
    def from_dist(cls, dist: Dist, domain: FinSpace = UNIT) -> "Kernel":
        """Constant kernel; with the default one-point domain this is the measure as a kernel."""
        return cls(domain, dist.space, np.tile(dist.weights, (len(domain), 1)))

    @classmethod
    def deterministic(cls, f, domain: FinSpace | None = None, codomain: FinSpace | None = None,
                      exact: bool = False) -> "Kernel":
        """Dirac kernel ``z -> delta_{f(z)}`` of a map."""
        if isinstance(f, FnPoint):
            domain, codomain = f.domain, f.codomain
        if domain is None or codomain is None:
            raise ShapeMismatch("deterministic kernel of a callable needs domain and codomain")
        m = np.zeros((len(domain), len(codomain)), dtype=object if exact else np.float64)
        for i, z in enumerate(domain.points):
            m[i, codomain.position(f(z))] = Fraction(1) if exact else 1.0
        return cls(domain, codomain, m)

    @classmethod
    def identity(cls, space: FinSpace, exact: bool = False) -> "Kernel":
        return cls.deterministic(FnPoint.identity(space), exact=exact)

    def as_dist(self) -> Dist:
        if len(self.domain) != 1:
            raise ShapeMismatch("only a kernel out of a one-point space is a distribution")
        return Dist(self.codomain, self.matrix[0])

    def pullback(self, domain: FinSpace, f: Callable) -> "Kernel":
        """Precompose with a map ``domain -> self.domain``: row ``z`` is ``self(f(z))``."""
        idx = [self.domain.position(f(z)) for z in domain.points]
        return Kernel(domain, self.codomain, self.matrix[idx])

    def pushforward(self, f: Callable, codomain: FinSpace) -> "Kernel":
        """Postcompose with a map ``self.codomain -> codomain``."""
        return Kernel(self.domain, codomain, _push_columns(self.matrix, f, self.codomain, codomain))


def _push_columns(m: np.ndarray, f: Callable, source: FinSpace, target: FinSpace) -> np.ndarray:
    """Sum the columns of ``m`` (indexed by ``source``) into the bins ``f(x)`` of ``target``."""
    idx = np.array([target.position(f(x)) for x in source.points], dtype=np.int64)
    out = np.zeros(m.shape[:-1] + (len(target),), dtype=m.dtype)
    if is_exact(m):
        out[...] = Fraction(0)
    np.add.at(out, (..., idx), m)
    return out


def dirac(space: FinSpace, x, exact: bool = False) -> Dist:
    """Point mass at ``x``."""
    w = np.zeros(len(space), dtype=object if exact else np.float64)
    if exact:
        w[:] = Fraction(0)
    w[space.position(x)] = Fraction(1) if exact else 1.0
    return Dist(space, w)


def uniform(space: FinSpace, exact: bool = False) -> Dist:
    n = len(space)
    if exact:
        return Dist(space, [Fraction(1, n)] * n)
    return Dist(space, np.full(n, 1.0 / n))


def pushforward(f: Callable, mu: Dist, codomain: FinSpace) -> Dist:
    """Image measure ``f_* mu``."""
    return Dist(codomain, _push_columns(mu.weights, f, mu.space, codomain))


def dist_space(dists: Sequence[Dist], name: str = "P") -> FinSpace:
    """Finite space whose points are the given (distinct) distributions."""
    return FinSpace(name, tuple(dists), "dists")


def flatten(outer: Dist) -> Dist:
    """Mixture ``A -> sum_i outer(i) * inner_i(A)`` of a distribution over distributions."""
    inners = outer.space.points
    if not inners or not all(isinstance(d, Dist) for d in inners):
        raise ShapeMismatch("flatten needs a distribution over distributions")
    space = inners[0].space
    if any(d.space != space for d in inners):
        raise ShapeMismatch("flatten: inner distributions live on different spaces")
    stack = np.stack([d.weights for d in inners])
    return Dist(space, outer.weights @ stack)


def bind(mu: Dist, k: Kernel) -> Dist:
    """Kleisli extension: ``B -> sum_x mu(x) k(x)(B)``."""
    if k.domain != mu.space:
        raise ShapeMismatch(f"bind: kernel domain {k.domain.name!r} != measure space {mu.space.name!r}")
    return Dist(k.codomain, mu.weights @ k.matrix)


def kernel_compose(kappa: Kernel, mu: Kernel) -> Kernel:
    """``kappa`` after ``mu``: row ``z`` is ``bind(mu(z), kappa)``."""
    if kappa.domain != mu.codomain:
        raise ShapeMismatch(
            f"compose: {kappa.domain.name!r} does not match {mu.codomain.name!r}"
        )
    return Kernel(mu.domain, kappa.codomain, mu.matrix @ kappa.matrix)


def strength(space: FinSpace, x, nu: Dist) -> Dist:
    """``delta_x (x) nu`` on ``space * nu.space``."""
    target = product([space, nu.space])
    w = np.zeros((len(space), len(nu.space)), dtype=nu.weights.dtype)
    if nu.exact:
        w[:] = Fraction(0)
    w[space.position(x)] = nu.weights
    return Dist(target, w.ravel())


def kernel_product(mu: Kernel, nu: Kernel) -> Kernel:
    """Semidirect product ``(mu (x) nu)(z)(x, y) = mu(y, z)(x) * nu(z)(y)``.

    ``mu`` must have domain ``product([Y, Z])`` where ``nu : Z -> Y``; the
    result is a kernel ``Z -> product([X, Y])``.
    """
    y_space, z_space = nu.codomain, nu.domain
    if mu.domain.kind != "product" or mu.domain.factors != (y_space, z_space):
        raise ShapeMismatch(
            f"kernel product: {mu.domain.name!r} is not the product of {y_space.name!r} and {z_space.name!r}"
        )
    x_space = mu.codomain
    target = product([x_space, y_space])
    m = mu.matrix.reshape(len(y_space), len(z_space), len(x_space))
    # out[z, x, y] = m[y, z, x] * nu[z, y]
    out = m.transpose(1, 2, 0) * nu.matrix[:, None, :]
    return Kernel(z_space, target, out.reshape(len(z_space), -1))


def independent_product(mu: Kernel, nu: Kernel) -> Kernel:
    """Parallel product ``U*Z -> X*Y`` of ``mu : U -> X`` and ``nu : Z -> Y``.

    Realized through :func:`kernel_product` by reindexing both kernels onto
    the joint domain.
    """
    uz = product([mu.domain, nu.domain])
    nu_lift = nu.pullback(uz, lambda p: p[1])
    y_uz = product([nu.codomain, uz])
    mu_lift = mu.pullback(y_uz, lambda p: p[1][0])
    return kernel_product(mu_lift, nu_lift)


def swap_product(k: Kernel, domain_swapped: bool = True) -> Kernel:
    """Swap the two factors of the codomain (and of the domain if it is a product)."""
    a, b = k.codomain.factors
    cod = product([b, a])
    t = k.tensor().transpose(0, 2, 1).reshape(len(k.domain), -1)
    out = Kernel(k.domain, cod, t)
    if domain_swapped and k.domain.kind == "product" and len(k.domain.factors) == 2:
        u, z = k.domain.factors
        dom = product([z, u])
        out = out.pullback(dom, lambda p: (p[1], p[0]))
    return out


def integrate(f: Callable, mu: Dist):
    """``sum_x f(x) mu(x)`` for a nonnegative function ``f``."""
    total = 0
    for x, w in zip(mu.space.points, mu.weights):
        v = f(x)
        if v < 0:
            raise DistributionError("integrand must be nonnegative")
        total = total + v * w
    return total


def marginal(joint, keep) -> Dist | Kernel:
    """Push a measure (or each row of a kernel) on a product onto the factors ``keep``.

    ``keep`` is a factor index or a sequence of them; a single index yields
    the factor space itself, several yield their product in the given order.
    """
    space = joint.space if isinstance(joint, Dist) else joint.codomain
    if space.kind != "product":
        raise ShapeMismatch(f"marginal of a non-product space {space.name!r}")
    factors = space.factors
    single = isinstance(keep, int)
    keep = [keep] if single else list(keep)
    for i in keep:
        if not 0 <= i < len(factors):
            raise ShapeMismatch(f"factor index {i} out of range")
    if isinstance(joint, Dist):
        t = joint.weights.reshape(space.shape)
        lead = 0
    else:
        t = joint.tensor()
        lead = 1
    drop = tuple(lead + i for i in range(len(factors)) if i not in keep)
    reduced = t.sum(axis=drop) if drop else t
    remaining = [i for i in range(len(factors)) if i in keep]
    perm = [remaining.index(i) for i in keep]
    reduced = reduced.transpose(([0] if lead else []) + [lead + p for p in perm])
    target = factors[keep[0]] if single else product([factors[i] for i in keep])
    if isinstance(joint, Dist):
        return Dist(target, reduced.reshape(-1))
    return Kernel(joint.domain, target, reduced.reshape(len(joint.domain), -1))
