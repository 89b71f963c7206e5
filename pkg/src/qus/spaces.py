"""Finite spaces with the power-set sigma-algebra and their categorical structure.

A :class:`FinSpace` is an ordered tuple of distinct points.  The order is
canonical: every probability table in the package is indexed by it.  Products
have tuple points, coproducts have :class:`Tagged` points and exponentials
have :class:`FnPoint` points, so implicit structure survives round trips.
"""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Callable, Hashable, Iterable, NamedTuple, Sequence

from .errors import CapExceeded, ShapeMismatch, SpaceError

DEFAULT_CAP = 100_000


def cardinality_cap() -> int:
    """Current cap on constructed space sizes (``QUS_CAP`` overrides the default)."""
    raw = os.environ.get("QUS_CAP")
    if raw is None:
        return DEFAULT_CAP
    try:
        cap = int(raw)
    except ValueError:
        raise SpaceError(f"QUS_CAP must be an integer, got {raw!r}") from None
    if cap < 1:
        raise SpaceError("QUS_CAP must be positive")
    return cap


def _check_cap(size: int) -> None:
    cap = cardinality_cap()
    if size > cap:
        raise CapExceeded(size, cap)


class Tagged(NamedTuple):
    """Point of a coproduct: the summand index and the point inside it."""

    index: int
    point: Any


def label(point: Any) -> str:
    """Deterministic printed form of a point."""
    if isinstance(point, str):
        return point
    if isinstance(point, Tagged):
        return f"in{point.index}:{label(point.point)}"
    if isinstance(point, tuple):
        return "(" + ",".join(label(p) for p in point) + ")"
    if isinstance(point, FnPoint):
        return "<" + ",".join(label(v) for v in point.table) + ">"
    return str(point)


@dataclass(frozen=True, eq=False)
class FinSpace:
    """Named finite set of points in canonical order.

    ``kind`` records how the space was built (``"atoms"``, ``"product"``,
    ``"coproduct"`` or ``"exponential"``) and ``parts`` the constituent spaces.
    """

    name: str
    points: tuple
    kind: str = "atoms"
    parts: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        object.__setattr__(self, "parts", tuple(self.parts))
        if len(self.points) == 0:
            raise SpaceError(f"space {self.name!r} has no points")
        if len(self.index) != len(self.points):
            seen = set()
            dup = next(p for p in self.points if p in seen or seen.add(p))
            raise SpaceError(f"space {self.name!r} repeats point {label(dup)!r}")

    @cached_property
    def index(self) -> dict:
        return {p: i for i, p in enumerate(self.points)}

    @cached_property
    def label_index(self) -> dict:
        return {label(p): i for i, p in enumerate(self.points)}

    @cached_property
    def _key(self):
        return (self.name, self.points)

    @cached_property
    def _hash(self) -> int:
        return hash(self._key)

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, FinSpace):
            return NotImplemented
        return self._hash == other._hash and self._key == other._key

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __contains__(self, point):
        try:
            return point in self.index
        except TypeError:
            return False

    def __repr__(self):
        return f"FinSpace({self.name!r}, {len(self.points)} points)"

    def position(self, point) -> int:
        """Canonical index of ``point``; raises :class:`SpaceError` if absent."""
        try:
            return self.index[point]
        except (KeyError, TypeError):
            raise SpaceError(f"{label(point)!r} is not a point of {self.name!r}") from None

    def lookup(self, text: str):
        """Point whose printed form is ``text``."""
        try:
            return self.points[self.label_index[text]]
        except KeyError:
            raise SpaceError(f"{text!r} is not a point of {self.name!r}") from None

    @property
    def factors(self) -> tuple:
        if self.kind != "product":
            raise ShapeMismatch(f"{self.name!r} is not a product space")
        return self.parts

    @property
    def shape(self) -> tuple:
        """Factor sizes of a product space, ``(len(self),)`` otherwise."""
        if self.kind == "product":
            return tuple(len(f) for f in self.parts)
        return (len(self),)


def atoms(name: str, points: Iterable[Hashable]) -> FinSpace:
    return FinSpace(name, tuple(points))


UNIT = FinSpace("1", ("0",))
BOOL = FinSpace("2", ("0", "1"))


def product(spaces: Sequence[FinSpace], name: str | None = None) -> FinSpace:
    """Cartesian product; points are tuples in declaration order (first factor slowest)."""
    spaces = tuple(spaces)
    if not spaces:
        raise SpaceError("product of an empty list of spaces")
    _check_cap(math.prod(len(s) for s in spaces))
    points = tuple(itertools.product(*(s.points for s in spaces)))
    if name is None:
        name = "*".join(_wrap(s.name) for s in spaces)
        if len(spaces) == 1:
            name = f"({spaces[0].name})"
    return FinSpace(name, points, "product", spaces)


def coproduct(spaces: Sequence[FinSpace], name: str | None = None) -> FinSpace:
    """Disjoint union with points ``Tagged(i, x)``."""
    spaces = tuple(spaces)
    if not spaces:
        raise SpaceError("coproduct of an empty list of spaces")
    _check_cap(sum(len(s) for s in spaces))
    points = tuple(Tagged(i, p) for i, s in enumerate(spaces) for p in s.points)
    if name is None:
        name = "+".join(_wrap(s.name) for s in spaces)
    return FinSpace(name, points, "coproduct", spaces)


def _wrap(name: str) -> str:
    return f"({name})" if any(c in name for c in "*+^") else name


@dataclass(frozen=True)
class FnPoint:
    """A total map between finite spaces, stored as values in domain order."""

    domain: FinSpace
    codomain: FinSpace
    table: tuple

    def __post_init__(self):
        object.__setattr__(self, "table", tuple(self.table))
        if len(self.table) != len(self.domain):
            raise SpaceError(
                f"map table has {len(self.table)} entries, domain {self.domain.name!r} "
                f"has {len(self.domain)} points"
            )
        for v in self.table:
            if v not in self.codomain:
                raise SpaceError(f"value {label(v)!r} not in codomain {self.codomain.name!r}")

    def __call__(self, z):
        return evaluate(self, z)

    @classmethod
    def from_callable(cls, domain: FinSpace, codomain: FinSpace, fn: Callable) -> "FnPoint":
        return cls(domain, codomain, tuple(fn(z) for z in domain.points))

    @classmethod
    def identity(cls, space: FinSpace) -> "FnPoint":
        return cls(space, space, space.points)

    @classmethod
    def constant(cls, domain: FinSpace, codomain: FinSpace, value) -> "FnPoint":
        return cls(domain, codomain, (value,) * len(domain))

    def then(self, other: "FnPoint") -> "FnPoint":
        """``other`` after ``self``."""
        if other.domain != self.codomain:
            raise ShapeMismatch("composition of non-matching maps")
        return FnPoint(self.domain, other.codomain, tuple(other(v) for v in self.table))


def evaluate(f: FnPoint, z):
    """Evaluation map ``(f, z) -> f(z)``."""
    return f.table[f.domain.position(z)]


def exponential(domain: FinSpace, codomain: FinSpace, name: str | None = None) -> FinSpace:
    """Function space of all maps ``domain -> codomain``.

    Enumeration is lexicographic over the domain's point order: the value at
    the first domain point varies slowest.
    """
    size = len(codomain) ** len(domain)
    _check_cap(size)
    points = tuple(
        FnPoint(domain, codomain, values)
        for values in itertools.product(codomain.points, repeat=len(domain))
    )
    if name is None:
        name = f"{_wrap(codomain.name)}^{_wrap(domain.name)}"
    return FinSpace(name, points, "exponential", (domain, codomain))


def projection(space: FinSpace, i: int) -> FnPoint:
    factors = space.factors
    return FnPoint(space, factors[i], tuple(p[i] for p in space.points))


def injection(space: FinSpace, i: int) -> FnPoint:
    if space.kind != "coproduct":
        raise ShapeMismatch(f"{space.name!r} is not a coproduct space")
    summand = space.parts[i]
    return FnPoint(summand, space, tuple(Tagged(i, p) for p in summand.points))


def pairing(maps: Sequence[FnPoint], target: FinSpace | None = None) -> FnPoint:
    """The unique map into a product whose projections are ``maps``."""
    domain = maps[0].domain
    if any(m.domain != domain for m in maps):
        raise ShapeMismatch("pairing of maps with different domains")
    if target is None:
        target = product([m.codomain for m in maps])
    return FnPoint(domain, target, tuple(tuple(m.table[i] for m in maps) for i in range(len(domain))))


def copairing(maps: Sequence[FnPoint], source: FinSpace | None = None) -> FnPoint:
    """The unique map out of a coproduct whose restrictions are ``maps``."""
    codomain = maps[0].codomain
    if any(m.codomain != codomain for m in maps):
        raise ShapeMismatch("copairing of maps with different codomains")
    if source is None:
        source = coproduct([m.domain for m in maps])
    return FnPoint(source, codomain, tuple(maps[t.index](t.point) for t in source.points))


def curry(g: FnPoint) -> FnPoint:
    """Turn ``g: Z*W -> X`` into ``Z -> X^W``."""
    z_space, w_space = g.domain.factors
    target = exponential(w_space, g.codomain)
    table = []
    for z in z_space.points:
        table.append(FnPoint(w_space, g.codomain, tuple(g((z, w)) for w in w_space.points)))
    return FnPoint(z_space, target, tuple(table))


def uncurry(h: FnPoint, pair_space: FinSpace | None = None) -> FnPoint:
    """Turn ``h: Z -> X^W`` into ``Z*W -> X``."""
    w_space, x_space = h.codomain.parts
    if pair_space is None:
        pair_space = product([h.domain, w_space])
    return FnPoint(pair_space, x_space, tuple(evaluate(h(z), w) for z, w in pair_space.points))


def distribute(space: FinSpace, summands: Sequence[FinSpace]) -> FnPoint:
    """Canonical bijection ``X * (Y0 + ... + Yk) -> X*Y0 + ... + X*Yk``."""
    source = product([space, coproduct(summands)])
    target = coproduct([product([space, s]) for s in summands])
    return FnPoint(source, target, tuple(Tagged(t.index, (x, t.point)) for x, t in source.points))


@dataclass(frozen=True)
class FinEvent:
    space: FinSpace
    members: frozenset

    def __post_init__(self):
        object.__setattr__(self, "members", frozenset(self.members))
        for m in self.members:
            if m not in self.space:
                raise SpaceError(f"{label(m)!r} is not a point of {self.space.name!r}")

    def __contains__(self, point):
        return point in self.members

    def mask(self) -> list[bool]:
        return [p in self.members for p in self.space.points]


def event_to_indicator(event: FinEvent) -> FnPoint:
    """Indicator ``1_A`` as a map into the canonical two-point space."""
    return FnPoint(
        event.space, BOOL, tuple("1" if p in event.members else "0" for p in event.space.points)
    )


def indicator_to_event(f: FnPoint) -> FinEvent:
    if f.codomain != BOOL:
        raise SpaceError(f"indicator must map into the two-point space, not {f.codomain.name!r}")
    return FinEvent(f.domain, frozenset(z for z, v in zip(f.domain.points, f.table) if v == "1"))


def nodes_space(spaces: Sequence[FinSpace]) -> FinSpace:
    """Space of a tuple of variables: one-point if empty, the space itself if single."""
    spaces = tuple(spaces)
    if not spaces:
        return UNIT
    if len(spaces) == 1:
        return spaces[0]
    return product(spaces)
