"""Conditioning and deterministic kernels.

Conditionals on finite spaces are only fixed up to null sets of the
marginal; rows with zero marginal mass receive a configurable fallback
(``"uniform"`` or ``"first"`` atom) so that results are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import NotDeterministic, ShapeMismatch
from .monad import ATOL, Kernel, allclose, is_exact, kernel_product, marginal
from .spaces import FnPoint, product

FALLBACKS = ("uniform", "first")


def fallback_row(n: int, fallback: str = "uniform", exact: bool = False) -> np.ndarray:
    if fallback not in FALLBACKS:
        raise ValueError(f"fallback must be one of {FALLBACKS}, got {fallback!r}")
    if exact:
        row = np.array([Fraction(0)] * n, dtype=object)
        if fallback == "uniform":
            row[:] = Fraction(1, n)
        else:
            row[0] = Fraction(1)
        return row
    if fallback == "uniform":
        return np.full(n, 1.0 / n)
    row = np.zeros(n)
    row[0] = 1.0
    return row


def condition_rows(joint: np.ndarray, mass: np.ndarray, fallback: str = "uniform") -> np.ndarray:
    """Divide ``joint[..., x]`` by ``mass[...]`` where positive, fallback rows elsewhere."""
    exact = is_exact(joint)
    n = joint.shape[-1]
    out = np.empty(joint.shape, dtype=object if exact else np.float64)
    fb = fallback_row(n, fallback, exact)
    flat_j = joint.reshape(-1, n)
    flat_m = mass.reshape(-1)
    flat_o = out.reshape(-1, n)
    for i in range(flat_m.shape[0]):
        if flat_m[i] > 0:
            flat_o[i] = flat_j[i] / flat_m[i]
        else:
            flat_o[i] = fb
    if not exact:
        # keep rows stochastic to the last ulp after division
        flat_o /= flat_o.sum(axis=1, keepdims=True)
    return out


def disintegrate(k: Kernel, fallback: str = "uniform") -> tuple[Kernel, Kernel]:
    """Split ``K : Z -> X*Y`` into ``cond : Y*Z -> X`` and ``marg : Z -> Y``.

    ``kernel_product(cond, marg)`` reproduces ``k`` exactly in rational mode
    and to rounding in float mode.
    """
    x_space, y_space = k.codomain.factors
    z_space = k.domain
    t = k.tensor()  # (z, x, y)
    marg_m = t.sum(axis=1)  # (z, y)
    marg = Kernel(z_space, y_space, marg_m)
    # cond[(y, z), x] = t[z, x, y] / marg[z, y]
    cond_t = condition_rows(t.transpose(2, 0, 1), marg_m.T, fallback)
    cond = Kernel(product([y_space, z_space]), x_space, cond_t.reshape(len(y_space) * len(z_space), -1))
    return cond, marg


def check_factorization(k: Kernel, q: Kernel, tol: float = ATOL) -> bool:
    """Whether ``kernel_product(q, Y-marginal of k)`` equals ``k`` atomwise."""
    x_space, y_space = k.codomain.factors
    if q.codomain != x_space or q.domain.kind != "product" or q.domain.factors != (y_space, k.domain):
        raise ShapeMismatch("check_factorization: conditional kernel does not match the joint")
    marg = marginal(k, 1)
    return kernel_product(q, marg).isclose(k, tol)


@dataclass(frozen=True)
class NullReport:
    """Cells where two conditionals disagree and the marginal mass they carry."""

    cells: tuple
    mass: float

    @property
    def empty(self) -> bool:
        return not self.cells


def essential_uniqueness(q1: Kernel, q2: Kernel, marg: Kernel, tol: float = ATOL) -> NullReport:
    """Disagreement set of two conditionals ``Y*Z -> X`` and its worst-case marginal mass."""
    if q1.domain != q2.domain or q1.codomain != q2.codomain:
        raise ShapeMismatch("essential_uniqueness: conditionals live on different spaces")
    y_space, z_space = q1.domain.factors
    if marg.domain != z_space or marg.codomain != y_space:
        raise ShapeMismatch("essential_uniqueness: marginal does not match the conditionals")
    exact = q1.exact and q2.exact
    cells = []
    mass_by_z = [0] * len(z_space)
    for i, (y, z) in enumerate(q1.domain.points):
        a, b = q1.matrix[i], q2.matrix[i]
        differ = not allclose(a, b, tol) if not exact else bool(np.any(a != b))
        if differ:
            cells.append((y, z))
            zi = z_space.position(z)
            mass_by_z[zi] = mass_by_z[zi] + marg.matrix[zi, y_space.position(y)]
    return NullReport(tuple(cells), float(max(mass_by_z)) if mass_by_z else 0.0)


def is_zero_one_deterministic(k: Kernel, tol: float = ATOL) -> bool:
    m = k.matrix
    if k.exact:
        return all(v == 0 or v == 1 for v in m.ravel())
    m = np.asarray(m, dtype=np.float64)
    return bool(np.all((np.abs(m) <= tol) | (np.abs(m - 1.0) <= tol)))


def is_copy_deterministic(k: Kernel, tol: float = ATOL) -> bool:
    """Whether ``K(z) (x) K(z)`` equals the diagonal push-forward of ``K(z)`` for every ``z``."""
    product([k.codomain, k.codomain])  # cap check on Y*Y
    for row in k.matrix:
        outer = np.multiply.outer(row, row)
        diag = np.zeros_like(outer)
        if k.exact:
            diag[:] = Fraction(0)
        idx = np.arange(len(row))
        diag[idx, idx] = row
        if not allclose(outer, diag, tol):
            return False
    return True


def extract_function(k: Kernel, tol: float = ATOL) -> FnPoint:
    """The map ``g`` with ``K(z) = delta_{g(z)}``."""
    if not is_zero_one_deterministic(k, tol):
        raise NotDeterministic(f"{k!r} is not 0-1-deterministic")
    m = np.asarray(k.matrix, dtype=np.float64)
    return FnPoint(k.domain, k.codomain, tuple(k.codomain.points[int(np.argmax(r))] for r in m))


def is_function_deterministic(k: Kernel, tol: float = ATOL) -> bool:
    try:
        g = extract_function(k, tol)
    except NotDeterministic:
        return False
    return Kernel.deterministic(g, exact=k.exact).isclose(k, tol)
