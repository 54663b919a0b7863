"""Anisotropic Sobolev inner products over space-time cylinders and Gram
matrix assembly.

``Aniso(s)`` is the inner product summing ``d^j/dt^j d^alpha/dx^alpha``
products over ``|alpha| + 2j <= 2s``; ``AnisoK(k, s)`` additionally sums over
all spatial derivatives of order at most ``k``. ``L2`` is ``Aniso(0)``.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ._csvio import write_csv
from .caloric import MAX_ORDER, design_matrix
from .domain import Cylinder, QuadratureRule, tensor_quadrature
from .exceptions import DomainError

__all__ = [
    "InnerProductSpec",
    "derivative_terms",
    "inner_product",
    "gram",
    "write_gram_csv",
]


def _multi_indices(n: int, max_total: int):
    """Spatial multi-indices with |alpha| <= max_total, graded lexicographic."""
    out = []
    for total in range(max_total + 1):
        level = [a for a in itertools.product(range(total + 1), repeat=n) if sum(a) == total]
        out.extend(sorted(level, reverse=True))
    return out


def derivative_terms(n: int, s: int, k: int = 0) -> list:
    """``[(alpha, j, multiplicity)]`` whose weighted sum of L2 products is the
    ``H^{k,2s,s}`` inner product, in a fixed graded order."""
    if s < 0 or k < 0:
        raise DomainError("Sobolev indices must be non-negative")
    if k + 2 * s > MAX_ORDER:
        raise DomainError(f"k + 2s = {k + 2 * s} exceeds the supported derivative order {MAX_ORDER}")
    counts: Counter = Counter()
    order = []
    for beta in _multi_indices(n, k):
        for j in range(s + 1):
            for alpha in _multi_indices(n, 2 * s - 2 * j):
                key = (tuple(a + b for a, b in zip(alpha, beta)), j)
                if key not in counts:
                    order.append(key)
                counts[key] += 1
    return [(alpha, j, counts[(alpha, j)]) for alpha, j in order]


@dataclass(frozen=True, eq=False)
class InnerProductSpec:
    """Which inner product, on which cylinder, with which quadrature rule.

    ``kind`` is ``"l2"``, ``"aniso"`` (uses ``s``) or ``"aniso_k"`` (uses
    ``k`` and ``s``). When ``rule`` is omitted it is built from ``resolution``.
    """

    kind: str
    cylinder: Cylinder
    s: int = 0
    k: int = 0
    resolution: tuple = (12, 24, 8)
    rule: QuadratureRule = field(default=None)

    def __post_init__(self):
        kind = self.kind.lower()
        if kind not in ("l2", "aniso", "aniso_k"):
            raise DomainError(f"unknown inner product kind {self.kind!r}")
        s, k = int(self.s), int(self.k)
        if kind == "l2":
            s = k = 0
        elif kind == "aniso":
            k = 0
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "k", k)
        derivative_terms(self.cylinder.dimension, s, k)
        if self.rule is None:
            object.__setattr__(self, "rule", tensor_quadrature(self.cylinder, self.resolution))
        elif self.rule.dimension != self.cylinder.dimension:
            raise DomainError("quadrature rule dimension does not match the cylinder")

    @property
    def terms(self) -> list:
        return derivative_terms(self.cylinder.dimension, self.s, self.k)

    def describe(self) -> dict:
        return {"kind": self.kind, "s": self.s, "k": self.k,
                "cylinder": self.cylinder.to_dict(), "resolution": list(self.rule.resolution)}


def _values(u, points, alpha, j) -> np.ndarray:
    if hasattr(u, "derivative"):
        return np.asarray(u.derivative(points, alpha, j), dtype=float)
    if callable(u):
        if any(alpha) or j:
            raise DomainError("plain callables only support the L2 inner product")
        vals = np.asarray(u(points), dtype=float)
        return np.broadcast_to(vals, (len(points),))
    raise DomainError(f"cannot evaluate {u!r}")


def inner_product(u, v, spec: InnerProductSpec) -> float:
    """Quadrature value of the inner product of ``u`` and ``v``; symmetric in
    its arguments bit for bit."""
    nodes, w = spec.rule.nodes, spec.rule.weights
    total = 0.0
    for alpha, j, mult in spec.terms:
        du = _values(u, nodes, alpha, j)
        dv = _values(v, nodes, alpha, j)
        total += mult * float(np.sum(w * (du * dv)))
    return total


def gram(dictionary: Sequence, spec: InnerProductSpec) -> np.ndarray:
    """Gram matrix of ``dictionary`` under ``spec``; exactly symmetric."""
    N = len(dictionary)
    G = np.zeros((N, N))
    if N == 0:
        return G
    nodes, w = spec.rule.nodes, spec.rule.weights
    for alpha, j, mult in spec.terms:
        D = design_matrix(dictionary, nodes, alpha, j)
        G += mult * ((D * w[:, None]).T @ D)
    return 0.5 * (G + G.T)


def write_gram_csv(G, path):
    """One CSV line per matrix row, header ``c0, c1, ...``."""
    G = np.asarray(G, dtype=float)
    return write_csv(path, [f"c{j}" for j in range(G.shape[1])], (list(r) for r in G))
