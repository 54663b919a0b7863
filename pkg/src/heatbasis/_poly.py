"""Sparse multivariate polynomials with float coefficients.

Only what the caloric dictionary needs: arithmetic, differentiation,
vectorised evaluation, and a JSON-friendly term list.
"""

from __future__ import annotations

from collections import defaultdict

import numpy as np


class Poly:
    """Polynomial in ``nvars`` variables stored as ``{exponents: coefficient}``."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms=None):
        self.nvars = nvars
        clean = {}
        for e, c in (terms or {}).items():
            e = tuple(int(v) for v in e)
            if len(e) != nvars:
                raise ValueError(f"exponent {e} does not have {nvars} entries")
            if c != 0:
                clean[e] = clean.get(e, 0.0) + float(c)
        self.terms = {e: c for e, c in sorted(clean.items()) if c != 0}

    @classmethod
    def zero(cls, nvars: int) -> Poly:
        return cls(nvars)

    @classmethod
    def constant(cls, nvars: int, c: float) -> Poly:
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def variable(cls, nvars: int, i: int) -> Poly:
        e = [0] * nvars
        e[i] = 1
        return cls(nvars, {tuple(e): 1.0})

    def __repr__(self):
        return f"Poly({self.nvars}, {self.terms})"

    def __eq__(self, other):
        return isinstance(other, Poly) and self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self):
        return hash((self.nvars, tuple(self.terms.items())))

    def __add__(self, other: Poly) -> Poly:
        out = defaultdict(float, self.terms)
        for e, c in other.terms.items():
            out[e] += c
        return Poly(self.nvars, out)

    def __neg__(self) -> Poly:
        return self.scaled(-1.0)

    def __sub__(self, other: Poly) -> Poly:
        return self + (-other)

    def __mul__(self, other) -> Poly:
        if not isinstance(other, Poly):
            return self.scaled(other)
        out = defaultdict(float)
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                out[tuple(a + b for a, b in zip(e1, e2))] += c1 * c2
        return Poly(self.nvars, out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> Poly:
        out = Poly.constant(self.nvars, 1.0)
        for _ in range(k):
            out = out * self
        return out

    def scaled(self, s: float) -> Poly:
        return Poly(self.nvars, {e: c * s for e, c in self.terms.items()})

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def is_zero(self) -> bool:
        return not self.terms

    def diff(self, i: int, order: int = 1) -> Poly:
        p = self
        for _ in range(order):
            out = {}
            for e, c in p.terms.items():
                if e[i]:
                    ne = list(e)
                    ne[i] -= 1
                    out[tuple(ne)] = out.get(tuple(ne), 0.0) + c * e[i]
            p = Poly(self.nvars, out)
        return p

    def laplacian(self, n: int) -> Poly:
        """Sum of second derivatives in the first ``n`` variables."""
        out = Poly.zero(self.nvars)
        for i in range(n):
            out = out + self.diff(i, 2)
        return out

    def extend(self, extra: int = 1) -> Poly:
        """Same polynomial viewed in ``nvars + extra`` variables."""
        return Poly(self.nvars + extra, {e + (0,) * extra: c for e, c in self.terms.items()})

    def __call__(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[1] != self.nvars:
            raise ValueError(f"expected points with {self.nvars} columns, got {pts.shape[1]}")
        out = np.zeros(pts.shape[0])
        if not self.terms:
            return out
        maxdeg = max(max(e) for e in self.terms)
        powers = np.ones((maxdeg + 1,) + pts.shape)
        for d in range(1, maxdeg + 1):
            powers[d] = powers[d - 1] * pts
        cols = np.arange(self.nvars)
        for e, c in self.terms.items():
            out += c * np.prod(powers[list(e), :, cols].T, axis=1)
        return out

    def to_list(self) -> list:
        return [[list(e), c] for e, c in self.terms.items()]

    @classmethod
    def from_list(cls, nvars: int, items) -> Poly:
        return cls(nvars, {tuple(e): c for e, c in items})
