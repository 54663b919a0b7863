"""Exact solutions of the heat equation ``u_t = Laplacian(u)`` and their
derivatives.

Every atom exposes ``derivative(points, alpha, j)`` returning
``d^j/dt^j d^alpha/dx^alpha u`` at the rows of ``points`` (shape
``(m, n + 1)``, last column time). Calling an atom evaluates it.
"""

from __future__ import annotations

import functools
import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.polynomial import hermite as _herm

from ._poly import Poly
from .domain import Cylinder
from .exceptions import DomainError, UnsupportedPointError
from .specialfn import (
    HarmonicIndex,
    bessel_j_scaled,
    bessel_zero,
    harmonic_polynomial,
    standard_order,
)

__all__ = [
    "MultiIndex",
    "CaloricAtom",
    "HeatPolynomial",
    "FundamentalTranslate",
    "SeparableBall",
    "StaticHarmonic",
    "BiharmonicCaloric",
    "Combination",
    "MAX_ORDER",
    "fundamental_solution",
    "eval_atom",
    "heat_residual",
    "design_matrix",
    "atom_from_dict",
    "dictionary_to_json",
    "dictionary_from_json",
]

MAX_ORDER = 4


@dataclass(frozen=True)
class MultiIndex:
    """Spatial orders ``alpha`` and temporal order ``j``; graded by |alpha| + 2j."""

    alpha: tuple
    j: int = 0

    def __post_init__(self):
        object.__setattr__(self, "alpha", tuple(int(a) for a in self.alpha))
        if any(a < 0 for a in self.alpha) or self.j < 0:
            raise DomainError("derivative orders must be non-negative")

    @property
    def order(self) -> int:
        return sum(self.alpha) + 2 * self.j


def _points(points, n: int) -> np.ndarray:
    p = np.atleast_2d(np.asarray(points, dtype=float))
    if p.shape[1] != n + 1:
        raise DomainError(f"expected space-time points with {n + 1} columns, got {p.shape[1]}")
    return p


def _alpha(alpha, n: int) -> tuple:
    if alpha is None:
        return (0,) * n
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != n:
        raise DomainError(f"multi-index {alpha} does not match dimension {n}")
    return alpha


class CaloricAtom:
    """Common behaviour of dictionary atoms; subclasses are frozen dataclasses."""

    n: int
    exact = True

    def derivative(self, points, alpha=None, j: int = 0) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, points) -> np.ndarray:
        return self.derivative(points)

    def singular_in(self, cyl: Cylinder) -> bool:
        """True when the atom fails to be smooth somewhere on the closed cylinder."""
        return False

    def to_dict(self) -> dict:
        raise NotImplementedError


class _PolyAtom(CaloricAtom):
    """Atoms that are polynomials in (x, t)."""

    @functools.cached_property
    def poly(self) -> Poly:
        return self._build()

    def derivative(self, points, alpha=None, j: int = 0) -> np.ndarray:
        p = _points(points, self.n)
        poly = self.poly
        for i, a in enumerate(_alpha(alpha, self.n)):
            poly = poly.diff(i, a)
        poly = poly.diff(self.n, j)
        return poly(p)


def _heat_poly_1d(m: int, var: int, nvars: int) -> Poly:
    # H_m(x, t) = m! sum_q t^q x^(m-2q) / (q! (m-2q)!)
    terms = {}
    for q in range(m // 2 + 1):
        e = [0] * nvars
        e[var] = m - 2 * q
        e[-1] = q
        terms[tuple(e)] = math.factorial(m) / (math.factorial(q) * math.factorial(m - 2 * q))
    return Poly(nvars, terms)


@dataclass(frozen=True)
class HeatPolynomial(_PolyAtom):
    """Product over coordinates of 1-D heat polynomials of the given degrees."""

    degrees: tuple

    def __post_init__(self):
        object.__setattr__(self, "degrees", tuple(int(d) for d in self.degrees))
        if not 1 <= len(self.degrees) <= 3 or any(d < 0 for d in self.degrees):
            raise DomainError(f"invalid heat polynomial degrees {self.degrees}")

    @property
    def n(self) -> int:
        return len(self.degrees)

    def _build(self) -> Poly:
        out = Poly.constant(self.n + 1, 1.0)
        for i, d in enumerate(self.degrees):
            out = out * _heat_poly_1d(d, i, self.n + 1)
        return out

    def to_dict(self) -> dict:
        return {"kind": "heat_polynomial", "degrees": list(self.degrees)}


@dataclass(frozen=True)
class StaticHarmonic(_PolyAtom):
    """Time-independent solid harmonic ``|x|^k h_k^(j)(x/|x|)``."""

    n: int
    k: int
    j: int

    def __post_init__(self):
        HarmonicIndex(self.n, self.k, self.j)

    def _build(self) -> Poly:
        return harmonic_polynomial(HarmonicIndex(self.n, self.k, self.j)).extend()

    def to_dict(self) -> dict:
        return {"kind": "static_harmonic", "n": self.n, "k": self.k, "j": self.j}


@dataclass(frozen=True)
class BiharmonicCaloric(_PolyAtom):
    """``t Laplacian(G) + G`` for a homogeneous biharmonic polynomial ``G`` in x."""

    G: Poly = field(compare=True)

    def __post_init__(self):
        if not isinstance(self.G, Poly):
            raise DomainError("G must be a Poly in the spatial variables")
        n = self.G.nvars
        if n not in (1, 2, 3):
            raise DomainError(f"unsupported dimension {n}")
        degs = {sum(e) for e in self.G.terms}
        if len(degs) > 1:
            raise DomainError("G must be homogeneous")
        bi = self.G.laplacian(n).laplacian(n)
        scale = max((abs(c) for c in self.G.terms.values()), default=1.0)
        if any(abs(c) > 1e-12 * scale for c in bi.terms.values()):
            raise DomainError("G is not biharmonic")

    @property
    def n(self) -> int:
        return self.G.nvars

    def _build(self) -> Poly:
        g = self.G.extend()
        t = Poly.variable(self.n + 1, self.n)
        return t * self.G.laplacian(self.n).extend() + g

    def to_dict(self) -> dict:
        return {"kind": "biharmonic_caloric", "n": self.n, "G": self.G.to_list()}


def fundamental_solution(n: int, x, t):
    """Heat kernel ``exp(-|x|^2 / 4t) / (2 sqrt(pi t))^n`` for ``t > 0``, zero for ``t <= 0``.

    ``x`` has shape ``(n,)`` or ``(m, n)``; ``t`` scalar or ``(m,)``.
    """
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 1 and np.ndim(t) == 0
    x = np.atleast_2d(x)
    if x.shape[1] != n:
        raise DomainError(f"expected {n} spatial components")
    t = np.broadcast_to(np.asarray(t, dtype=float), (x.shape[0],))
    r2 = np.sum(x * x, axis=1)
    if np.any((t == 0) & (r2 == 0)):
        raise UnsupportedPointError("the heat kernel is singular at (0, 0)")
    out = np.zeros(x.shape[0])
    pos = t > 0
    tp = t[pos]
    out[pos] = np.exp(-r2[pos] / (4 * tp)) / (2 * np.sqrt(np.pi * tp)) ** n
    return float(out[0]) if scalar else out


def _hermite(a: int, z: np.ndarray) -> np.ndarray:
    c = np.zeros(a + 1)
    c[a] = 1.0
    return _herm.hermval(z, c)


def _kernel_spatial_derivative(z: np.ndarray, s: np.ndarray, alpha: tuple) -> np.ndarray:
    # d^a/dx^a exp(-x^2/4s) = (-1)^a (4s)^(-a/2) H_a(x / sqrt(4s)) exp(-x^2/4s)
    n = z.shape[1]
    out = np.zeros(z.shape[0])
    pos = s > 0
    if not pos.any():
        return out
    zp, sp = z[pos], s[pos]
    val = np.exp(-np.sum(zp * zp, axis=1) / (4 * sp)) / (2 * np.sqrt(np.pi * sp)) ** n
    root = np.sqrt(4 * sp)
    for i, a in enumerate(alpha):
        if a:
            val = val * (-1) ** a * root ** (-a) * _hermite(a, zp[:, i] / root)
    out[pos] = val
    return out


def _laplacian_powers(n: int, j: int):
    """Expansion of Laplacian^j as ``[(multinomial, beta)]`` with |beta| = j."""
    out = []
    for beta in itertools.product(range(j + 1), repeat=n):
        if sum(beta) == j:
            coef = math.factorial(j)
            for b in beta:
                coef //= math.factorial(b)
            out.append((coef, beta))
    return out


@dataclass(frozen=True)
class FundamentalTranslate(CaloricAtom):
    """``(x, t) -> Phi(x - y, t - tau)`` for a source point ``(y, tau)``."""

    source: tuple

    def __post_init__(self):
        src = tuple(float(c) for c in self.source)
        if not 2 <= len(src) <= 4:
            raise DomainError("source must be (y_1, ..., y_n, tau) with n in 1..3")
        object.__setattr__(self, "source", src)

    @property
    def n(self) -> int:
        return len(self.source) - 1

    def derivative(self, points, alpha=None, j: int = 0) -> np.ndarray:
        p = _points(points, self.n)
        alpha = _alpha(alpha, self.n)
        z = p[:, :-1] - np.asarray(self.source[:-1])
        s = p[:, -1] - self.source[-1]
        if np.any((s == 0) & np.all(z == 0, axis=1)):
            raise UnsupportedPointError("evaluation at the source of a fundamental translate")
        # d/dt Phi = Laplacian Phi away from the source
        out = np.zeros(p.shape[0])
        for coef, beta in _laplacian_powers(self.n, j):
            total = tuple(a + 2 * b for a, b in zip(alpha, beta))
            out += coef * _kernel_spatial_derivative(z, s, total)
        return out

    def singular_in(self, cyl: Cylinder) -> bool:
        return bool(cyl.closure_contains(np.asarray(self.source))[0])

    def to_dict(self) -> dict:
        return {"kind": "fundamental_translate", "source": list(self.source)}


@dataclass(frozen=True)
class SeparableBall(CaloricAtom):
    """``exp(-lam t) r^((2-n)/2) J_p(sqrt(lam) r) h_k^(j)(x/r)`` on the ball
    ``B(0, R2)``, with ``p = k + (n-2)/2`` and ``sqrt(lam) R2`` the ``m``-th
    positive zero of ``J_p`` (Dirichlet) or ``J_p'`` (Neumann).

    With ``G_nu(z) = z^-nu J_nu(z)`` the spatial profile equals
    ``kappa^p G_p(kappa r) P(x)`` for the solid harmonic polynomial ``P``, and
    ``d/dx_i G_nu(kappa r) = -kappa^2 x_i G_{nu+1}(kappa r)``; derivatives of
    every order are therefore exact sums of ``G_{p+q}`` times polynomials.
    """

    n: int
    problem: str
    k: int
    j: int
    m: int
    R2: float = 1.0

    def __post_init__(self):
        if self.n not in (2, 3):
            raise DomainError("separable ball atoms need n in {2, 3}")
        prob = self.problem.lower()
        if prob not in ("dirichlet", "neumann"):
            raise DomainError(f"problem must be 'dirichlet' or 'neumann', got {self.problem!r}")
        object.__setattr__(self, "problem", prob)
        HarmonicIndex(self.n, self.k, self.j)
        if self.m < 1 or not self.R2 > 0:
            raise DomainError("need m >= 1 and R2 > 0")

    @property
    def order(self) -> float:
        return standard_order(self.n, self.k)

    @functools.cached_property
    def kappa(self) -> float:
        kind = "function" if self.problem == "dirichlet" else "derivative"
        return bessel_zero(self.order, self.m, kind) / self.R2

    @property
    def lam(self) -> float:
        """Decay rate; the profile satisfies ``Laplacian B = -lam B``."""
        return self.kappa**2

    @functools.cached_property
    def _harmonic(self) -> Poly:
        return harmonic_polynomial(HarmonicIndex(self.n, self.k, self.j))

    @functools.lru_cache(maxsize=None)
    def _terms(self, alpha: tuple) -> tuple:
        if not any(alpha):
            return ((0, self._harmonic),)
        i = next(idx for idx, a in enumerate(alpha) if a)
        lower = list(alpha)
        lower[i] -= 1
        k2 = self.kappa**2
        xi = Poly.variable(self.n, i)
        acc: dict[int, Poly] = {}
        for q, poly in self._terms(tuple(lower)):
            acc[q + 1] = acc.get(q + 1, Poly.zero(self.n)) + (poly * xi).scaled(-k2)
            d = poly.diff(i)
            if not d.is_zero():
                acc[q] = acc.get(q, Poly.zero(self.n)) + d
        return tuple(sorted((q, p) for q, p in acc.items() if not p.is_zero()))

    def profile_derivative(self, x, alpha=None) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        alpha = _alpha(alpha, self.n)
        r = np.linalg.norm(x, axis=1)
        z = self.kappa * r
        p = self.order
        out = np.zeros(x.shape[0])
        for q, poly in self._terms(alpha):
            out += bessel_j_scaled(p + q, z) * poly(x)
        return self.kappa**p * out

    def derivative(self, points, alpha=None, j: int = 0) -> np.ndarray:
        p = _points(points, self.n)
        time = (-self.lam) ** j * np.exp(-self.lam * p[:, -1])
        return time * self.profile_derivative(p[:, :-1], alpha)

    def to_dict(self) -> dict:
        return {"kind": "separable_ball", "n": self.n, "problem": self.problem,
                "k": self.k, "j": self.j, "m": self.m, "R2": self.R2}


@dataclass(frozen=True)
class Combination(CaloricAtom):
    """Finite linear combination ``sum c_i atom_i``."""

    atoms: tuple
    coefficients: tuple

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple(self.atoms))
        object.__setattr__(self, "coefficients", tuple(float(c) for c in self.coefficients))
        if len(self.atoms) != len(self.coefficients):
            raise DomainError("atoms and coefficients differ in length")
        if not self.atoms:
            raise DomainError("empty combination")
        if len({a.n for a in self.atoms}) != 1:
            raise DomainError("atoms of mixed dimension")

    @property
    def n(self) -> int:
        return self.atoms[0].n

    @property
    def exact(self) -> bool:
        return all(a.exact for a in self.atoms)

    def derivative(self, points, alpha=None, j: int = 0) -> np.ndarray:
        return design_matrix(self.atoms, points, alpha, j) @ np.asarray(self.coefficients)

    def singular_in(self, cyl: Cylinder) -> bool:
        return any(a.singular_in(cyl) for a in self.atoms)

    def to_dict(self) -> dict:
        return {"kind": "combination", "atoms": [a.to_dict() for a in self.atoms],
                "coefficients": list(self.coefficients)}


def design_matrix(atoms: Sequence[CaloricAtom], points, alpha=None, j: int = 0) -> np.ndarray:
    """Matrix of shape ``(len(points), len(atoms))`` of one derivative of every atom."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    out = np.empty((pts.shape[0], len(atoms)))
    for col, atom in enumerate(atoms):
        out[:, col] = atom.derivative(pts, alpha, j)
    return out


def eval_atom(atom: CaloricAtom, d: MultiIndex, points) -> np.ndarray | float:
    """``d^j/dt^j d^alpha/dx^alpha`` of ``atom`` at one point or an array of points."""
    if d.order > MAX_ORDER:
        raise DomainError(f"derivative order {d.order} exceeds the supported maximum {MAX_ORDER}")
    pts = np.asarray(points, dtype=float)
    val = atom.derivative(pts, d.alpha, d.j)
    return float(val[0]) if pts.ndim == 1 else val


def heat_residual(atom: CaloricAtom, points) -> np.ndarray | float:
    """``u_t - Laplacian(u)`` at the given point(s)."""
    n = atom.n
    pts = np.asarray(points, dtype=float)
    res = atom.derivative(pts, None, 1)
    for i in range(n):
        alpha = [0] * n
        alpha[i] = 2
        res = res - atom.derivative(pts, alpha, 0)
    return float(res[0]) if pts.ndim == 1 else res


def atom_from_dict(d: dict) -> CaloricAtom:
    kind = d.get("kind")
    try:
        if kind == "heat_polynomial":
            return HeatPolynomial(tuple(d["degrees"]))
        if kind == "fundamental_translate":
            return FundamentalTranslate(tuple(d["source"]))
        if kind == "separable_ball":
            return SeparableBall(int(d["n"]), d["problem"], int(d["k"]), int(d["j"]),
                                 int(d["m"]), float(d.get("R2", 1.0)))
        if kind == "static_harmonic":
            return StaticHarmonic(int(d["n"]), int(d["k"]), int(d["j"]))
        if kind == "biharmonic_caloric":
            return BiharmonicCaloric(Poly.from_list(int(d["n"]), d["G"]))
        if kind == "combination":
            return Combination(tuple(atom_from_dict(a) for a in d["atoms"]), tuple(d["coefficients"]))
    except KeyError as exc:
        raise DomainError(f"atom record {kind!r} is missing field {exc}") from None
    raise DomainError(f"unknown atom kind {kind!r}")


def dictionary_to_json(atoms: Sequence[CaloricAtom]) -> str:
    return json.dumps([a.to_dict() for a in atoms], sort_keys=True)


def dictionary_from_json(text: str) -> list:
    return [atom_from_dict(d) for d in json.loads(text)]
