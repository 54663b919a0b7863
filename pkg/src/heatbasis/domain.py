"""Space-time cylinders over balls, annuli and boxes, and tensor quadrature
rules on them.

Points are stored row-wise as ``(x_1, ..., x_n, t)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .exceptions import DomainError

__all__ = [
    "Ball",
    "Annulus",
    "Box",
    "Cylinder",
    "QuadratureRule",
    "tensor_quadrature",
    "quad_integrate",
    "spatial_quadrature",
    "sphere_rule",
    "gauss_legendre",
    "base_from_dict",
]


def _vec(v) -> tuple:
    return tuple(float(c) for c in np.atleast_1d(np.asarray(v, dtype=float)))


def _check_dim(n: int):
    if n not in (1, 2, 3):
        raise DomainError(f"dimension must be 1, 2 or 3, got {n}")


def _unit_sphere_area(n: int) -> float:
    return 2 * math.pi ** (n / 2) / math.gamma(n / 2)


@dataclass(frozen=True)
class Ball:
    center: tuple
    radius: float
    kind = "ball"

    def __post_init__(self):
        object.__setattr__(self, "center", _vec(self.center))
        _check_dim(len(self.center))
        if not self.radius > 0:
            raise DomainError(f"ball radius must be positive, got {self.radius}")

    @property
    def dimension(self) -> int:
        return len(self.center)

    @property
    def volume(self) -> float:
        n = self.dimension
        return _unit_sphere_area(n) * self.radius**n / n

    def _r(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return np.linalg.norm(x - np.asarray(self.center), axis=1)

    def contains(self, x) -> np.ndarray:
        """Strict interior membership for points of shape ``(m, n)``."""
        return self._r(x) < self.radius

    def closure_contains(self, x) -> np.ndarray:
        return self._r(x) <= self.radius

    def to_dict(self) -> dict:
        return {"kind": "ball", "center": list(self.center), "radius": self.radius}


@dataclass(frozen=True)
class Annulus:
    center: tuple
    r_inner: float
    r_outer: float
    kind = "annulus"

    def __post_init__(self):
        object.__setattr__(self, "center", _vec(self.center))
        _check_dim(len(self.center))
        if not 0 < self.r_inner < self.r_outer:
            raise DomainError(f"annulus needs 0 < r_inner < r_outer, got {self.r_inner}, {self.r_outer}")

    @property
    def dimension(self) -> int:
        return len(self.center)

    @property
    def volume(self) -> float:
        n = self.dimension
        return _unit_sphere_area(n) * (self.r_outer**n - self.r_inner**n) / n

    def _r(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return np.linalg.norm(x - np.asarray(self.center), axis=1)

    def contains(self, x) -> np.ndarray:
        r = self._r(x)
        return (r > self.r_inner) & (r < self.r_outer)

    def closure_contains(self, x) -> np.ndarray:
        r = self._r(x)
        return (r >= self.r_inner) & (r <= self.r_outer)

    def to_dict(self) -> dict:
        return {"kind": "annulus", "center": list(self.center),
                "r_inner": self.r_inner, "r_outer": self.r_outer}


@dataclass(frozen=True)
class Box:
    low: tuple
    high: tuple
    kind = "box"

    def __post_init__(self):
        object.__setattr__(self, "low", _vec(self.low))
        object.__setattr__(self, "high", _vec(self.high))
        if len(self.low) != len(self.high):
            raise DomainError("box corners differ in dimension")
        _check_dim(len(self.low))
        if not all(a < b for a, b in zip(self.low, self.high)):
            raise DomainError("box needs low < high componentwise")

    @property
    def dimension(self) -> int:
        return len(self.low)

    @property
    def volume(self) -> float:
        return float(np.prod(np.subtract(self.high, self.low)))

    def contains(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return np.all((x > self.low) & (x < self.high), axis=1)

    def closure_contains(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return np.all((x >= self.low) & (x <= self.high), axis=1)

    def to_dict(self) -> dict:
        return {"kind": "box", "low": list(self.low), "high": list(self.high)}


BaseDomain = Union[Ball, Annulus, Box]


def base_from_dict(d: dict) -> BaseDomain:
    kind = d.get("kind")
    try:
        if kind == "ball":
            return Ball(d["center"], float(d["radius"]))
        if kind == "annulus":
            return Annulus(d["center"], float(d["r_inner"]), float(d["r_outer"]))
        if kind == "box":
            return Box(d["low"], d["high"])
    except KeyError as exc:
        raise DomainError(f"base domain {kind!r} is missing field {exc}") from None
    raise DomainError(f"unknown base domain kind {kind!r}")


@dataclass(frozen=True)
class Cylinder:
    """The open space-time cylinder ``base x (t_start, t_end)``."""

    base: BaseDomain
    t_start: float
    t_end: float

    def __post_init__(self):
        if not self.t_start < self.t_end:
            raise DomainError(f"cylinder needs t_start < t_end, got ({self.t_start}, {self.t_end})")

    @property
    def dimension(self) -> int:
        return self.base.dimension

    @property
    def volume(self) -> float:
        return self.base.volume * (self.t_end - self.t_start)

    def contains(self, points) -> np.ndarray:
        p = np.atleast_2d(np.asarray(points, dtype=float))
        t = p[:, -1]
        return self.base.contains(p[:, :-1]) & (t > self.t_start) & (t < self.t_end)

    def closure_contains(self, points) -> np.ndarray:
        p = np.atleast_2d(np.asarray(points, dtype=float))
        t = p[:, -1]
        return self.base.closure_contains(p[:, :-1]) & (t >= self.t_start) & (t <= self.t_end)

    def to_dict(self) -> dict:
        return {"base": self.base.to_dict(), "t": [self.t_start, self.t_end]}

    @classmethod
    def from_dict(cls, d: dict) -> Cylinder:
        try:
            t1, t2 = d["t"]
            return cls(base_from_dict(d["base"]), float(t1), float(t2))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, DomainError):
                raise
            raise DomainError(f"malformed cylinder description: {exc}") from None


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Tensor quadrature over a cylinder. ``nodes`` has shape ``(m, n + 1)``."""

    nodes: np.ndarray
    weights: np.ndarray
    resolution: tuple
    axis_counts: tuple = field(default=())

    def __post_init__(self):
        for a in (self.nodes, self.weights):
            a.setflags(write=False)

    def __len__(self) -> int:
        return len(self.weights)

    @property
    def dimension(self) -> int:
        return self.nodes.shape[1] - 1


def gauss_legendre(a: float, b: float, q: int):
    """``q``-point Gauss-Legendre nodes and weights on ``[a, b]``."""
    x, w = np.polynomial.legendre.leggauss(q)
    return 0.5 * (b - a) * x + 0.5 * (a + b), 0.5 * (b - a) * w


def sphere_rule(n: int, count: int):
    """Directions and weights on the unit sphere ``S^{n-1}``.

    n=1: the two points ``{-1, +1}``; n=2: ``count`` uniform angles (exact for
    trigonometric polynomials of degree < count); n=3: Gauss-Legendre in the
    cosine of the polar angle (``count`` nodes) times ``2*count`` uniform
    azimuths.
    """
    if n == 1:
        return np.array([[-1.0], [1.0]]), np.array([1.0, 1.0])
    if count < 1:
        raise DomainError("angular count must be >= 1")
    if n == 2:
        th = 2 * np.pi * np.arange(count) / count
        return np.column_stack([np.cos(th), np.sin(th)]), np.full(count, 2 * np.pi / count)
    if n == 3:
        z, wz = np.polynomial.legendre.leggauss(count)
        naz = 2 * count
        ph = 2 * np.pi * np.arange(naz) / naz
        s = np.sqrt(1 - z**2)
        dirs = np.column_stack([
            np.outer(s, np.cos(ph)).ravel(),
            np.outer(s, np.sin(ph)).ravel(),
            np.repeat(z, naz),
        ])
        return dirs, np.repeat(wz, naz) * (2 * np.pi / naz)
    raise DomainError(f"unsupported dimension {n}")


def spatial_quadrature(base: BaseDomain, nr: int, na: int):
    """Nodes ``(m, n)``, weights and per-axis counts of the spatial factor of
    the tensor rule."""
    n = base.dimension
    _check_dim(n)
    if nr < 1 or na < 1:
        raise DomainError("quadrature counts must be >= 1")
    if isinstance(base, Box):
        axes = [gauss_legendre(a, b, nr) for a, b in zip(base.low, base.high)]
        grids = np.meshgrid(*[ax[0] for ax in axes], indexing="ij")
        wgrids = np.meshgrid(*[ax[1] for ax in axes], indexing="ij")
        space = np.column_stack([g.ravel() for g in grids])
        sw = np.prod(np.column_stack([g.ravel() for g in wgrids]), axis=1)
        return space, sw, (nr,) * n
    if isinstance(base, Annulus):
        if nr < 2:
            raise DomainError("annulus quadrature needs radial count >= 2")
        r0, r1 = base.r_inner, base.r_outer
    else:
        r0, r1 = 0.0, base.radius
    rn, rw = gauss_legendre(r0, r1, nr)
    rw = rw * rn ** (n - 1)
    dirs, dw = sphere_rule(n, na)
    space = (rn[:, None, None] * dirs[None, :, :]).reshape(-1, n) + np.asarray(base.center)
    return space, np.outer(rw, dw).ravel(), (nr, len(dw))


def tensor_quadrature(cyl: Cylinder, resolution) -> QuadratureRule:
    """Gauss-Legendre in radius and time, uniform/Gauss angular rule, with
    the ``r**(n-1)`` Jacobian folded into the weights.

    For boxes the radial count is used along every coordinate axis.
    """
    nr, na, nt = (int(v) for v in resolution)
    if min(nr, na, nt) < 1:
        raise DomainError(f"resolution components must be >= 1, got {resolution}")
    space, sw, counts = spatial_quadrature(cyl.base, nr, na)
    tn, tw = gauss_legendre(cyl.t_start, cyl.t_end, nt)
    nodes = np.column_stack([np.repeat(space, nt, axis=0), np.tile(tn, len(sw))])
    weights = np.outer(sw, tw).ravel()
    return QuadratureRule(nodes, weights, (nr, na, nt), counts + (nt,))


def quad_integrate(f: Callable, rule: QuadratureRule) -> float:
    """``sum_i w_i f(node_i)``; ``f`` maps an ``(m, n+1)`` array to ``m`` values."""
    vals = np.broadcast_to(np.asarray(f(rule.nodes), dtype=float), rule.weights.shape)
    return float(np.sum(rule.weights * vals))
