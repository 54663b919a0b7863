"""Parabolic potentials of the heat equation on ball cylinders and a numerical
check of the Green representation formula.

For a caloric ``u`` on ``Omega x (T1, T2)`` and ``T1 < t <= T2``,

    I(u(., T1)) + V(d_nu u) + W(u)  =  u(x, t)   for x in Omega,
                                       0         for x outside the closure,

with kernels ``Phi(x - y, t - T1)`` (initial), ``Phi(x - y, t - tau)``
(single layer) and ``-d_nu_y Phi(x - y, t - tau)`` (double layer).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .caloric import CaloricAtom
from .domain import Ball, Cylinder, gauss_legendre, spatial_quadrature, sphere_rule
from .exceptions import DomainError, UnsupportedPointError

__all__ = [
    "SurfaceQuadrature",
    "PotentialResolution",
    "surface_quadrature",
    "graded_time_rule",
    "parabolic_potential",
    "green_identity",
    "POTENTIAL_KINDS",
]

POTENTIAL_KINDS = ("initial", "volume", "single_layer", "double_layer")


@dataclass(frozen=True, eq=False)
class SurfaceQuadrature:
    """Nodes on a sphere with outward unit normals and surface weights."""

    nodes: np.ndarray
    normals: np.ndarray
    weights: np.ndarray


@dataclass(frozen=True)
class PotentialResolution:
    """Quadrature sizes: boundary nodes, Gauss points per graded time
    interval, radial and angular counts of the volume rule."""

    surface: int = 64
    time: int = 8
    radial: int = 24
    angular: int = 48
    levels: int = 12
    ratio: float = 0.5

    def refined(self) -> PotentialResolution:
        return PotentialResolution(2 * self.surface, 2 * self.time, 2 * self.radial,
                                   2 * self.angular, self.levels, self.ratio)


def surface_quadrature(base: Ball, count: int) -> SurfaceQuadrature:
    if not isinstance(base, Ball):
        raise DomainError("surface quadrature is only available for balls")
    n = base.dimension
    dirs, w = sphere_rule(n, count)
    nodes = np.asarray(base.center) + base.radius * dirs
    return SurfaceQuadrature(nodes, dirs, w * base.radius ** (n - 1))


def graded_time_rule(t0: float, t: float, q: int, levels: int = 12, ratio: float = 0.5):
    """Composite Gauss rule on ``[t0, t]`` with subintervals shrinking
    geometrically towards ``t``."""
    if not t > t0:
        return np.zeros(0), np.zeros(0)
    breaks = [t - (t - t0) * ratio**lev for lev in range(levels + 1)] + [t]
    nodes, weights = [], []
    for a, b in zip(breaks[:-1], breaks[1:]):
        x, w = gauss_legendre(a, b, q)
        nodes.append(x)
        weights.append(w)
    return np.concatenate(nodes), np.concatenate(weights)


def _kernel(z: np.ndarray, s: np.ndarray) -> np.ndarray:
    n = z.shape[1]
    out = np.zeros(len(s))
    pos = s > 0
    sp = s[pos]
    out[pos] = np.exp(-np.sum(z[pos] ** 2, axis=1) / (4 * sp)) / (2 * np.sqrt(np.pi * sp)) ** n
    return out


def _space_time(space: np.ndarray, times: np.ndarray) -> np.ndarray:
    return np.column_stack([np.repeat(space, len(times), axis=0), np.tile(times, len(space))])


def _eval(f: Callable, pts: np.ndarray) -> np.ndarray:
    return np.broadcast_to(np.asarray(f(pts), dtype=float), (len(pts),))


def parabolic_potential(kind: str, density: Callable, cyl: Cylinder, x, t: float,
                        resolution: PotentialResolution = PotentialResolution()) -> float:
    """Value at ``(x, t)`` of one of the four potentials over ``cyl``.

    ``density`` maps space-time points ``(m, n+1)`` to values; for the
    initial potential it is sampled at ``t = T1``. Layer potentials refuse
    points on the lateral boundary.
    """
    if kind not in POTENTIAL_KINDS:
        raise DomainError(f"unknown potential kind {kind!r}")
    base = cyl.base
    if not isinstance(base, Ball):
        raise DomainError("potentials are implemented for ball cylinders")
    x = np.asarray(x, dtype=float).reshape(-1)
    T1 = cyl.t_start
    if t <= T1:
        return 0.0
    if kind in ("single_layer", "double_layer"):
        r = np.linalg.norm(x - np.asarray(base.center))
        if np.isclose(r, base.radius, rtol=0, atol=1e-12):
            raise UnsupportedPointError("layer potentials are not evaluated on the boundary")

    res = resolution
    if kind == "initial":
        space, w, _ = spatial_quadrature(base, res.radial, res.angular)
        pts = np.column_stack([space, np.full(len(space), T1)])
        k = _kernel(x - space, np.full(len(space), t - T1))
        return float(np.sum(w * k * _eval(density, pts)))

    tn, tw = graded_time_rule(T1, t, res.time, res.levels, res.ratio)
    if kind == "volume":
        space, sw, _ = spatial_quadrature(base, res.radial, res.angular)
    else:
        sq = surface_quadrature(base, res.surface)
        space, sw = sq.nodes, sq.weights
    pts = _space_time(space, tn)
    w = np.outer(sw, tw).ravel()
    z = x - pts[:, :-1]
    s = t - pts[:, -1]
    phi = _kernel(z, s)
    if kind == "double_layer":
        nu = np.repeat(sq.normals, len(tn), axis=0)
        # -d/dnu_y Phi(x - y) = sum_i nu_i (d_i Phi)(x - y) = -(z . nu) / (2 s) Phi
        phi = -np.sum(z * nu, axis=1) / (2 * s) * phi
    return float(np.sum(w * phi * _eval(density, pts)))


def _normal_derivative(u: CaloricAtom, center: np.ndarray) -> Callable:
    n = u.n

    def dnu(pts):
        nu = pts[:, :-1] - center
        nu = nu / np.linalg.norm(nu, axis=1, keepdims=True)
        out = np.zeros(len(pts))
        for i in range(n):
            alpha = [0] * n
            alpha[i] = 1
            out += nu[:, i] * u.derivative(pts, alpha, 0)
        return out

    return dnu


def green_identity(u: CaloricAtom, cyl: Cylinder, point,
                   resolution: PotentialResolution = PotentialResolution()) -> tuple[float, float]:
    """Reproduce a caloric ``u`` at ``point`` from its initial slice and
    lateral Cauchy data.

    Returns ``(reproduced, residual)``: the residual is ``|reproduced - u|``
    inside the cylinder and ``|reproduced|`` outside its closure. Points on
    the boundary, and points later than ``T2``, are rejected.
    """
    point = np.asarray(point, dtype=float).reshape(-1)
    if len(point) != cyl.dimension + 1:
        raise DomainError("point must be (x_1, ..., x_n, t)")
    x, t = point[:-1], point[-1]
    if t > cyl.t_end:
        raise UnsupportedPointError("points later than T2 are outside the formula's range")
    inside = bool(cyl.contains(point)[0])
    if not inside and bool(cyl.closure_contains(point)[0]):
        raise UnsupportedPointError("point lies on the boundary of the cylinder")
    if not inside and t > cyl.t_start:
        r = np.linalg.norm(x - np.asarray(cyl.base.center))
        if np.isclose(r, cyl.base.radius, rtol=0, atol=1e-12):
            raise UnsupportedPointError("point lies on the lateral boundary")
    center = np.asarray(cyl.base.center)
    rep = (parabolic_potential("initial", u, cyl, x, t, resolution)
           + parabolic_potential("single_layer", _normal_derivative(u, center), cyl, x, t, resolution)
           + parabolic_potential("double_layer", u, cyl, x, t, resolution))
    if inside:
        return rep, abs(rep - float(u(point[None, :])[0]))
    return rep, abs(rep)
