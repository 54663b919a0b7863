"""Real-order Bessel functions of the first kind, their zeros, and real
spherical harmonics in two and three dimensions.

Bessel values use the ascending power series (summed in extended precision)
for ``x <= max(15, nu + 5)`` and the Hankel large-argument expansion beyond;
both branches hold ~1e-14 absolute accuracy on either side of that point.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import legendre as _leg

from ._poly import Poly
from .exceptions import ConvergenceError, DomainError, OutOfRangeError

__all__ = [
    "HarmonicIndex",
    "bessel_j",
    "bessel_j_prime",
    "bessel_j_scaled",
    "bessel_zero",
    "harmonic_dimension",
    "harmonic_polynomial",
    "radial_ode_residual",
    "spherical_harmonic",
    "standard_order",
    "printed_order",
]

_LD = np.longdouble
_MAX_ORDER = 150.0
_MAX_ARG = 1.0e8


def _switch_point(nu: float) -> float:
    return max(15.0, nu + 5.0)


def _check_args(nu: float, x) -> np.ndarray:
    if nu < 0 or not math.isfinite(nu):
        raise DomainError(f"Bessel order must be finite and >= 0, got {nu}")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or not np.all(np.isfinite(x)):
        raise DomainError("Bessel argument must be finite and >= 0")
    if nu > _MAX_ORDER or np.any(x > _MAX_ARG):
        raise OutOfRangeError(f"(nu={nu}, max x={x.max(initial=0.0)}) outside the supported range")
    return x


def _series_scaled(nu: float, x: np.ndarray) -> np.ndarray:
    """z**-nu * J_nu(z), summed in extended precision."""
    # tensor quadrature grids repeat each radius many times
    x, inverse = np.unique(x, return_inverse=True)
    q = (x.astype(_LD) / 2) ** 2
    term = np.full(x.shape, _LD(1) / (_LD(2) ** _LD(nu) * _LD(math.gamma(nu + 1.0))))
    total = term.copy()
    m = 0
    m_min = int(np.max(x, initial=0.0)) + 2
    while True:
        m += 1
        term = -term * q / (_LD(m) * (_LD(m) + _LD(nu)))
        total += term
        if m > m_min and np.all(np.abs(term) <= 1e-21 * np.abs(total)):
            break
        if m > 500:
            raise ConvergenceError("Bessel power series did not converge")
    return total.astype(float)[inverse]


def _hankel(nu: float, x: np.ndarray) -> np.ndarray:
    mu = 4.0 * nu * nu
    p = np.ones_like(x)
    qq = np.zeros_like(x)
    a = np.ones_like(x)
    last = np.full_like(x, np.inf)
    live = np.ones(x.shape, dtype=bool)
    for k in range(1, 120):
        a = a * (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        mag = np.abs(a)
        # terms may grow while (2k-1)**2 < 4 nu**2; past that, growth marks
        # the optimal truncation point of the asymptotic series
        if (2 * k - 1) ** 2 > mu:
            live &= mag < last
        if not live.any():
            break
        contrib = np.where(live, a, 0.0)
        if k % 2 == 1:
            qq += (-1) ** ((k - 1) // 2) * contrib
        else:
            p += (-1) ** (k // 2) * contrib
        last = np.where(live, mag, last)
        if np.all(~live | (mag < 1e-17)):
            break
    chi = x - (0.5 * nu + 0.25) * math.pi
    return np.sqrt(2.0 / (math.pi * x)) * (p * np.cos(chi) - qq * np.sin(chi))


def bessel_j(nu: float, x):
    """Bessel function of the first kind ``J_nu(x)`` for ``nu >= 0, x >= 0``.

    Accepts scalars or arrays for ``x``; returns the matching shape.
    """
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(_check_args(nu, x))
    out = np.empty_like(x)
    small = x <= _switch_point(nu)
    if small.any():
        xs = x[small]
        out[small] = _series_scaled(nu, xs) * xs**nu if nu > 0 else _series_scaled(nu, xs)
    if (~small).any():
        out[~small] = _hankel(nu, x[~small])
    return float(out[0]) if scalar else out


def bessel_j_scaled(nu: float, z):
    """``z**-nu * J_nu(z)``, finite and analytic at ``z = 0``.

    This is the radial factor of the ball eigenfunctions written against a
    solid harmonic polynomial.
    """
    scalar = np.ndim(z) == 0
    z = np.atleast_1d(_check_args(nu, z))
    out = np.empty_like(z)
    small = z <= _switch_point(nu)
    if small.any():
        out[small] = _series_scaled(nu, z[small])
    if (~small).any():
        zl = z[~small]
        out[~small] = _hankel(nu, zl) / zl**nu
    return float(out[0]) if scalar else out


def bessel_j_prime(nu: float, x):
    """Derivative ``J'_nu(x)`` from ``(J_{nu-1} - J_{nu+1}) / 2``.

    For ``0 < nu < 1`` the lower neighbour has negative order, so the
    equivalent form ``(nu/x) J_nu - J_{nu+1}`` is used there instead.
    """
    if nu == 0:
        return -bessel_j(1.0, x)
    if nu >= 1:
        return 0.5 * (bessel_j(nu - 1.0, x) - bessel_j(nu + 1.0, x))
    scalar = np.ndim(x) == 0
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    with np.errstate(divide="ignore", invalid="ignore"):
        val = (nu / xa) * bessel_j(nu, xa) - bessel_j(nu + 1.0, xa)
    val = np.where(xa == 0, np.inf, val)
    return float(val[0]) if scalar else val


def _mcmahon(nu: float, m: int, derivative: bool) -> float:
    mu = 4.0 * nu * nu
    if derivative:
        b = (m + 0.5 * nu - 0.75) * math.pi
        return b - (mu + 3) / (8 * b) - 4 * (7 * mu * mu + 82 * mu - 9) / (3 * (8 * b) ** 3)
    b = (m + 0.5 * nu - 0.25) * math.pi
    return b - (mu - 1) / (8 * b) - 4 * (mu - 1) * (7 * mu - 31) / (3 * (8 * b) ** 3)


@functools.lru_cache(maxsize=1024)
def bessel_zero(nu: float, m: int, kind: str = "function", *, tol: float = 1e-15,
                max_iter: int = 200) -> float:
    """The ``m``-th positive zero of ``J_nu`` (``kind="function"``) or of
    ``J'_nu`` (``kind="derivative"``).

    A sign-change scan from the origin pins down the bracket holding the
    ``m``-th zero, so the index is never skipped; inside the bracket a
    Newton iteration started from McMahon's expansion is safeguarded by
    bisection. The zero of ``J'_0`` at the origin is not counted.
    """
    if int(m) != m or m < 1:
        raise DomainError(f"zero index must be a positive integer, got {m}")
    m = int(m)
    kind = kind.lower()
    if kind not in ("function", "derivative"):
        raise DomainError(f"unknown zero kind {kind!r}")
    deriv = kind == "derivative"
    f = (lambda x: bessel_j_prime(nu, x)) if deriv else (lambda x: bessel_j(nu, x))

    def fprime(x):
        if not deriv:
            return bessel_j_prime(nu, x)
        # J'' from Bessel's equation
        return -bessel_j_prime(nu, x) / x - (1.0 - nu * nu / (x * x)) * bessel_j(nu, x)

    # zero spacing exceeds 2 for every order, so a 0.1 step cannot skip one
    step = 0.1
    guess = _mcmahon(nu, m, deriv)
    start = max(1e-3, nu - 1.0)
    count = 0
    lo = hi = None
    for chunk in range(2000):
        grid = start + step * np.arange(chunk * 256, (chunk + 1) * 256 + 1)
        vals = f(grid)
        s_ = np.sign(vals)
        # exact zeros on the grid count once, at their own node
        hits = np.flatnonzero((s_[:-1] * s_[1:] < 0) | (s_[:-1] == 0))
        if count + len(hits) >= m:
            i = hits[m - count - 1]
            if s_[i] == 0:
                return float(grid[i])
            lo, hi = float(grid[i]), float(grid[i + 1])
            break
        count += len(hits)
    if lo is None:
        raise ConvergenceError(f"could not bracket zero {m} of order {nu}")
    flo = f(lo)
    x = guess if lo < guess < hi else 0.5 * (lo + hi)
    for _ in range(max_iter):
        fx = f(x)
        if fx == 0.0:
            return x
        if flo * fx < 0:
            hi = x
        else:
            lo, flo = x, fx
        d = fprime(x)
        xn = x - fx / d if d != 0 else None
        if xn is None or not (lo < xn < hi):
            xn = 0.5 * (lo + hi)
        if abs(xn - x) <= tol * max(1.0, abs(x)) or hi - lo <= 4 * tol * hi:
            return xn
        x = xn
    raise ConvergenceError(f"Newton/bisection budget exhausted for zero {m} of order {nu}")


def harmonic_dimension(n: int, k: int) -> int:
    """Dimension of the space of degree-``k`` spherical harmonics in R^n."""
    if n not in (2, 3):
        raise DomainError(f"spherical harmonics are implemented for n in {{2, 3}}, got {n}")
    if k < 0:
        raise DomainError(f"degree must be >= 0, got {k}")
    if k == 0:
        return 1
    if n == 2:
        return 2
    return (n + 2 * k - 2) * math.factorial(n + k - 3) // (math.factorial(k) * math.factorial(n - 2))


@dataclass(frozen=True)
class HarmonicIndex:
    """Degree ``k`` and in-degree index ``j`` (1-based) of a spherical harmonic."""

    n: int
    k: int
    j: int

    def __post_init__(self):
        dim = harmonic_dimension(self.n, self.k)
        if not 1 <= self.j <= dim:
            raise DomainError(f"harmonic index j={self.j} outside 1..{dim} for (n={self.n}, k={self.k})")


def _order_of(n: int, k: int, j: int) -> tuple[int, str]:
    # j=1 -> m=0; j=2m -> cos(m phi); j=2m+1 -> sin(m phi)
    if j == 1:
        return 0, "cos"
    return j // 2, "cos" if j % 2 == 0 else "sin"


def harmonic_polynomial(idx: HarmonicIndex) -> Poly:
    """Solid harmonic ``|x|**k h_k^(j)(x/|x|)`` as a homogeneous polynomial in x.

    The restriction to the unit sphere is L2-orthonormal over (k, j).
    """
    n, k, j = idx.n, idx.k, idx.j
    if n == 2:
        if k == 0:
            return Poly.constant(2, 1.0 / math.sqrt(2 * math.pi))
        # Re/Im (x1 + i x2)**k
        coeffs = {}
        for q in range(k + 1):
            c = math.comb(k, q)
            # i**q
            phase = q % 4
            re = {0: 1, 1: 0, 2: -1, 3: 0}[phase]
            im = {0: 0, 1: 1, 2: 0, 3: -1}[phase]
            val = re if j == 1 else im
            if val:
                coeffs[(k - q, q)] = c * val / math.sqrt(math.pi)
        return Poly(2, coeffs)

    m, trig = _order_of(n, k, j)
    # (x + i y)**m, real or imaginary part
    xy = {}
    for q in range(m + 1):
        phase = q % 4
        re = {0: 1, 1: 0, 2: -1, 3: 0}[phase]
        im = {0: 0, 1: 1, 2: 0, 3: -1}[phase]
        val = re if trig == "cos" else im
        if val:
            xy[(m - q, q, 0)] = math.comb(m, q) * val
    angular = Poly(3, xy)
    # r**(k-m) * P_k^(m)(z/r), a polynomial since the parity of P_k^(m) is k-m
    legendre_coeffs = _leg.leg2poly(np.eye(k + 1)[k])
    dm = np.polynomial.polynomial.polyder(legendre_coeffs, m) if m else legendre_coeffs
    r2 = Poly(3, {(2, 0, 0): 1.0, (0, 2, 0): 1.0, (0, 0, 2): 1.0})
    polar = Poly.zero(3)
    for power, c in enumerate(dm):
        if c == 0:
            continue
        q2 = (k - m - power)
        if q2 % 2:
            continue
        polar = polar + Poly(3, {(0, 0, power): float(c)}) * r2 ** (q2 // 2)
    norm = math.sqrt((2 * k + 1) / (4 * math.pi) * math.factorial(k - m) / math.factorial(k + m))
    if m:
        norm *= math.sqrt(2.0)
    return (angular * polar).scaled(norm)


def spherical_harmonic(idx: HarmonicIndex, direction) -> np.ndarray | float:
    """Real orthonormal spherical harmonic ``h_k^(j)`` at unit direction(s).

    ``direction`` has shape ``(n,)`` or ``(m, n)``. For n=2 the family is
    ``1/sqrt(2 pi)``, ``cos(k theta)/sqrt(pi)``, ``sin(k theta)/sqrt(pi)``;
    for n=3 it is the real-form family built from associated Legendre
    functions without the Condon-Shortley phase.
    """
    d = np.asarray(direction, dtype=float)
    scalar = d.ndim == 1
    d = np.atleast_2d(d)
    if d.shape[1] != idx.n:
        raise DomainError(f"direction must have {idx.n} components")
    if np.any(np.abs(np.linalg.norm(d, axis=1) - 1.0) > 1e-12):
        raise DomainError("direction must be a unit vector")
    val = harmonic_polynomial(idx)(d)
    return float(val[0]) if scalar else val


def standard_order(n: int, k: int) -> float:
    """Bessel order ``k + (n-2)/2`` that separates the radial equation."""
    return k + 0.5 * (n - 2)


def printed_order(n: int, k: int) -> float:
    """The alternative order ``sqrt((n-2)**2/4 + k**2 (n+k-2)**2)``; kept so the
    radial-equation check can show that it does not solve the ODE."""
    return math.sqrt((n - 2) ** 2 / 4 + k**2 * (n + k - 2) ** 2)


def radial_ode_residual(n: int, k: int, p: float, lam: float, r) -> np.ndarray | float:
    """Residual of ``((r d/dr)**2 + (n-2) r d/dr - (k(n+k-2) - |lam| r**2)) g``
    at ``g(r) = r**((2-n)/2) J_p(sqrt|lam| r)``.

    The sign in front of ``lam r**2`` is the one that makes ``g(r) h(phi)`` an
    eigenfunction of the Laplacian with eigenvalue ``-|lam|`` (the decaying
    caloric atoms). With ``a = (2-n)/2`` and ``z = sqrt|lam| r``:

        r g'     = r**a (a J + z J')
        (r d/dr)**2 g = r**a (a**2 J + (2a+1) z J' + z**2 J'')
    """
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise DomainError("radius must be positive")
    kappa = math.sqrt(abs(lam))
    a = 0.5 * (2 - n)
    z = kappa * r
    J = bessel_j(p, z)
    Jp = bessel_j_prime(p, z)
    # Bessel's equation supplies J''
    Jpp = -Jp / z - (1.0 - p * p / (z * z)) * J
    ra = r**a
    rdr = ra * (a * J + z * Jp)
    rdr2 = ra * (a * a * J + (2 * a + 1) * z * Jp + z * z * Jpp)
    g = ra * J
    res = rdr2 + (n - 2) * rdr - (k * (n + k - 2) - abs(lam) * r**2) * g
    return float(res) if np.ndim(res) == 0 else res
