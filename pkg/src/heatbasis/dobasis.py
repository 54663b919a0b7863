"""Bases with the double orthogonality property, L2 projection and density
experiments, continuation from a small cylinder to a big one, and
reproducing-kernel partial sums.

Given a dictionary of caloric atoms, a "big" inner product on
``Omega x (T1, T2)`` and the L2 product on ``omega x (T1, T2)`` (omega inside
Omega), ``double_orthogonal_basis`` returns coefficient vectors ``c_nu`` such
that the functions ``b_nu = sum_i c_nu[i] atom_i`` are orthonormal in the big
product and orthogonal in the small one, ``(b_nu, b_nu)_small = mu_nu``.
This is the generalized symmetric eigenproblem ``small c = mu big c`` solved
by whitening ``big`` with a truncated pivoted Cholesky factor.

Gram matrices of caloric dictionaries are severely ill-conditioned, so the
whitening, the eigensolve and the diagnostics run in ``numpy.longdouble``.
"""

from __future__ import annotations

import functools
import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .caloric import (
    CaloricAtom,
    Combination,
    FundamentalTranslate,
    HeatPolynomial,
    design_matrix,
)
from .domain import Annulus, Ball, Box, Cylinder
from .exceptions import DomainError, TruncationRequiredError
from .numerics import cholesky_trunc, solve_lower, solve_upper, symmetric_eig
from .sobolev import InnerProductSpec, gram

__all__ = [
    "GramPair",
    "DoBasis",
    "DensityConfig",
    "build_gram_pair",
    "double_orthogonal_basis",
    "project_l2",
    "density_experiment",
    "density_dictionary",
    "density_target",
    "continue_solution",
    "kernel_partial_sum",
    "check_nested",
    "heat_polynomial_family",
    "separable_family",
]

logger = logging.getLogger(__name__)

_LD = np.longdouble


def _ld(a) -> np.ndarray:
    return np.asarray(a, dtype=_LD)


def check_nested(inner: Cylinder, outer: Cylinder) -> None:
    """Raise ``DomainError`` unless ``inner`` lies inside ``outer`` with the
    same time interval."""
    if (inner.t_start, inner.t_end) != (outer.t_start, outer.t_end):
        raise DomainError("the two cylinders must share their time interval")
    if inner.dimension != outer.dimension:
        raise DomainError("the two cylinders differ in dimension")
    a, b = inner.base, outer.base
    if isinstance(b, Ball):
        if isinstance(a, (Ball, Annulus)):
            r = a.radius if isinstance(a, Ball) else a.r_outer
            gap = np.linalg.norm(np.subtract(a.center, b.center))
            if gap + r <= b.radius:
                return
        elif isinstance(a, Box):
            corners = np.array(np.meshgrid(*zip(a.low, a.high))).reshape(a.dimension, -1).T
            if np.all(np.linalg.norm(corners - np.asarray(b.center), axis=1) <= b.radius):
                return
    elif isinstance(b, Box) and isinstance(a, Box):
        if all(lo >= blo for lo, blo in zip(a.low, b.low)) and all(
                hi <= bhi for hi, bhi in zip(a.high, b.high)):
            return
    elif isinstance(b, Annulus) and isinstance(a, Annulus):
        if np.allclose(a.center, b.center) and b.r_inner <= a.r_inner and a.r_outer <= b.r_outer:
            return
    raise DomainError(f"{a} is not contained in {b}")


@dataclass(frozen=True, eq=False)
class GramPair:
    """Gram matrices of one dictionary in the big and the small inner product."""

    dictionary: tuple
    big: np.ndarray
    small: np.ndarray
    spec_big: InnerProductSpec
    spec_small: InnerProductSpec

    def __post_init__(self):
        N = len(self.dictionary)
        if self.big.shape != (N, N) or self.small.shape != (N, N):
            raise DomainError("Gram matrices do not match the dictionary size")
        for a in (self.big, self.small):
            a.setflags(write=False)

    def __len__(self) -> int:
        return len(self.dictionary)

    @functools.cached_property
    def small_design(self) -> np.ndarray:
        """Atom values at the small-cylinder quadrature nodes."""
        return design_matrix(self.dictionary, self.spec_small.rule.nodes)


def build_gram_pair(dictionary: Sequence[CaloricAtom], omega_cyl: Cylinder, Omega_cyl: Cylinder,
                    spec_big_kind=("aniso", 1, 0), resolutions=((16, 32, 32), (16, 32, 32)),
                    small_rule=None) -> GramPair:
    """Assemble the big Gram (``spec_big_kind = (kind, s, k)`` on ``Omega_cyl``)
    and the small L2 Gram on ``omega_cyl``, each on its own tensor rule.

    ``small_rule`` replaces the small tensor rule, e.g. by sample points
    with weights.
    """
    dictionary = tuple(dictionary)
    check_nested(omega_cyl, Omega_cyl)
    for atom in dictionary:
        if atom.n != Omega_cyl.dimension:
            raise DomainError(f"atom {atom} has the wrong dimension")
        if atom.singular_in(Omega_cyl):
            raise DomainError(f"atom {atom} is singular on the closed big cylinder")
    if isinstance(spec_big_kind, str):
        spec_big_kind = (spec_big_kind, 0, 0)
    kind, s, k = (tuple(spec_big_kind) + (0, 0))[:3]
    big_res, small_res = resolutions
    spec_big = InnerProductSpec(kind, Omega_cyl, s=s, k=k, resolution=tuple(big_res))
    spec_small = InnerProductSpec("l2", omega_cyl, resolution=tuple(small_res), rule=small_rule)
    return GramPair(dictionary, gram(dictionary, spec_big), gram(dictionary, spec_small),
                    spec_big, spec_small)


@dataclass(frozen=True, eq=False)
class DoBasis:
    """Doubly orthogonal system in dictionary coordinates.

    ``coefficients[:, nu]`` holds ``b_nu``; ``mu`` is non-increasing.
    ``diagnostics`` has the maximal deviations, recomputed from the source
    Gram matrices: ``big_residual = max|C^T big C - I|`` and
    ``small_residual = max offdiag |C^T small C| / mu_1`` (plus
    ``mu_residual``, the diagonal mismatch relative to ``mu_1``).
    """

    coefficients: np.ndarray
    mu: np.ndarray
    diagnostics: dict
    dictionary: tuple = field(default=())
    pivots: np.ndarray = field(default=None)

    @property
    def rank(self) -> int:
        return self.coefficients.shape[1]

    def functions(self, points, alpha=None, j: int = 0) -> np.ndarray:
        """Values ``(m, rank)`` of a derivative of every ``b_nu`` at ``points``."""
        if not self.dictionary:
            raise DomainError("basis carries no dictionary")
        return design_matrix(self.dictionary, points, alpha, j) @ self.coefficients

    def element(self, nu: int) -> Combination:
        return Combination(self.dictionary, tuple(self.coefficients[:, nu]))


def _diag_scaling(G: np.ndarray) -> np.ndarray:
    d = np.diag(G).astype(float)
    with np.errstate(divide="ignore"):
        return np.where(d > 0, 1.0 / np.sqrt(np.where(d > 0, d, 1.0)), 0.0)


def _whiten(G: np.ndarray, rel_tol: float):
    """Scaled truncated Cholesky of ``G``: returns (scale, L1, selected indices)."""
    D = _ld(_diag_scaling(G))
    Gs = _ld(G) * (D[:, None] * D[None, :])
    Gs = 0.5 * (Gs + Gs.T)
    L, r, perm = cholesky_trunc(Gs, rel_tol)
    return D, L[:r, :r], perm[:r]


def _diagnostics(C: np.ndarray, mu: np.ndarray, A: np.ndarray, B: np.ndarray) -> dict:
    if C.shape[1] == 0:
        return {"big_residual": 0.0, "small_residual": 0.0, "mu_residual": 0.0}
    Cl = _ld(C)
    GA = Cl.T @ _ld(A) @ Cl
    GB = Cl.T @ _ld(B) @ Cl
    r = C.shape[1]
    scale = max(float(mu[0]), np.finfo(float).tiny)
    off = GB - np.diag(np.diag(GB))
    return {
        "big_residual": float(np.max(np.abs(GA - np.eye(r, dtype=_LD)))),
        "small_residual": float(np.max(np.abs(off)) / scale),
        "mu_residual": float(np.max(np.abs(np.diag(GB) - _ld(mu))) / scale),
    }


def double_orthogonal_basis(pair: GramPair, rel_tol: float = 1e-10) -> DoBasis:
    """Solve ``small c = mu big c`` on the numerically independent part of the
    dictionary.

    Steps: scale both Grams by ``diag(big)**-1/2``; truncated pivoted
    Cholesky of the scaled big Gram (rank ``r``); symmetric Jacobi
    eigensolve of ``L^-1 small L^-T``; one refinement pass that
    re-orthonormalises in the big product and re-diagonalises the small one.
    """
    A, B = pair.big, pair.small
    N = len(pair)
    if N == 0:
        raise DomainError("empty dictionary has rank 0")
    D, L1, sel = _whiten(A, rel_tol)
    r = len(sel)
    if r == 0:
        raise DomainError("big Gram matrix has rank 0")
    Bs = _ld(B)[np.ix_(sel, sel)] * (D[sel][:, None] * D[sel][None, :])
    M = solve_lower(L1, solve_lower(L1, Bs).T)
    M = 0.5 * (M + M.T)
    _, V = symmetric_eig(M, tol=1e-18)
    C = np.zeros((N, r), dtype=_LD)
    C[sel] = solve_upper(L1.T, V) * D[sel][:, None]

    # refinement: Cholesky of C^T A C restores big-orthonormality, then the
    # small Gram is re-diagonalised within that orthonormal system
    Al, Bl = _ld(A), _ld(B)
    G = C.T @ Al @ C
    Lg, rg, pg = cholesky_trunc(0.5 * (G + G.T), rel_tol=0.0)
    if rg == r:
        C = C @ _inv_t(Lg, pg)
    Mb = C.T @ Bl @ C
    mu, V2 = symmetric_eig(0.5 * (Mb + Mb.T), tol=1e-18)
    C = C @ V2
    C64 = C.astype(float)
    mu64 = mu.astype(float)
    diag = _diagnostics(C64, mu64, A, B)
    logger.debug("double orthogonal basis: rank %d of %d, diagnostics %s", r, N, diag)
    return DoBasis(C64, mu64, diag, pair.dictionary, np.asarray(sel))


def _inv_t(L: np.ndarray, perm: np.ndarray) -> np.ndarray:
    """``X`` with ``X^T G X = I`` for ``G[perm][:, perm] = L L^T``."""
    r = L.shape[0]
    X = np.zeros((r, r), dtype=L.dtype)
    # with P the permutation, G = P L L^T P^T, so X = P L^-T
    X[perm] = solve_upper(L.T, np.eye(r, dtype=L.dtype))
    return X


def _target_values(target, points: np.ndarray) -> np.ndarray:
    if hasattr(target, "derivative"):
        return np.asarray(target.derivative(points), dtype=float)
    vals = np.asarray(target(points), dtype=float)
    return np.broadcast_to(vals, (len(points),)).copy()


def _weighted_lstsq(Dm: np.ndarray, w: np.ndarray, y: np.ndarray, rcond: float):
    """Weighted least squares ``min sum w (y - Dm c)**2``.

    Columns are scaled to unit weighted norm and the system is solved by SVD
    with singular values below ``rcond * s_max`` discarded; forming the
    normal equations would square the (already huge) condition number.
    Returns (coefficients, residual norm).
    """
    N = Dm.shape[1]
    sw = np.sqrt(w)
    if N == 0:
        return np.zeros(0), float(np.sqrt(np.sum(w * y * y)))
    A = Dm * sw[:, None]
    cn = np.linalg.norm(A, axis=0)
    scale = np.where(cn > 0, 1.0 / np.where(cn > 0, cn, 1.0), 0.0)
    z, *_ = np.linalg.lstsq(A * scale, sw * y, rcond=rcond)
    coeffs = z * scale
    r = y - Dm @ coeffs
    return coeffs, float(np.sqrt(np.sum(w * r * r)))


def project_l2(target, pair: GramPair, rcond: float = 1e-13):
    """Best L2(omega cylinder) approximation of ``target`` by the dictionary span.

    ``target`` is an atom or a callable on ``(m, n+1)`` points. Returns
    ``(coefficients, residual)`` with the residual norm evaluated directly on
    the small quadrature rule.
    """
    rule = pair.spec_small.rule
    y = _target_values(target, rule.nodes)
    return _weighted_lstsq(pair.small_design, rule.weights, y, rcond)


@dataclass(frozen=True)
class DensityConfig:
    """Geometry and dictionary recipe of a density experiment.

    At level ``s`` (one entry of ``sizes``) fundamental translates sit on the
    sphere of radius ``shell_factor * R_Omega``, ``s`` directions per time
    ring, with rings at ``T1 - j L depth / s`` (j = 1..s) and
    ``T1 + j L / s`` (j = 1..s-1), ``L = T2 - T1``. Doubling ``s`` keeps the
    previous source set (exactly so for n <= 2). Heat polynomials of total
    degree at most ``heat_degree`` are appended.
    """

    n: int = 2
    T: tuple = (0.0, 1.0)
    R_Omega: float = 1.0
    R_omega: float = 0.5
    hole: tuple = (0.3, 0.6)
    target_offset: float = 1.6
    shell_factor: float = 1.5
    depth: float = 1.0
    sizes: tuple = (2, 4, 8, 16)
    heat_degree: int = 4
    resolution: tuple = (24, 48, 32)
    rcond: float = 1e-13
    zero_target: bool = False

    def to_dict(self) -> dict:
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.__dict__.items()}

    def omega(self, scenario: str) -> Cylinder:
        if scenario == "no_hole":
            base = Ball((0.0,) * self.n, self.R_omega)
        elif scenario == "hole":
            base = Annulus((0.0,) * self.n, *self.hole)
        else:
            raise DomainError(f"unknown scenario {scenario!r}")
        return Cylinder(base, *self.T)

    def Omega(self) -> Cylinder:
        return Cylinder(Ball((0.0,) * self.n, self.R_Omega), *self.T)

    def validate(self):
        if self.n not in (1, 2, 3):
            raise DomainError("dimension must be 1, 2 or 3")
        if not 0 < self.R_omega < self.R_Omega:
            raise DomainError("need 0 < R_omega < R_Omega")
        r_in, r_out = self.hole
        if not 0 < r_in < r_out < self.R_Omega:
            raise DomainError("the hole annulus must sit compactly inside Omega")
        if not self.shell_factor > 1 or not self.target_offset > 1:
            raise DomainError("sources must lie outside the closed big cylinder")
        if not self.depth > 0:
            raise DomainError("depth must be positive")
        if list(self.sizes) != sorted(self.sizes) or min(self.sizes) < 1:
            raise DomainError("sizes must be positive and increasing")


def _ring_directions(n: int, count: int, offset: float) -> np.ndarray:
    if n == 1:
        return np.array([[-1.0], [1.0]])
    if n == 2:
        th = 2 * np.pi * np.arange(count) / count + offset
        return np.column_stack([np.cos(th), np.sin(th)])
    # spherical Fibonacci points, rotated about the polar axis
    k = np.arange(count) + 0.5
    z = 1 - 2 * k / count
    ph = np.pi * (1 + 5**0.5) * k + offset
    s = np.sqrt(1 - z * z)
    return np.column_stack([s * np.cos(ph), s * np.sin(ph), z])


def heat_polynomial_family(n: int, max_degree: int) -> list:
    """All heat polynomials in R^n of total degree at most ``max_degree``."""
    out = []
    for total in range(max_degree + 1):
        for degs in sorted((d for d in np.ndindex(*(total + 1,) * n) if sum(d) == total), reverse=True):
            out.append(HeatPolynomial(tuple(int(v) for v in degs)))
    return out


def separable_family(n: int, k_max: int, m_max: int, R2: float = 1.0,
                     problems=("dirichlet", "neumann")) -> list:
    """Ball eigenfunction atoms for every (problem, k <= k_max, j, m <= m_max)."""
    from .caloric import SeparableBall
    from .specialfn import harmonic_dimension

    out = []
    for prob in problems:
        for k in range(k_max + 1):
            for j in range(1, harmonic_dimension(n, k) + 1):
                for m in range(1, m_max + 1):
                    out.append(SeparableBall(n, prob, k, j, m, R2))
    return out


def density_dictionary(config: DensityConfig, level: int) -> list:
    """Fundamental translates on the source shell followed by heat polynomials."""
    T1, T2 = config.T
    L = T2 - T1
    R3 = config.shell_factor * config.R_Omega
    times = [T1 - j * L * config.depth / level for j in range(1, level + 1)]
    times += [T1 + j * L / level for j in range(1, level)]
    atoms = []
    for tau in times:
        # the rotation depends on the ring time only, so sets stay nested
        offset = 2 * np.pi * (((tau - T1) / L * 0.6180339887498949) % 1.0)
        for d in _ring_directions(config.n, level, offset):
            atoms.append(FundamentalTranslate(tuple(R3 * d) + (tau,)))
    return atoms + heat_polynomial_family(config.n, config.heat_degree)


def density_target(config: DensityConfig, scenario: str) -> CaloricAtom:
    """Hole: heat kernel with source at the hole centre at mid-time.
    No hole: the same kernel with its source moved just outside Omega."""
    T1, T2 = config.T
    t0 = 0.5 * (T1 + T2)
    if scenario == "hole":
        x0 = (0.0,) * config.n
    elif scenario == "no_hole":
        x0 = (config.target_offset * config.R_Omega,) + (0.0,) * (config.n - 1)
    else:
        raise DomainError(f"unknown scenario {scenario!r}")
    return FundamentalTranslate(x0 + (t0,))


def density_experiment(scenario: str, config: DensityConfig = DensityConfig()) -> list:
    """Residual curve ``[(N, residual, residual / ||target||)]`` of the L2
    projection of the scenario's target onto growing dictionaries."""
    scenario = scenario.lower().replace("-", "_")
    config.validate()
    omega = config.omega(scenario)
    target = density_target(config, scenario)
    rule_spec = InnerProductSpec("l2", omega, resolution=config.resolution)
    nodes, w = rule_spec.rule.nodes, rule_spec.rule.weights
    y = np.zeros(len(nodes)) if config.zero_target else _target_values(target, nodes)
    norm = float(np.sqrt(np.sum(w * y * y)))
    curve = []
    for level in config.sizes:
        atoms = density_dictionary(config, level)
        Dm = design_matrix(atoms, nodes)
        _, resid = _weighted_lstsq(Dm, w, y, config.rcond)
        curve.append((len(atoms), resid, resid / norm if norm > 0 else 0.0))
        logger.info("%s: N=%d residual=%.3e", scenario, len(atoms), resid)
    return curve


def continue_solution(target, basis: DoBasis, pair: GramPair, n_trunc: int) -> Combination:
    """Truncated doubly-orthogonal expansion of ``target`` known on the small
    cylinder: ``sum_{nu < n_trunc} (target, b_nu)_small / mu_nu * b_nu``,
    evaluable anywhere on the big cylinder."""
    if not 0 <= n_trunc <= basis.rank:
        raise DomainError(f"n_trunc must lie in 0..{basis.rank}")
    if n_trunc == 0:
        return Combination(pair.dictionary, (0.0,) * len(pair))
    mu = basis.mu[:n_trunc]
    if np.min(mu) < 1e-14 * basis.mu[0]:
        raise TruncationRequiredError("eigenvalue below 1e-14 * mu_1; truncate further")
    rule = pair.spec_small.rule
    y = _target_values(target, rule.nodes)
    b = _ld(pair.small_design).T @ (_ld(rule.weights) * _ld(y))
    C = _ld(basis.coefficients[:, :n_trunc])
    c = (C.T @ b) / _ld(mu)
    return Combination(pair.dictionary, tuple((C @ c).astype(float)))


def kernel_partial_sum(basis: DoBasis, x, t, y, tau, N: int) -> float:
    """``sum_{j < N} e_j(x, t) e_j(y, tau)`` for the big-orthonormal system."""
    if N <= 0:
        return 0.0
    p = np.concatenate([np.atleast_1d(np.asarray(x, dtype=float)), [t]])
    q = np.concatenate([np.atleast_1d(np.asarray(y, dtype=float)), [tau]])
    E = basis.functions(np.vstack([p, q]))[:, :N]
    return float(np.sum(E[0] * E[1]))
