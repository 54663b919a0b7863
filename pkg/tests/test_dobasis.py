import dataclasses
import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from heatbasis.caloric import FundamentalTranslate, HeatPolynomial, SeparableBall
from heatbasis.dobasis import (
    DensityConfig,
    GramPair,
    build_gram_pair,
    check_nested,
    continue_solution,
    density_dictionary,
    density_experiment,
    density_target,
    double_orthogonal_basis,
    heat_polynomial_family,
    kernel_partial_sum,
    project_l2,
    separable_family,
)
from heatbasis.domain import Annulus, Ball, Box, Cylinder
from heatbasis.exceptions import DomainError, TruncationRequiredError

from .conftest import interior_points

SMALL = Cylinder(Ball((0, 0), 0.5), 0.0, 1.0)
BIG = Cylinder(Ball((0, 0), 1.0), 0.0, 1.0)


def toy_pair(big, small):
    atoms = tuple(HeatPolynomial((d,)) for d in range(len(big)))
    return GramPair(atoms, np.array(big, dtype=float), np.array(small, dtype=float), None, None)


def big_norm_sq(pair, e):
    el = np.asarray(e, dtype=np.longdouble)
    return float(el @ np.asarray(pair.big, dtype=np.longdouble) @ el)


# ---------------------------------------------------------------- gram pair

def test_constant_gram_pair():
    pair = build_gram_pair([HeatPolynomial((0, 0))], SMALL, BIG, "l2")
    assert abs(pair.big[0, 0] - math.pi) < 1e-13
    assert abs(pair.small[0, 0] - math.pi / 4) < 1e-13


def test_empty_gram_pair():
    pair = build_gram_pair([], SMALL, BIG)
    assert len(pair) == 0 and pair.big.shape == (0, 0) and pair.small.shape == (0, 0)
    with pytest.raises(DomainError):
        double_orthogonal_basis(pair)


def test_separable_atoms_give_diagonal_grams():
    atoms = separable_family(2, 2, 1, problems=("dirichlet",))
    pair = build_gram_pair(atoms, SMALL, BIG, "l2")
    for G in (pair.big, pair.small):
        off = np.abs(G - np.diag(np.diag(G)))
        assert np.max(off / np.sqrt(np.outer(np.diag(G), np.diag(G)))) < 1e-8


def test_gram_pair_rejections():
    with pytest.raises(DomainError):
        build_gram_pair([FundamentalTranslate((0.9, 0.0, 0.5))], SMALL, BIG)
    with pytest.raises(DomainError):
        build_gram_pair([HeatPolynomial((1,))], SMALL, BIG)
    with pytest.raises(DomainError):
        build_gram_pair([HeatPolynomial((0, 0))], BIG, SMALL)
    with pytest.raises(DomainError):
        build_gram_pair([HeatPolynomial((0, 0))], Cylinder(Ball((0, 0), 0.5), 0.0, 0.5), BIG)
    pair = build_gram_pair([HeatPolynomial((0, 0))], SMALL, BIG)
    with pytest.raises(ValueError):
        pair.big[0, 0] = 1.0


def test_check_nested_shapes():
    check_nested(Cylinder(Annulus((0, 0), 0.3, 0.6), 0, 1), BIG)
    check_nested(Cylinder(Box((-0.5, -0.5), (0.5, 0.5)), 0, 1), BIG)
    check_nested(Cylinder(Ball((0.3, 0.0), 0.7), 0, 1), BIG)
    with pytest.raises(DomainError):
        check_nested(Cylinder(Box((-0.8, -0.8), (0.8, 0.8)), 0, 1), BIG)
    with pytest.raises(DomainError):
        check_nested(Cylinder(Ball((0.4, 0.0), 0.7), 0, 1), BIG)


# ------------------------------------------------------------ toy problems

def test_identity_pair():
    b = double_orthogonal_basis(toy_pair(np.eye(3), np.eye(3)))
    assert np.allclose(b.mu, 1.0, atol=1e-15)
    assert np.allclose(b.coefficients.T @ b.coefficients, np.eye(3), atol=1e-15)


def test_diagonal_pair():
    b = double_orthogonal_basis(toy_pair(np.eye(2), np.diag([4.0, 1.0])))
    assert np.allclose(b.mu, [4.0, 1.0], atol=1e-15)
    assert np.allclose(np.abs(b.coefficients), np.eye(2), atol=1e-15)
    b = double_orthogonal_basis(toy_pair(np.eye(2), np.diag([1.0, 4.0])))
    assert np.allclose(b.mu, [4.0, 1.0], atol=1e-15)
    assert np.allclose(np.abs(b.coefficients), [[0, 1], [1, 0]], atol=1e-15)


def test_rank_deficient_big_gram():
    # third column duplicates the first
    X = np.array([[2.0, 1.0, 2.0], [1.0, 2.0, 1.0], [1.0, 1.0, 1.0]])
    A = X.T @ X
    b = double_orthogonal_basis(toy_pair(A, 0.5 * A))
    assert b.rank == 2
    assert b.diagnostics["big_residual"] < 1e-12
    assert np.allclose(b.mu, 0.5, atol=1e-12)


@given(st.integers(2, 12), st.integers(0, 2**31 - 1))
@settings(max_examples=40, deadline=None)
def test_generalized_eigenvalues_match_oracle(N, seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(N, N))
    A = X @ X.T + 0.1 * np.eye(N)
    Y = rng.normal(size=(N, N)) / 3
    B = Y @ Y.T
    b = double_orthogonal_basis(toy_pair(0.5 * (A + A.T), 0.5 * (B + B.T)))
    expect = scipy.linalg.eigh(B, A, eigvals_only=True)[::-1]
    assert b.rank == N
    assert np.allclose(b.mu, expect, atol=1e-10 * expect[0], rtol=1e-9)
    assert b.diagnostics["big_residual"] < 1e-8
    assert b.diagnostics["small_residual"] < 1e-8
    assert np.all(np.diff(b.mu) <= 0)


# ------------------------------------------------- acceptance configuration

def test_ball_in_ball_basis(ball_in_ball):
    pair, basis = ball_in_ball
    C = basis.coefficients
    assert basis.rank == len(pair)
    assert np.max(np.abs(C.T @ pair.big @ C - np.eye(basis.rank))) < 1e-8
    S = C.T @ pair.small @ C
    assert np.max(np.abs(S - np.diag(basis.mu))) < 1e-8 * basis.mu[0]
    assert all(v < 1e-8 for v in basis.diagnostics.values())
    assert np.all(np.diff(basis.mu) <= 0)
    assert basis.mu[-1] >= -1e-10 * basis.mu[0] and basis.mu[0] <= 1.0
    assert basis.mu[-1] / basis.mu[0] < 1e-4


def test_basis_elements_evaluate(ball_in_ball, rng):
    pair, basis = ball_in_ball
    P = interior_points(rng, 7)
    F = basis.functions(P)
    assert F.shape == (7, basis.rank)
    assert np.allclose(basis.element(3)(P), F[:, 3], rtol=1e-12, atol=1e-12)


# ------------------------------------------------------------ projection

def test_projection_of_dictionary_atom(ball_in_ball):
    pair, _ = ball_in_ball
    for i in (0, 7, 20, 30):
        atom = pair.dictionary[i]
        coeffs, resid = project_l2(atom, pair)
        assert resid < 1e-8 * math.sqrt(pair.small[i, i])


def test_projection_of_zero(ball_in_ball):
    pair, _ = ball_in_ball
    coeffs, resid = project_l2(lambda p: np.zeros(len(p)), pair)
    assert resid == 0.0 and np.all(coeffs == 0)


def _shell(N, times=(-0.5, -0.2, 0.4)):
    th = 2 * np.pi * np.arange(N) / N
    return [FundamentalTranslate((1.5 * math.cos(a), 1.5 * math.sin(a), tau)) for tau in times for a in th]


def test_projection_residual_decreases_with_shell_size():
    target = FundamentalTranslate((1.6, 0.0, 0.5))
    resid = []
    for N in (2, 4, 8, 16):
        pair = build_gram_pair(_shell(N), SMALL, BIG, "l2", ((8, 16, 8), (16, 32, 24)))
        resid.append(project_l2(target, pair)[1])
    assert all(b < a for a, b in zip(resid, resid[1:])), resid


def test_density_residual_nested_and_zero_target():
    cfg = DensityConfig(sizes=(1, 2, 4, 8), resolution=(12, 24, 12), heat_degree=2)
    for scenario in ("no_hole", "hole"):
        curve = density_experiment(scenario, cfg)
        r = [c[1] for c in curve]
        assert all(b <= a for a, b in zip(r, r[1:])), (scenario, r)
        zero = density_experiment(scenario, dataclasses.replace(cfg, zero_target=True))
        assert all(c[1] == 0.0 and c[2] == 0.0 for c in zero)
        assert [c[0] for c in zero] == [c[0] for c in curve]


def test_density_dictionary_nested():
    cfg = DensityConfig()
    for s in (2, 4, 8):
        small = {a.source for a in density_dictionary(cfg, s) if isinstance(a, FundamentalTranslate)}
        big = {a.source for a in density_dictionary(cfg, 2 * s) if isinstance(a, FundamentalTranslate)}
        key = lambda src: tuple(round(v, 12) for v in src)
        assert {key(p) for p in small} <= {key(p) for p in big}
    Omega = cfg.Omega()
    assert not any(a.singular_in(Omega) for a in density_dictionary(cfg, 16))
    assert not density_target(cfg, "no_hole").singular_in(Omega)
    assert density_target(cfg, "hole").singular_in(Omega)


def test_density_config_validation():
    for bad in (dict(R_omega=1.2), dict(hole=(0.6, 0.3)), dict(shell_factor=0.9), dict(sizes=(4, 2)), dict(n=4)):
        with pytest.raises(DomainError):
            density_experiment("no_hole", DensityConfig(**bad))
    with pytest.raises(DomainError):
        density_experiment("bagel", DensityConfig(sizes=(1,)))


# ------------------------------------------------------------ continuation

def test_continuation_reproduces_basis_element(ball_in_ball, rng):
    pair, basis = ball_in_ball
    b1 = basis.element(0)
    u = continue_solution(b1, basis, pair, basis.rank)
    P = interior_points(rng, 20)
    ref = b1(P)
    assert np.max(np.abs(u(P) - ref)) < 1e-6 * np.max(np.abs(ref))


def test_continuation_of_zero(ball_in_ball, rng):
    pair, basis = ball_in_ball
    u = continue_solution(lambda p: np.zeros(len(p)), basis, pair, 10)
    assert np.all(u(interior_points(rng, 5)) == 0)
    assert np.all(continue_solution(basis.element(1), basis, pair, 0)(interior_points(rng, 5)) == 0)


def test_continuation_truncation_guard(ball_in_ball):
    pair, basis = ball_in_ball
    tiny = basis.mu.copy()
    tiny[-1] = 1e-16 * tiny[0]
    fake = dataclasses.replace(basis, mu=tiny)
    with pytest.raises(TruncationRequiredError):
        continue_solution(pair.dictionary[0], fake, pair, basis.rank)
    continue_solution(pair.dictionary[0], fake, pair, basis.rank - 1)
    with pytest.raises(DomainError):
        continue_solution(pair.dictionary[0], basis, pair, basis.rank + 1)


def test_continuation_big_norm_error_monotone(ball_in_ball):
    """For in-span targets the big-norm error of the truncated expansion is
    non-increasing in the truncation level."""
    pair, basis = ball_in_ball
    for i, atom in enumerate(pair.dictionary):
        errs = []
        for N in range(0, basis.rank + 1):
            c = np.array(continue_solution(atom, basis, pair, N).coefficients)
            e = c.copy()
            e[i] -= 1.0
            errs.append(big_norm_sq(pair, e))
        scale = pair.big[i, i]
        assert all(b <= a + 1e-10 * scale for a, b in zip(errs, errs[1:])), i
        assert errs[-1] < 1e-8 * scale


# --------------------------------------------------------- kernel sums

def test_kernel_partial_sum(ball_in_ball, rng):
    pair, basis = ball_in_ball
    p, q = interior_points(rng, 2)
    for N in (0, 1, 5, basis.rank):
        a = kernel_partial_sum(basis, p[:2], p[2], q[:2], q[2], N)
        b = kernel_partial_sum(basis, q[:2], q[2], p[:2], p[2], N)
        assert a == b
    assert kernel_partial_sum(basis, p[:2], p[2], q[:2], q[2], 0) == 0.0
    # diagonal values are non-decreasing in N
    diag = [kernel_partial_sum(basis, p[:2], p[2], p[:2], p[2], N) for N in range(basis.rank + 1)]
    assert all(b >= a for a, b in zip(diag, diag[1:]))


def test_kernel_reproduces_span(ball_in_ball, rng):
    pair, basis = ball_in_ball
    a = rng.normal(size=len(pair))
    # (e_j, u)_big for u = sum a_i atom_i
    proj = basis.coefficients.T @ pair.big @ a
    Q = interior_points(rng, 5)
    E = basis.functions(Q)
    ref = np.column_stack([f(Q) for f in pair.dictionary]) @ a
    scale = np.max(np.abs(ref))
    assert np.max(np.abs(E @ proj - ref)) < 1e-8 * scale
    # a short partial sum does not reproduce u
    assert np.max(np.abs(E[:, :5] @ proj[:5] - ref)) > 1e-3 * scale
