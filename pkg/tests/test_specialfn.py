import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from heatbasis.exceptions import DomainError, OutOfRangeError
from heatbasis.specialfn import (
    HarmonicIndex,
    bessel_j,
    bessel_j_prime,
    bessel_j_scaled,
    bessel_zero,
    harmonic_dimension,
    printed_order,
    radial_ode_residual,
    spherical_harmonic,
    standard_order,
)
from heatbasis.domain import sphere_rule

from .oracles import bessel_zero_oracle


def test_j0_at_origin():
    assert bessel_j(0, 0.0) == 1.0
    assert bessel_j(2.5, 0.0) == 0.0


def test_half_order_closed_form():
    assert abs(bessel_j(0.5, math.pi / 2) - 2 / math.pi) < 1e-12
    x = np.linspace(0.1, 20, 50)
    exact = np.sqrt(2 / (np.pi * x)) * np.sin(x)
    assert np.max(np.abs(bessel_j(0.5, x) - exact)) < 1e-12


def test_first_zero_of_j0():
    assert abs(bessel_j(0, 2.404825557695773)) < 1e-10


@pytest.mark.parametrize("nu", [0, 0.5, 1, 2.5, 7, 15])
def test_against_scipy(nu):
    x = np.concatenate([np.linspace(0, 40, 401), [14.99, 15.01, nu + 4.99, nu + 5.01]])
    assert np.max(np.abs(bessel_j(nu, x) - special.jv(nu, x))) < 1e-12


@given(st.floats(0, 20), st.floats(0.01, 60))
@settings(max_examples=200, deadline=None)
def test_random_against_scipy(nu, x):
    assert abs(bessel_j(nu, x) - special.jv(nu, x)) < 1e-11


def test_scaled_is_regular_at_origin():
    z = np.array([0.0, 1e-8, 0.5, 3.0])
    nu = 1.5
    expect = np.where(z > 0, special.jv(nu, z) / np.where(z > 0, z, 1) ** nu, 1 / (2**nu * math.gamma(nu + 1)))
    assert np.allclose(bessel_j_scaled(nu, z), expect, rtol=1e-12, atol=1e-15)


def test_derivative_identities():
    assert bessel_j_prime(0, 0.0) == 0.0
    assert abs(bessel_j_prime(0, 1.0) + bessel_j(1, 1.0)) < 1e-14
    assert abs(bessel_j_prime(1, 1.8411837813406593)) < 1e-9
    x = np.linspace(0.1, 30, 100)
    for nu in (0, 0.3, 1, 2.5):
        assert np.max(np.abs(bessel_j_prime(nu, x) - special.jvp(nu, x))) < 1e-12


def test_recurrence():
    x = np.linspace(0.05, 30, 300)
    for nu in np.arange(0.5, 10.01, 0.5):
        # negative orders are outside the library's range; J_{-1/2} has a closed form
        below = np.sqrt(2 / (np.pi * x)) * np.cos(x) if nu == 0.5 else bessel_j(nu - 1, x)
        lhs = below + bessel_j(nu + 1, x)
        rhs = 2 * nu / x * bessel_j(nu, x)
        scale = np.maximum(np.abs(rhs), 1e-3)
        assert np.max(np.abs(lhs - rhs) / scale) < 1e-9


def test_range_guards():
    with pytest.raises(DomainError):
        bessel_j(-1, 1.0)
    with pytest.raises(DomainError):
        bessel_j(1, -1.0)
    with pytest.raises(OutOfRangeError):
        bessel_j(200, 1.0)
    with pytest.raises(OutOfRangeError):
        bessel_j(0, 1e9)


@pytest.mark.parametrize("nu,m,kind,expect", [
    (0, 1, "function", 2.404825557695773),
    (1, 1, "function", 3.831705970207512),
    (0, 1, "derivative", 3.831705970207512),
])
def test_zero_examples(nu, m, kind, expect):
    assert abs(bessel_zero(nu, m, kind) - expect) < 1e-9


@pytest.mark.parametrize("nu", [0, 0.5, 1, 2, 3.5, 6])
def test_zeros_against_bisection(nu):
    for m in range(1, 6):
        assert abs(bessel_zero(nu, m) - bessel_zero_oracle(nu, m)) < 1e-10
        assert abs(bessel_zero(nu, m, "derivative") - bessel_zero_oracle(nu, m, True)) < 1e-10


def test_zeros_increase_and_interlace():
    for nu in (0, 1, 2.5, 5):
        z = [bessel_zero(nu, m) for m in range(1, 9)]
        z1 = [bessel_zero(nu + 1, m) for m in range(1, 9)]
        assert all(a < b for a, b in zip(z, z[1:]))
        assert all(a < b < c for a, b, c in zip(z, z1, z[1:]))


def test_zero_index_validation():
    with pytest.raises(DomainError):
        bessel_zero(0, 0)
    with pytest.raises(DomainError):
        bessel_zero(0, 1, "other")


def test_harmonic_dimension():
    assert harmonic_dimension(3, 0) == 1
    assert harmonic_dimension(3, 2) == 5
    assert harmonic_dimension(2, 3) == 2
    for k in range(21):
        assert harmonic_dimension(3, k) == 2 * k + 1
        assert harmonic_dimension(2, k) == (1 if k == 0 else 2)
    with pytest.raises(DomainError):
        harmonic_dimension(4, 1)


def test_harmonic_index_validation():
    with pytest.raises(DomainError):
        HarmonicIndex(3, 2, 6)
    with pytest.raises(DomainError):
        HarmonicIndex(2, 1, 0)


def test_planar_harmonics():
    th = np.linspace(0, 2 * np.pi, 7)
    d = np.column_stack([np.cos(th), np.sin(th)])
    assert np.allclose(spherical_harmonic(HarmonicIndex(2, 0, 1), d), 1 / math.sqrt(2 * math.pi))
    assert np.allclose(spherical_harmonic(HarmonicIndex(2, 3, 1), d), np.cos(3 * th) / math.sqrt(math.pi))
    assert np.allclose(spherical_harmonic(HarmonicIndex(2, 3, 2), d), np.sin(3 * th) / math.sqrt(math.pi))
    dirs, w = sphere_rule(2, 64)
    a = spherical_harmonic(HarmonicIndex(2, 2, 1), dirs)
    b = spherical_harmonic(HarmonicIndex(2, 2, 2), dirs)
    assert abs(np.sum(w * a * b)) < 1e-12


def _gram(n, kmax, count):
    dirs, w = sphere_rule(n, count)
    idx = [HarmonicIndex(n, k, j) for k in range(kmax + 1) for j in range(1, harmonic_dimension(n, k) + 1)]
    H = np.column_stack([spherical_harmonic(i, dirs) for i in idx])
    return (H * w[:, None]).T @ H


def test_sphere_harmonics_orthonormal():
    assert np.max(np.abs(_gram(3, 4, 16) - np.eye(25))) < 1e-8
    assert np.max(np.abs(_gram(3, 6, 16) - np.eye(49))) < 1e-8
    assert np.max(np.abs(_gram(2, 6, 32) - np.eye(13))) < 1e-12


def test_sphere_harmonics_match_scipy():
    # real form without the Condon-Shortley phase
    rng = np.random.default_rng(1)
    d = rng.normal(size=(20, 3))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    polar = np.arccos(d[:, 2])
    az = np.arctan2(d[:, 1], d[:, 0])
    for k in range(5):
        for m in range(k + 1):
            Y = special.sph_harm_y(k, m, polar, az) * (-1) ** m
            expect_cos = Y.real * (math.sqrt(2) if m else 1)
            assert np.allclose(spherical_harmonic(HarmonicIndex(3, k, 1 if m == 0 else 2 * m), d), expect_cos, atol=1e-12)
            if m:
                expect_sin = Y.imag * math.sqrt(2)
                assert np.allclose(spherical_harmonic(HarmonicIndex(3, k, 2 * m + 1), d), expect_sin, atol=1e-12)


def test_direction_must_be_unit():
    with pytest.raises(DomainError):
        spherical_harmonic(HarmonicIndex(2, 1, 1), [1.0, 0.1])


def test_radial_ode_examples():
    assert abs(radial_ode_residual(3, 0, 0.5, 1.0, 1.0)) < 1e-10
    r = np.linspace(0.1, 3, 200)
    assert np.max(np.abs(radial_ode_residual(2, 1, 1.0, 1.0, r))) < 1e-9
    assert standard_order(3, 2) == 2.5
    assert abs(printed_order(3, 2) - math.sqrt(36.25)) < 1e-15
    assert np.max(np.abs(radial_ode_residual(3, 2, printed_order(3, 2), 1.0, r))) > 1e-3
    assert np.max(np.abs(radial_ode_residual(3, 2, 2.5, 1.0, r))) < 1e-9
    with pytest.raises(DomainError):
        radial_ode_residual(2, 0, 0.0, 1.0, 0.0)
