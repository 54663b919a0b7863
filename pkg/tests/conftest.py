import numpy as np
import pytest

from heatbasis import Ball, Cylinder, build_gram_pair, double_orthogonal_basis
from heatbasis.dobasis import heat_polynomial_family, separable_family

T = (0.0, 1.0)


@pytest.fixture(scope="session")
def ball_in_ball():
    """Acceptance configuration: E-atoms (k <= 2, m <= 2, both problems) and
    heat polynomials of degree <= 4 on B(0.5) inside B(1), n = 2."""
    omega = Cylinder(Ball((0, 0), 0.5), *T)
    Omega = Cylinder(Ball((0, 0), 1.0), *T)
    atoms = separable_family(2, 2, 2) + heat_polynomial_family(2, 4)
    pair = build_gram_pair(atoms, omega, Omega, ("aniso", 1, 0), ((16, 32, 32), (16, 32, 32)))
    return pair, double_orthogonal_basis(pair)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def interior_points(rng, m, n=2, radius=1.0, t=T):
    d = rng.normal(size=(m, n))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    r = radius * rng.uniform(0, 1, m) ** (1 / n)
    return np.column_stack([r[:, None] * d, rng.uniform(t[0], t[1], m)])


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
