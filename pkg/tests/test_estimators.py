import numpy as np
import pytest
from sklearn.base import clone

from heatbasis.caloric import FundamentalTranslate, HeatPolynomial
from heatbasis.dobasis import heat_polynomial_family, separable_family
from heatbasis.domain import Ball, Cylinder
from heatbasis.estimators import CaloricContinuation, CaloricRegressor, DoubleOrthogonalBasis, sample_rule
from heatbasis.exceptions import DomainError

from .conftest import interior_points

SMALL = Cylinder(Ball((0, 0), 0.5), 0.0, 1.0)
BIG = Cylinder(Ball((0, 0), 1.0), 0.0, 1.0)
ATOMS = separable_family(2, 1, 1) + heat_polynomial_family(2, 3)


def test_sample_rule_integrates_area():
    X, w = sample_rule(SMALL, (8, 16, 4))
    assert X.shape == (8 * 16 * 4, 3)
    assert abs(w.sum() - np.pi / 4) < 1e-13
    X2, _ = sample_rule(SMALL.to_dict(), (8, 16, 4))
    assert np.array_equal(X, X2)


def test_regressor_recovers_span_member():
    X, w = sample_rule(SMALL, (12, 24, 12))
    coef = np.arange(len(ATOMS), dtype=float) / 10
    y = np.column_stack([a(X) for a in ATOMS]) @ coef
    reg = CaloricRegressor(ATOMS).fit(X, y, sample_weight=w)
    assert reg.residual_ < 1e-10 * np.sqrt(np.sum(w * y * y))
    P = interior_points(np.random.default_rng(1), 10, radius=0.5)
    assert np.allclose(reg.predict(P), np.column_stack([a(P) for a in ATOMS]) @ coef, atol=1e-9)
    assert reg.score(X, y) > 1 - 1e-12
    assert reg.n_features_in_ == 3


def test_regressor_validation():
    reg = CaloricRegressor(ATOMS)
    with pytest.raises(DomainError):
        reg.fit(np.zeros((4, 2)), np.zeros(4))
    with pytest.raises(DomainError):
        reg.fit(np.zeros((4, 3)), np.zeros(5))
    with pytest.raises(DomainError):
        reg.fit(np.full((4, 3), np.nan), np.zeros(4))
    with pytest.raises(DomainError):
        reg.fit(np.zeros((4, 3)), np.zeros(4), sample_weight=-np.ones(4))
    with pytest.raises(DomainError):
        CaloricRegressor([]).fit(np.zeros((4, 3)), np.zeros(4))
    with pytest.raises(DomainError):
        CaloricRegressor(ATOMS, rcond=2.0).fit(np.zeros((4, 3)), np.zeros(4))
    with pytest.raises(DomainError):
        CaloricRegressor([HeatPolynomial((1,)), HeatPolynomial((1, 0))]).fit(np.zeros((4, 3)), np.zeros(4))
    from sklearn.exceptions import NotFittedError
    with pytest.raises(NotFittedError):
        CaloricRegressor(ATOMS).predict(np.zeros((1, 3)))


def test_params_and_clone():
    est = DoubleOrthogonalBasis(ATOMS, SMALL, BIG, rel_tol=1e-9)
    params = est.get_params()
    assert params["rel_tol"] == 1e-9 and params["big_kind"] == "aniso"
    twin = clone(est)
    assert [repr(a) for a in twin.dictionary] == [repr(a) for a in ATOMS]
    est.set_params(s=0, big_kind="l2")
    assert est.s == 0
    cont = CaloricContinuation(ATOMS, SMALL, BIG, n_trunc=5)
    assert clone(cont).get_params()["n_trunc"] == 5


def test_double_orthogonal_transformer():
    est = DoubleOrthogonalBasis(ATOMS, SMALL.to_dict(), BIG.to_dict(), small_resolution=(12, 24, 12)).fit()
    assert est.rank_ == len(ATOMS)
    assert all(v < 1e-8 for v in est.diagnostics_.values())
    X, w = sample_rule(SMALL, (12, 24, 12))
    F = est.transform(X)
    # the transformed features are orthogonal on the small rule with norms mu
    G = (F * w[:, None]).T @ F
    assert np.max(np.abs(G - np.diag(est.mu_))) < 1e-8 * est.mu_[0]


def test_transformer_with_samples_matches_default_rule():
    X, w = sample_rule(SMALL, (12, 24, 12))
    a = DoubleOrthogonalBasis(ATOMS, SMALL, BIG, small_resolution=(12, 24, 12)).fit()
    b = DoubleOrthogonalBasis(ATOMS, SMALL, BIG).fit(X, sample_weight=w)
    assert np.allclose(a.mu_, b.mu_, rtol=1e-12, atol=1e-15)
    with pytest.raises(DomainError):
        DoubleOrthogonalBasis(ATOMS, SMALL, BIG).fit(np.array([[0.9, 0.0, 0.5]]))
    with pytest.raises(DomainError):
        DoubleOrthogonalBasis(ATOMS, "ball", BIG).fit()


def test_continuation_estimator():
    X, w = sample_rule(SMALL, (16, 32, 32))
    target = HeatPolynomial((1, 1))
    atoms = separable_family(2, 2, 2) + heat_polynomial_family(2, 4)
    est = CaloricContinuation(atoms, SMALL, BIG).fit(X, target(X), sample_weight=w)
    assert est.n_trunc_ == est.rank_
    P = interior_points(np.random.default_rng(3), 20)
    ref = target(P)
    assert np.max(np.abs(est.predict(P) - ref)) < 1e-8 * np.max(np.abs(ref))
    short = clone(est).set_params(n_trunc=10).fit(X, target(X), sample_weight=w)
    assert np.max(np.abs(short.predict(P) - ref)) > 1e-3 * np.max(np.abs(ref))


def test_continuation_of_exterior_source():
    """A caloric function outside the dictionary span is continued only
    approximately, but the error shrinks with the truncation level."""
    X, w = sample_rule(SMALL, (16, 32, 32))
    target = FundamentalTranslate((2.0, 0.0, -0.5))
    atoms = separable_family(2, 2, 2) + heat_polynomial_family(2, 4)
    P = interior_points(np.random.default_rng(4), 20)
    errs = []
    for N in (5, 15, 25):
        est = CaloricContinuation(atoms, SMALL, BIG, n_trunc=N).fit(X, target(X), sample_weight=w)
        errs.append(np.max(np.abs(est.predict(P) - target(P))))
    assert errs[-1] < errs[0]
    assert errs[-1] < 0.1 * np.max(np.abs(target(P)))
