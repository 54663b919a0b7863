"""scikit-learn style estimators over caloric dictionaries.

Samples are space-time points ``X`` of shape ``(m, n + 1)``. When
``sample_weight`` holds quadrature weights of a rule on the small cylinder
(see ``sample_rule``), weighted sums are L2 inner products on it.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_cylinder, check_points, check_tolerance, check_weights
from .caloric import design_matrix
from .dobasis import _weighted_lstsq, build_gram_pair, continue_solution, double_orthogonal_basis
from .domain import QuadratureRule, tensor_quadrature
from .exceptions import DomainError

__all__ = ["sample_rule", "CaloricRegressor", "DoubleOrthogonalBasis", "CaloricContinuation"]


def sample_rule(cylinder, resolution=(16, 32, 32)):
    """``(X, sample_weight)`` of the tensor rule on ``cylinder``."""
    rule = tensor_quadrature(check_cylinder(cylinder), resolution)
    return np.array(rule.nodes), np.array(rule.weights)


def _check_dictionary(dictionary):
    if dictionary is None or len(dictionary) == 0:
        raise DomainError("dictionary must contain at least one atom")
    dims = {a.n for a in dictionary}
    if len(dims) != 1:
        raise DomainError("dictionary atoms differ in dimension")
    return tuple(dictionary), dims.pop()


class CaloricRegressor(RegressorMixin, BaseEstimator):
    """Weighted least-squares fit by the span of a caloric dictionary.

    Attributes: ``coef_`` (dictionary coordinates), ``residual_`` (weighted
    residual norm), ``n_features_in_``.
    """

    def __init__(self, dictionary=None, rcond=1e-13):
        self.dictionary = dictionary
        self.rcond = rcond

    def fit(self, X, y, sample_weight=None):
        atoms, n = _check_dictionary(self.dictionary)
        X = check_points(X, n)
        y = np.asarray(y, dtype=float).reshape(-1)
        if y.shape != (len(X),):
            raise DomainError("y must have one value per sample")
        w = check_weights(sample_weight, len(X))
        rcond = check_tolerance("rcond", self.rcond)
        self.coef_, self.residual_ = _weighted_lstsq(design_matrix(atoms, X), w, y, rcond)
        self.n_features_in_ = n + 1
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        atoms, n = _check_dictionary(self.dictionary)
        return design_matrix(atoms, check_points(X, n)) @ self.coef_


class DoubleOrthogonalBasis(TransformerMixin, BaseEstimator):
    """Doubly orthogonal system of a dictionary: orthonormal in the big
    product on ``Omega``, orthogonal in L2 over the samples on ``omega``.

    ``fit(X, sample_weight=w)`` uses the weighted samples as the small rule;
    ``fit()`` without samples uses the tensor rule of ``small_resolution``.
    ``transform(X)`` returns the values of the basis functions. Fitted
    attributes: ``pair_``, ``basis_``, ``coef_``, ``mu_``, ``diagnostics_``,
    ``rank_``.
    """

    def __init__(self, dictionary=None, omega=None, Omega=None, big_kind="aniso", s=1, k=0,
                 big_resolution=(16, 32, 32), small_resolution=(16, 32, 32), rel_tol=1e-10):
        self.dictionary = dictionary
        self.omega = omega
        self.Omega = Omega
        self.big_kind = big_kind
        self.s = s
        self.k = k
        self.big_resolution = big_resolution
        self.small_resolution = small_resolution
        self.rel_tol = rel_tol

    def _build(self, X, sample_weight):
        atoms, n = _check_dictionary(self.dictionary)
        omega, Omega = check_cylinder(self.omega), check_cylinder(self.Omega)
        rule = None
        if X is not None:
            X = check_points(X, n)
            if not np.all(omega.closure_contains(X)):
                raise DomainError("samples must lie in the closed small cylinder")
            w = check_weights(sample_weight, len(X))
            rule = QuadratureRule(X.copy(), w.copy(), ())
        pair = build_gram_pair(atoms, omega, Omega, (self.big_kind, self.s, self.k),
                               (self.big_resolution, self.small_resolution), small_rule=rule)
        self.pair_ = pair
        self.basis_ = double_orthogonal_basis(pair, check_tolerance("rel_tol", self.rel_tol))
        self.coef_ = self.basis_.coefficients
        self.mu_ = self.basis_.mu
        self.diagnostics_ = dict(self.basis_.diagnostics)
        self.rank_ = self.basis_.rank
        self.n_features_in_ = n + 1
        return X

    def fit(self, X=None, y=None, sample_weight=None):
        self._build(X, sample_weight)
        return self

    def transform(self, X):
        check_is_fitted(self, "basis_")
        return self.basis_.functions(check_points(X, self.n_features_in_ - 1))


class CaloricContinuation(DoubleOrthogonalBasis, RegressorMixin):
    """Continue a caloric function observed on ``omega`` to ``Omega`` by a
    truncated doubly orthogonal expansion.

    ``fit(X, y, sample_weight)`` takes weighted samples on the small
    cylinder; ``n_trunc=None`` keeps every basis function with
    ``mu >= 1e-14 mu_1``. ``predict(X)`` evaluates anywhere on ``Omega``.
    """

    def __init__(self, dictionary=None, omega=None, Omega=None, n_trunc=None, big_kind="aniso",
                 s=1, k=0, big_resolution=(16, 32, 32), small_resolution=(16, 32, 32),
                 rel_tol=1e-10):
        super().__init__(dictionary, omega, Omega, big_kind, s, k, big_resolution,
                         small_resolution, rel_tol)
        self.n_trunc = n_trunc

    def fit(self, X, y, sample_weight=None):
        X = self._build(X, sample_weight)
        y = np.asarray(y, dtype=float).reshape(-1)
        if y.shape != (len(X),):
            raise DomainError("y must have one value per sample")
        mu = self.mu_
        N = self.n_trunc
        if N is None:
            N = int(np.sum(mu >= 1e-14 * mu[0]))
        self.continuation_ = continue_solution(_SampleTable(X, y), self.basis_, self.pair_, int(N))
        self.n_trunc_ = int(N)
        return self

    def predict(self, X):
        check_is_fitted(self, "continuation_")
        return self.continuation_(check_points(X, self.n_features_in_ - 1))

    def score(self, X, y, sample_weight=None):
        return RegressorMixin.score(self, X, y, sample_weight)


class _SampleTable:
    """Target known only through its values at the sample points."""

    def __init__(self, X, y):
        self.X, self.y = X, y

    def __call__(self, points):
        if np.shape(points) != self.X.shape or not np.array_equal(points, self.X):
            raise DomainError("target is only known at the fitted sample points")
        return self.y
