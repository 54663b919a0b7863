"""Caloric function toolkit: heat-kernel atoms, anisotropic Sobolev Gram
matrices, parabolic potentials, doubly orthogonal bases, density and
continuation experiments."""

from .caloric import (
    BiharmonicCaloric,
    CaloricAtom,
    Combination,
    FundamentalTranslate,
    HeatPolynomial,
    MultiIndex,
    SeparableBall,
    StaticHarmonic,
    design_matrix,
    eval_atom,
    fundamental_solution,
    heat_residual,
)
from .dobasis import (
    DensityConfig,
    DoBasis,
    GramPair,
    build_gram_pair,
    continue_solution,
    density_experiment,
    double_orthogonal_basis,
    heat_polynomial_family,
    kernel_partial_sum,
    project_l2,
    separable_family,
)
from .domain import Annulus, Ball, Box, Cylinder, QuadratureRule, quad_integrate, tensor_quadrature
from .estimators import CaloricContinuation, CaloricRegressor, DoubleOrthogonalBasis, sample_rule
from .exceptions import (
    ConvergenceError,
    DomainError,
    HeatBasisError,
    InvalidConfigError,
    NotPSDError,
    OutOfRangeError,
    TruncationRequiredError,
    UnsupportedPointError,
)
from .potentials import PotentialResolution, green_identity, parabolic_potential
from .sobolev import InnerProductSpec, gram, inner_product

__version__ = "0.1.0"
