"""Input checks shared by the estimators and the command line."""

from __future__ import annotations

import numpy as np
from sklearn.utils.validation import check_array

from .domain import Cylinder
from .exceptions import DomainError

__all__ = ["check_points", "check_weights", "check_cylinder", "check_tolerance"]


def check_points(X, n: int | None = None) -> np.ndarray:
    """Space-time points as a finite float array of shape ``(m, n + 1)``."""
    try:
        X = check_array(X, dtype=np.float64, ensure_2d=True, ensure_all_finite=True)
    except ValueError as exc:
        raise DomainError(str(exc)) from None
    if n is not None and X.shape[1] != n + 1:
        raise DomainError(f"expected points with {n + 1} columns (x_1..x_{n}, t), got {X.shape[1]}")
    return X


def check_weights(w, m: int) -> np.ndarray:
    if w is None:
        return np.full(m, 1.0 / m)
    try:
        w = check_array(w, dtype=np.float64, ensure_2d=False, ensure_all_finite=True)
    except ValueError as exc:
        raise DomainError(str(exc)) from None
    if w.shape != (m,):
        raise DomainError(f"sample_weight must have shape ({m},), got {w.shape}")
    if np.any(w < 0):
        raise DomainError("sample_weight must be non-negative")
    return w


def check_cylinder(c) -> Cylinder:
    if isinstance(c, Cylinder):
        return c
    if isinstance(c, dict):
        return Cylinder.from_dict(c)
    raise DomainError(f"expected a Cylinder or its dict description, got {type(c).__name__}")


def check_tolerance(name: str, value) -> float:
    try:
        v = float(value)
    except (TypeError, ValueError):
        raise DomainError(f"{name} must be a number") from None
    if not 0 < v < 1:
        raise DomainError(f"{name} must lie in (0, 1), got {v}")
    return v
