"""Dense symmetric linear algebra: Jacobi eigensolver, diagonally pivoted
truncated Cholesky, and SPD solves.

All routines keep the dtype of their input, so they run unchanged in
``numpy.longdouble`` when extra precision is wanted.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .exceptions import ConvergenceError, DomainError, NotPSDError, TruncationRequiredError

__all__ = [
    "EigenDecomposition",
    "TruncatedCholesky",
    "as_symmetric",
    "symmetric_eig",
    "cholesky_trunc",
    "spd_solve",
    "solve_lower",
    "solve_upper",
]


class EigenDecomposition(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


class TruncatedCholesky(NamedTuple):
    """``A[perm][:, perm] ~= L @ L.T`` with ``L`` of shape ``(order, rank)``."""

    L: np.ndarray
    rank: int
    perm: np.ndarray


def _float_dtype(A):
    dt = np.asarray(A).dtype
    return dt if dt in (np.float64, np.longdouble, np.float32) else np.float64


def as_symmetric(A, *, atol: float = 0.0) -> np.ndarray:
    """Return ``A`` as a float array after checking it is square and symmetric."""
    A = np.array(A, dtype=_float_dtype(A))
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {A.shape}")
    if np.any(np.abs(A - A.T) > atol):
        raise DomainError("matrix is not symmetric")
    return A


def _round_robin(m: int):
    """Pairings of ``range(m)`` (m even) covering every pair once over m-1 rounds."""
    players = list(range(m))
    for _ in range(m - 1):
        yield [(players[i], players[m - 1 - i]) for i in range(m // 2)]
        players = [players[0], players[-1]] + players[1:-1]


def symmetric_eig(A, *, tol: float = 1e-14, max_sweeps: int = 60) -> EigenDecomposition:
    """Cyclic Jacobi eigendecomposition of a symmetric matrix.

    Sweeps use a round-robin ordering so each step applies ``order // 2``
    disjoint rotations at once. Iteration stops when the off-diagonal
    Frobenius mass drops below ``tol * ||A||_F``. Eigenvalues come back in
    descending order; each eigenvector is signed so its largest-magnitude
    entry is positive.
    """
    A = as_symmetric(A).copy()
    n = A.shape[0]
    dt = A.dtype
    V = np.eye(n, dtype=dt)
    if n <= 1:
        return EigenDecomposition(np.diag(A).copy(), V)
    norm = np.sqrt(np.sum(A * A))
    m = n + (n % 2)
    rounds = [np.array([(p, q) for p, q in r if p < n and q < n], dtype=int) for r in _round_robin(m)]
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum((A - np.diag(np.diag(A))) ** 2))
        if not off > tol * norm:
            break
        for pairs in rounds:
            if len(pairs) == 0:
                continue
            p, q = pairs[:, 0], pairs[:, 1]
            apq = A[p, q]
            app = A[p, p]
            aqq = A[q, q]
            active = np.abs(apq) > 0
            if not active.any():
                continue
            with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
                tau = np.where(active, (aqq - app) / (2 * np.where(active, apq, 1)), 0)
                t = np.where(tau >= 0, 1, -1) / (np.abs(tau) + np.hypot(1, tau))
            t = np.where(active, t, 0).astype(dt)
            c = 1 / np.sqrt(1 + t * t)
            s = t * c
            Ap, Aq = A[p, :].copy(), A[q, :].copy()
            A[p, :] = c[:, None] * Ap - s[:, None] * Aq
            A[q, :] = s[:, None] * Ap + c[:, None] * Aq
            Ap, Aq = A[:, p].copy(), A[:, q].copy()
            A[:, p] = Ap * c - Aq * s
            A[:, q] = Ap * s + Aq * c
            A[p, q] = 0
            A[q, p] = 0
            Vp, Vq = V[:, p].copy(), V[:, q].copy()
            V[:, p] = Vp * c - Vq * s
            V[:, q] = Vp * s + Vq * c
    else:
        raise ConvergenceError(f"Jacobi iteration did not converge in {max_sweeps} sweeps")
    w = np.diag(A).copy()
    order = np.argsort(-w, kind="stable")
    w, V = w[order], V[:, order]
    lead = np.argmax(np.abs(V), axis=0)
    signs = np.where(V[lead, np.arange(n)] < 0, -1, 1).astype(dt)
    return EigenDecomposition(w, V * signs)


def cholesky_trunc(A, rel_tol: float = 1e-10) -> TruncatedCholesky:
    """Diagonally pivoted Cholesky of a PSD matrix, truncated once the next
    pivot falls below ``rel_tol`` times the first pivot.

    Raises ``NotPSDError`` if a remaining diagonal entry is below
    ``-rel_tol * max|diag(A)|``.
    """
    A = as_symmetric(A)
    n = A.shape[0]
    dt = A.dtype
    W = A.copy()
    perm = np.arange(n)
    L = np.zeros((n, n), dtype=dt)
    scale = np.max(np.abs(np.diag(A))) if n else 0
    rank = 0
    first = None
    for k in range(n):
        d = np.diag(W)[k:]
        if np.min(d) < -rel_tol * scale:
            raise NotPSDError(f"negative pivot {np.min(d):.3e} at step {k}")
        j = k + int(np.argmax(d))
        piv = W[j, j]
        if first is None:
            if piv <= 0:
                break
            first = piv
        if piv <= rel_tol * first:
            break
        if j != k:
            W[[k, j], :] = W[[j, k], :]
            W[:, [k, j]] = W[:, [j, k]]
            L[[k, j], :] = L[[j, k], :]
            perm[[k, j]] = perm[[j, k]]
        lkk = np.sqrt(W[k, k])
        L[k, k] = lkk
        L[k + 1:, k] = W[k + 1:, k] / lkk
        W[k + 1:, k + 1:] -= np.outer(L[k + 1:, k], L[k + 1:, k])
        rank += 1
    return TruncatedCholesky(L[:, :rank].copy(), rank, perm)


def solve_lower(L, b):
    """Forward substitution with a square lower-triangular ``L``; ``b`` may be 2-D."""
    L = np.asarray(L)
    x = np.array(b, dtype=np.result_type(L, b, np.float64))
    for i in range(L.shape[0]):
        x[i] = (x[i] - L[i, :i] @ x[:i]) / L[i, i]
    return x


def solve_upper(U, b):
    """Back substitution with a square upper-triangular ``U``."""
    U = np.asarray(U)
    x = np.array(b, dtype=np.result_type(U, b, np.float64))
    for i in range(U.shape[0] - 1, -1, -1):
        x[i] = (x[i] - U[i, i + 1:] @ x[i + 1:]) / U[i, i]
    return x


def spd_solve(A, b) -> np.ndarray:
    """Solve ``A x = b`` for symmetric positive definite ``A`` by pivoted Cholesky.

    Raises ``TruncationRequiredError`` when ``A`` is numerically rank
    deficient; such systems should be reduced with ``cholesky_trunc`` first.
    """
    A = as_symmetric(A)
    n = A.shape[0]
    b = np.asarray(b, dtype=A.dtype)
    if b.shape[0] != n:
        raise DomainError("right-hand side does not match the matrix order")
    eps = np.finfo(A.dtype).eps
    L, rank, perm = cholesky_trunc(A, rel_tol=n * eps)
    if rank < n:
        raise TruncationRequiredError(f"matrix is numerically rank deficient (rank {rank} < {n})")
    y = solve_upper(L.T, solve_lower(L, b[perm]))
    x = np.empty_like(y)
    x[perm] = y
    return x
