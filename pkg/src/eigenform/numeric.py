"""Dense complex linear-algebra kernel.

Thin, contract-checked wrappers around LAPACK (through numpy/scipy). Every
other module goes through these functions so tolerances live in one place.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import NoConvergence, Singular

EPS = np.finfo(float).eps


def as_cmatrix(M) -> np.ndarray:
    M = np.atleast_2d(np.asarray(M, dtype=complex))
    if M.ndim != 2:
        raise ValueError(f"expected a matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    return M


def as_cvector(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex).reshape(-1)
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite entries")
    return v


def max_abs(M) -> float:
    M = np.asarray(M)
    return float(np.max(np.abs(M))) if M.size else 0.0


def solve(M, rhs) -> np.ndarray:
    """Solve ``M X = rhs`` for square ``M``.

    Raises :class:`Singular` when the LU-based reciprocal condition estimate
    says ``M`` is rank deficient at the default rank tolerance, or when the
    residual bound ``|MX - rhs|_max <= 1e-10 (1 + |M|_max |X|_max)`` fails.
    """
    M = as_cmatrix(M)
    rhs = np.asarray(rhs, dtype=complex)
    vector_rhs = rhs.ndim == 1
    R = rhs.reshape(M.shape[0], -1) if vector_rhs else rhs
    n = M.shape[0]
    if M.shape[1] != n:
        raise ValueError(f"solve needs a square matrix, got {M.shape}")
    if R.shape[0] != n:
        raise ValueError(f"rhs has {R.shape[0]} rows, matrix has {n}")
    if n == 0:
        return rhs.copy()

    lu, piv, info = sla.lapack.zgetrf(M)
    if info > 0:
        raise Singular(f"exactly singular pivot at position {info}")
    anorm = float(np.linalg.norm(M, 1))
    rcond, info = sla.lapack.zgecon(lu, anorm, norm="1")
    if anorm == 0.0 or rcond < n * EPS:
        raise Singular(f"matrix is numerically singular (rcond={rcond:.2e})")
    X, info = sla.lapack.zgetrs(lu, piv, R)

    bound = 1e-10 * (1.0 + max_abs(M) * max_abs(X))
    if max_abs(M @ X - R) > bound:
        raise Singular("residual bound violated; matrix too ill-conditioned")
    return X.reshape(-1) if vector_rhs else X


def inv(M) -> np.ndarray:
    M = as_cmatrix(M)
    return solve(M, np.eye(M.shape[0], dtype=complex))


def pinv_solve(M, rhs) -> tuple[np.ndarray, float]:
    """Minimum-norm least-squares solution of ``M x = rhs``.

    Returns ``(x, residual_norm)``; never raises for well-formed input.
    """
    M = as_cmatrix(M)
    rhs = as_cvector(rhs)
    if rhs.shape[0] != M.shape[0]:
        raise ValueError(f"rhs has {rhs.shape[0]} entries, matrix has {M.shape[0]} rows")
    x, *_ = np.linalg.lstsq(M, rhs, rcond=None)
    return x, float(np.linalg.norm(M @ x - rhs))


@dataclass(frozen=True)
class EigReport:
    eigenvalues: np.ndarray
    right_eigenvectors: np.ndarray
    residual: float

    def __len__(self):
        return len(self.eigenvalues)


def sort_order(values) -> np.ndarray:
    """Indices ordering ``values`` by descending real, then imaginary, part."""
    values = np.asarray(values)
    return np.lexsort((-values.imag, -values.real))


REFINE_RTOL = 1e-10


def _inverse_iteration(M, lam, v, steps: int = 3) -> np.ndarray:
    """Polish an eigenvector whose LAPACK residual is poor.

    geev occasionally returns inaccurate vectors for reducible matrices with
    exact zero rows even when the eigenproblem is well conditioned.
    """
    n = M.shape[0]
    shift = lam + 1e-10 * max(1.0, max_abs(M))
    lu = sla.lu_factor(M - shift * np.eye(n))
    x = v + np.ones(n) / np.sqrt(n)
    for _ in range(steps):
        x = sla.lu_solve(lu, x)
        x = x / np.linalg.norm(x)
    return x


def eig(M) -> EigReport:
    """Eigen-decomposition with sorted output and a residual certificate.

    Eigenvalues are ordered by descending real part, ties broken by
    descending imaginary part. Eigenvector columns have unit 2-norm.
    """
    M = as_cmatrix(M)
    if M.shape[0] != M.shape[1]:
        raise ValueError(f"eig needs a square matrix, got {M.shape}")
    try:
        w, V = np.linalg.eig(M)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc
    order = sort_order(w)
    w, V = w[order], V[:, order]
    norms = np.linalg.norm(V, axis=0)
    norms[norms == 0] = 1.0
    V = V / norms
    res = np.linalg.norm(M @ V - V * w, axis=0)
    bad = np.flatnonzero(res > REFINE_RTOL * max(1.0, max_abs(M)))
    for k in bad:
        V[:, k] = _inverse_iteration(M, w[k], V[:, k])
    if bad.size:
        res = np.linalg.norm(M @ V - V * w, axis=0)
    residual = float(np.max(res)) if w.size else 0.0
    return EigReport(eigenvalues=w, right_eigenvectors=V, residual=residual)


def singular_values(M) -> np.ndarray:
    M = as_cmatrix(M)
    return np.linalg.svd(M, compute_uv=False)


def rank(M, tol: float = 0.0) -> int:
    """Numerical rank; ``tol=0`` selects the default cutoff."""
    M = as_cmatrix(M)
    s = np.linalg.svd(M, compute_uv=False)
    if not s.size:
        return 0
    cutoff = tol if tol > 0 else float(s[0]) * max(M.shape) * EPS
    return int(np.sum(s > cutoff))


def nullspace(M, tol: float = 0.0) -> np.ndarray:
    """Orthonormal basis of Ker M, one vector per column."""
    M = as_cmatrix(M)
    s = np.linalg.svd(M, compute_uv=False)
    if not s.size or s[0] == 0.0:
        return np.eye(M.shape[1], dtype=complex)
    rcond = tol / s[0] if tol > 0 else max(M.shape) * EPS
    return sla.null_space(M, rcond=rcond)


def cond(M) -> float:
    s = singular_values(M)
    if not s.size:
        return 1.0
    return float(np.inf) if s[-1] == 0 else float(s[0] / s[-1])
