"""Dense real-matrix primitives.

Everything downstream (Lyapunov solves, cost/gradient evaluation, the
optimizers) funnels through the handful of helpers here, so validation is
strict: non-finite entries are rejected at the door and symmetric inputs are
re-symmetrized explicitly.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidInput, SingularOperator

# Relative symmetry drift admitted before an input is rejected.
SYMMETRY_RTOL = 1e-12

# Reciprocal-condition floor of the vectorized Lyapunov operator; below this
# the closed loop is treated as non-stabilizing.
RCOND_FLOOR = 1e-14


def as_matrix(m, name: str = "matrix") -> np.ndarray:
    """Validate and copy an arbitrary 2-D real matrix."""
    a = np.array(m, dtype=float)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise InvalidInput(f"{name}: expected a 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidInput(f"{name}: non-finite entries")
    return a


def as_symmetric(s, name: str = "matrix") -> np.ndarray:
    """Validate a square matrix as symmetric and return its symmetrized copy."""
    a = as_matrix(s, name)
    if a.shape[0] != a.shape[1]:
        raise InvalidInput(f"{name}: expected square, got shape {a.shape}")
    scale = 1.0 + np.abs(a).max()
    if np.abs(a - a.T).max() > SYMMETRY_RTOL * scale:
        raise InvalidInput(f"{name}: not symmetric within tolerance")
    return 0.5 * (a + a.T)


def eig_sym(s) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a symmetric matrix.

    Returns (eigenvalues ascending, orthonormal eigenvectors as columns).
    """
    a = as_symmetric(s, "eig_sym input")
    w, v = np.linalg.eigh(a)
    return w, v


def min_eig(s) -> float:
    return float(eig_sym(s)[0][0])


def max_eig(s) -> float:
    return float(eig_sym(s)[0][-1])


def spectral_norm(m) -> float:
    return float(np.linalg.norm(as_matrix(m, "spectral_norm input"), 2))


def frobenius_norm(m) -> float:
    return float(np.linalg.norm(as_matrix(m, "frobenius_norm input"), "fro"))


def is_positive_definite(s, tol: float = 1e-9) -> bool:
    """True iff min eigenvalue exceeds tol scaled by the matrix magnitude."""
    if tol < 0:
        raise InvalidInput("is_positive_definite: tol must be >= 0")
    a = as_symmetric(s, "is_positive_definite input")
    return min_eig(a) > tol * (1.0 + np.abs(a).max())


def kron_vec_solve(f, g, rhs) -> np.ndarray:
    """Solve F^T X + X F + G^T X G + rhs = 0 for symmetric X.

    The equation is vectorized column-major into the dense n^2 x n^2 system
    (I (x) F^T + F^T (x) I + G^T (x) G^T) vec(X) = -vec(rhs) and solved by LU.
    Raises SingularOperator when the operator's reciprocal condition estimate
    falls below RCOND_FLOOR.
    """
    f = as_matrix(f, "kron_vec_solve F")
    g = as_matrix(g, "kron_vec_solve G")
    rhs = as_symmetric(rhs, "kron_vec_solve rhs")
    n = rhs.shape[0]
    if f.shape != (n, n) or g.shape != (n, n):
        raise InvalidInput("kron_vec_solve: F, G, rhs orders disagree")

    eye = np.eye(n)
    op = np.kron(eye, f.T) + np.kron(f.T, eye) + np.kron(g.T, g.T)
    # SVD-based condition estimate; operators here are tiny (n <= ~100).
    sv = np.linalg.svd(op, compute_uv=False)
    if sv[0] == 0.0 or sv[-1] / sv[0] < RCOND_FLOOR:
        raise SingularOperator(
            "vectorized Lyapunov operator numerically singular "
            f"(rcond ~ {0.0 if sv[0] == 0 else sv[-1] / sv[0]:.2e})"
        )
    x = np.linalg.solve(op, -rhs.flatten(order="F")).reshape((n, n), order="F")
    x = 0.5 * (x + x.T)

    residual = f.T @ x + x @ f + g.T @ x @ g + rhs
    if np.linalg.norm(residual, "fro") > 1e-9 * (1.0 + np.linalg.norm(rhs, "fro")):
        raise SingularOperator("Lyapunov residual above tolerance after solve")
    return x
