import logging
from typing import Tuple

import numpy as np

from stabilcert.config import Config

logger = logging.getLogger(__name__)

_EPS = np.finfo(float).eps
# below this |a_pq| / |a_qq - a_pp| the rotation angle is a_pq / (a_qq - a_pp) to working precision
_SMALL_ROTATION = 1e-100


def _off_diagonal_mass(S: np.ndarray) -> float:
    return float(np.sqrt(max(np.sum(S * S) - np.sum(np.diag(S) ** 2), 0.0)))


def jacobi_eigh(S: np.ndarray, tol: float = None, max_sweeps: int = None) -> Tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a real symmetric matrix by cyclic Jacobi rotations.

    Sweeps over every (p, q) pair until the off-diagonal Frobenius mass drops below
    `tol` times max(1, ||S||_F). Returns ascending eigenvalues and the matching
    orthonormal eigenvectors as columns.
    """
    tol = Config.JACOBI_TOLERANCE if tol is None else tol
    max_sweeps = Config.JACOBI_MAX_SWEEPS if max_sweeps is None else max_sweeps
    A = np.array(S, dtype=float, copy=True)
    n = A.shape[0]
    V = np.eye(n)
    if n == 0:
        return np.zeros(0), V
    A = 0.5 * (A + A.T)
    target = tol * max(1.0, float(np.linalg.norm(A)))

    for sweep in range(max_sweeps):
        if _off_diagonal_mass(A) < target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= _EPS * np.sqrt(abs(A[p, p] * A[q, q])):
                    A[p, q] = A[q, p] = 0.0
                    continue
                diff = A[q, q] - A[p, p]
                if abs(apq) < _SMALL_ROTATION * abs(diff):
                    t = apq / diff
                else:
                    tau = diff / (2.0 * apq)
                    t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c

                col_p = A[:, p].copy()
                col_q = A[:, q].copy()
                A[:, p] = c * col_p - s * col_q
                A[:, q] = s * col_p + c * col_q
                row_p = A[p, :].copy()
                row_q = A[q, :].copy()
                A[p, :] = c * row_p - s * row_q
                A[q, :] = s * row_p + c * row_q
                A[p, q] = A[q, p] = 0.0

                vec_p = V[:, p].copy()
                V[:, p] = c * vec_p - s * V[:, q]
                V[:, q] = s * vec_p + c * V[:, q]
    else:
        logger.warning(f"Jacobi stopped after {max_sweeps} sweeps with off-diagonal mass {_off_diagonal_mass(A):.3e}")

    eigenvalues = np.diag(A).copy()
    order = np.argsort(eigenvalues, kind="stable")
    return eigenvalues[order], V[:, order]


def smallest_gram_eigenpair(M: np.ndarray) -> Tuple[float, np.ndarray]:
    """Smallest eigenvalue of M^H M and a unit eigenvector.

    Complex Gram matrices X + iY are handled through the real symmetric embedding
    [[X, -Y], [Y, X]], whose spectrum is that of the Hermitian matrix with every
    eigenvalue doubled.
    """
    M = np.asarray(M)
    G = M.conj().T @ M
    if not np.iscomplexobj(G) or not np.any(G.imag):
        values, vectors = jacobi_eigh(np.real(G))
        return float(values[0]), vectors[:, 0]
    n = G.shape[0]
    X, Y = G.real, G.imag
    values, vectors = jacobi_eigh(np.block([[X, -Y], [Y, X]]))
    v = vectors[:n, 0] + 1j * vectors[n:, 0]
    return float(values[0]), v / np.linalg.norm(v)
