"""Minimal gains of finite blocks in ℓ^1, ℓ^2 and ℓ^∞.

lower_bound_p is exact: Jacobi on the Gram matrix for p = 2, one linear program per
column for p = ∞ and one per sign pattern for p = 1. left_inverse_lower_bound is a
cheaper sound bound, and brute_lower_bound an independent upper estimate used to
cross-check both.
"""
import itertools
import logging
import math
from typing import Mapping, Optional, Tuple

import numpy as np

from stabilcert.config import Config
from stabilcert.exceptions import (
    InputError,
    InternalSolverError,
    PreconditionError,
    ResourceLimitError,
    UnsupportedMethodError,
)
from stabilcert.models import BlockBoundReport, BlockMatrix, BoundMethod, OperatorKind, OperatorSpec
from stabilcert.operators import dense_matrix
from stabilcert.utils.geometry import check_lattice_center, lp_norm
from stabilcert.utils.jacobi import smallest_gram_eigenpair
from stabilcert.utils.simplex import DenseSimplex

logger = logging.getLogger(__name__)

ARRANGEMENT_COMBINATION_LIMIT = 200_000
PATTERN_SEARCH_MAX_DIRECTIONS_DIM = 7


# ---------------------------------------------------------------------------
# Blocks
# ---------------------------------------------------------------------------

def block_matrix(spec: OperatorSpec, n, N: int) -> BlockMatrix:
    """χ_n^{2N} A χ_n^N: rows with |λ - n| < 2N, columns with |λ' - n| < N."""
    center = np.atleast_1d(np.asarray(n, dtype=float))
    if center.shape != (1,):
        raise InputError(f"Operator specs are one-dimensional, got center {n!r}")
    check_lattice_center(center, N)
    c = float(center[0])
    if spec.kind is OperatorKind.DENSE:
        row_coords = spec.rows.coordinates()
        col_coords = spec.cols.coordinates()
        rows = row_coords[np.abs(row_coords - c) < 2 * N]
        cols = col_coords[np.abs(col_coords - c) < N]
    else:
        rows = np.arange(c - 2 * N + 1, c + 2 * N, dtype=float)
        cols = np.arange(c - N + 1, c + N, dtype=float)
    entries = dense_matrix(spec, rows, cols)
    return BlockMatrix(rows=rows, cols=cols, entries=entries, center=c, half_width=int(N))


def closed_block(coeffs: Mapping[int, object], N: int) -> BlockMatrix:
    """The closed block (a(j - j'))_{-N-k <= j <= N+k, -N <= j' <= N} of a band Toeplitz matrix.

    Integer coefficients give an integer array so products with it stay exact.
    """
    if N < 1:
        raise InputError(f"N must be a positive integer, got {N!r}")
    spec = OperatorSpec.toeplitz(coeffs)
    k = int(spec.support_radius)
    rows = np.arange(-N - k, N + k + 1, dtype=float)
    cols = np.arange(-N, N + 1, dtype=float)
    entries = dense_matrix(spec, rows, cols)
    if not np.iscomplexobj(entries) and np.all(entries == np.round(entries)):
        entries = entries.astype(np.int64)
    return BlockMatrix(rows=rows, cols=cols, entries=entries, center=0.0, half_width=int(N))


def difference_left_inverse(N: int) -> np.ndarray:
    """Integer left inverse of the closed difference block for a(0) = 1, a(-1) = -1.

    Columns follow the block rows -N-1..N+1; row i recovers c(-N + i). Every row and
    every column has at most N + 1 entries of modulus one.
    """
    if N < 1:
        raise InputError(f"N must be a positive integer, got {N!r}")
    B = np.zeros((2 * N + 1, 2 * N + 3), dtype=np.int64)
    for i in range(N + 1):
        B[i, : i + 1] = -1
    for j in range(1, N + 1):
        B[N + j, j + N + 1: 2 * N + 2] = 1
    return B


# ---------------------------------------------------------------------------
# Exact minimal gains
# ---------------------------------------------------------------------------

def _prepare(M: BlockMatrix) -> np.ndarray:
    if M.is_vacuous:
        raise PreconditionError("Block has no columns")
    return M.nonzero_rows().entries


def _require_real(M: BlockMatrix, p: float):
    if not M.is_real:
        raise UnsupportedMethodError(f"No exact method for complex blocks at p={p}; use p=2 or the brute estimate")


def _svd_bound(M: BlockMatrix) -> BlockBoundReport:
    A = _prepare(M)
    if A.shape[0] == 0:
        return BlockBoundReport(M.center, M.half_width, 2.0, 0.0, BoundMethod.SVD, np.eye(M.shape[1])[:, 0])
    eigenvalue, vector = smallest_gram_eigenpair(A)
    return BlockBoundReport(M.center, M.half_width, 2.0, math.sqrt(max(eigenvalue, 0.0)), BoundMethod.SVD, vector)


def _lp_inf_bound(M: BlockMatrix) -> BlockBoundReport:
    _require_real(M, math.inf)
    A = M.nonzero_rows().real_entries()
    rows, cols = A.shape
    if rows == 0:
        return BlockBoundReport(M.center, M.half_width, math.inf, 0.0, BoundMethod.LP_INF, np.eye(cols)[:, 0])
    solver = DenseSimplex()
    # c_t = 1 is fixed; v = c_{-t} + 1 in [0, 2]^(cols-1) and w = S - s with
    # S = ||A (e_t - 1_{-t})||_∞, so v = 0, w = 0 is feasible; maximize w
    objective = np.zeros(cols)
    objective[-1] = -1.0
    lift = np.ones((rows, 1))
    box = np.hstack([np.eye(cols - 1), np.zeros((cols - 1, 1))])
    best_value, best_witness = math.inf, None
    for t in range(cols):
        others = np.delete(A, t, axis=1)
        shift = A[:, t] - others.sum(axis=1)
        S = float(np.abs(shift).max())
        A_ub = np.vstack([np.hstack([others, lift]), np.hstack([-others, lift]), box])
        b_ub = np.concatenate([S - shift, S + shift, 2.0 * np.ones(cols - 1)])
        result = solver.solve(objective, A_ub, b_ub)
        if not result.is_optimal:
            raise InternalSolverError(f"ℓ∞ program for column {t} ended with status {result.status}")
        value = S + result.objective
        if value < best_value:
            best_value = value
            best_witness = np.insert(result.x[:-1] - 1.0, t, 1.0)
    return BlockBoundReport(M.center, M.half_width, math.inf, max(best_value, 0.0), BoundMethod.LP_INF, best_witness)


def _lp_one_bound(M: BlockMatrix) -> BlockBoundReport:
    _require_real(M, 1)
    A = M.nonzero_rows().real_entries()
    rows, cols = A.shape
    if cols > Config.P1_COLUMN_CAP:
        raise ResourceLimitError(
            f"ℓ1 sign-pattern enumeration is capped at {Config.P1_COLUMN_CAP} columns, block has {cols}"
        )
    if rows == 0:
        return BlockBoundReport(M.center, M.half_width, 1.0, 0.0, BoundMethod.LP_ONE, np.eye(cols)[:, 0])
    solver = DenseSimplex()
    # variables: y = σ∘c >= 0 with sum 1, then u >= |A c|; minimize sum u
    objective = np.concatenate([np.zeros(cols), np.ones(rows)])
    A_eq = np.concatenate([np.ones(cols), np.zeros(rows)])[None, :]
    b_ub = np.zeros(2 * rows)
    best_value, best_witness = math.inf, None
    for tail in itertools.product((1.0, -1.0), repeat=cols - 1):
        sigma = np.array((1.0,) + tail)
        AS = A * sigma[None, :]
        A_ub = np.vstack([np.hstack([AS, -np.eye(rows)]), np.hstack([-AS, -np.eye(rows)])])
        result = solver.solve(objective, A_ub, b_ub, A_eq, np.array([1.0]))
        if not result.is_optimal:
            raise InternalSolverError(f"ℓ1 program for pattern {sigma.tolist()} ended with status {result.status}")
        if result.objective < best_value:
            best_value = result.objective
            best_witness = sigma * result.x[:cols]
    return BlockBoundReport(M.center, M.half_width, 1.0, max(best_value, 0.0), BoundMethod.LP_ONE, best_witness)


def lower_bound_p(M: BlockMatrix, p: float) -> BlockBoundReport:
    """Exact min over c != 0 of ||M c||_p / ||c||_p for p in {1, 2, ∞}."""
    if M.is_vacuous:
        raise PreconditionError("Block has no columns")
    if p == 2:
        report = _svd_bound(M)
    elif math.isinf(p):
        report = _lp_inf_bound(M)
    elif p == 1:
        report = _lp_one_bound(M)
    else:
        raise UnsupportedMethodError(f"Exact block bounds exist for p in {{1, 2, inf}}, got p={p}")
    logger.debug(f"Block at n={M.center}, N={M.half_width}: {report.method.value} bound {report.lower_bound:.6g}")
    return report


# ---------------------------------------------------------------------------
# Row-subset bound
# ---------------------------------------------------------------------------

def _deletion_sets(m: int, e: int, budget: int):
    if math.comb(m, e) <= budget:
        yield from itertools.combinations(range(m), e)
        return
    seen = set()
    for top in range(e + 1):
        deletion = tuple(range(top)) + tuple(range(m - (e - top), m))
        seen.add(deletion)
        yield deletion
    for deletion in itertools.islice(itertools.combinations(range(m), e), budget):
        if deletion not in seen:
            yield deletion


def left_inverse_lower_bound(M: BlockMatrix, p: float) -> BlockBoundReport:
    """max over square row selections S of 1 / ||M_S^{-1}||_p.

    Every selection gives ||M c||_p >= ||M_S c||_p >= ||c||_p / ||M_S^{-1}||_p.
    """
    if math.isinf(p):
        order = np.inf
    elif p in (1, 2):
        order = int(p)
    else:
        raise UnsupportedMethodError(f"Row-subset bounds exist for p in {{1, 2, inf}}, got p={p}")
    A = _prepare(M)
    m, n = A.shape
    best = 0.0
    if m >= n:
        identity = np.eye(n)
        for deletion in _deletion_sets(m, m - n, Config.ROW_SUBSET_COMBINATIONS):
            keep = np.setdiff1d(np.arange(m), deletion, assume_unique=True)
            try:
                inverse = np.linalg.solve(A[keep, :], identity)
            except np.linalg.LinAlgError:
                continue
            norm = np.linalg.norm(inverse, order)
            if math.isfinite(norm) and norm > 0:
                best = max(best, 1.0 / norm)
    return BlockBoundReport(M.center, M.half_width, p, best, BoundMethod.LEFT_INVERSE)


def certified_lower_bound(M: BlockMatrix, p: float) -> BlockBoundReport:
    """The bound used by sweeps: exact methods, except ℓ1 blocks beyond the pattern budget."""
    if p == 1 and 2 ** (M.shape[1] - 1) > Config.P1_PATTERN_BUDGET:
        _require_real(M, 1)
        logger.warning(
            f"ℓ1 block with {M.shape[1]} columns exceeds the pattern budget "
            f"{Config.P1_PATTERN_BUDGET}; using the row-subset bound"
        )
        return left_inverse_lower_bound(M, 1)
    return lower_bound_p(M, p)


# ---------------------------------------------------------------------------
# Brute-force estimate
# ---------------------------------------------------------------------------

def _gains(A: np.ndarray, C: np.ndarray, p: float) -> np.ndarray:
    """||A c||_p / ||c||_p for every row c of C."""
    images = np.abs(C @ A.T)
    C = np.abs(C)
    if math.isinf(p):
        return images.max(axis=1) / C.max(axis=1)
    return (np.sum(images ** p, axis=1) / np.sum(C ** p, axis=1)) ** (1.0 / p)


def _arrangement_rays(A: np.ndarray, p: float) -> Optional[np.ndarray]:
    """Extreme rays of the cones on which the gain is a ratio of linear forms (p in {1, ∞})."""
    m, n = A.shape
    normals = [A, np.eye(n)]
    if math.isinf(p):
        for X in (A, np.eye(n)):
            for i, l in itertools.combinations(range(X.shape[0]), 2):
                normals.append(np.vstack([X[i] - X[l], X[i] + X[l]]))
    H = np.vstack(normals)
    lengths = np.linalg.norm(H, axis=1)
    H = H[lengths > 0] / lengths[lengths > 0, None]
    if n < 2 or math.comb(H.shape[0], n - 1) > ARRANGEMENT_COMBINATION_LIMIT:
        return None
    combos = np.array(list(itertools.combinations(range(H.shape[0]), n - 1)), dtype=np.int64)
    rays = []
    for start in range(0, combos.shape[0], 20_000):
        stack = H[combos[start:start + 20_000]]
        # null vector of each (n-1) x n system by cofactor expansion
        V = np.stack([(-1) ** j * np.linalg.det(np.delete(stack, j, axis=2)) for j in range(n)], axis=1)
        rays.append(V[np.linalg.norm(V, axis=1) > 1e-10])
    return np.vstack(rays) if rays else None


def _pattern_search(A: np.ndarray, p: float, start: np.ndarray, value: float, step: float) -> Tuple[float, np.ndarray]:
    n = start.size
    t = int(np.argmax(np.abs(start)))
    x = start / start[t]
    free = [j for j in range(n) if j != t]
    if len(free) <= PATTERN_SEARCH_MAX_DIRECTIONS_DIM:
        D = np.array([d for d in itertools.product((-1.0, 0.0, 1.0), repeat=len(free)) if any(d)])
    else:
        D = np.vstack([np.eye(len(free)), -np.eye(len(free))])
    for _ in range(10_000):
        if step < 1e-12:
            break
        trial = np.repeat(x[None, :], D.shape[0], axis=0)
        trial[:, free] += step * D
        gains = _gains(A, trial, p)
        best = int(np.argmin(gains))
        if gains[best] < value:
            value = float(gains[best])
            x = trial[best]
        else:
            step *= 0.5
    return value, x


def brute_report(M: BlockMatrix, p: float, samples: int = 20_000) -> BlockBoundReport:
    """Smallest gain found on a mesh of the ℓ∞ sphere refined by pattern search.

    Every evaluated point is a genuine vector, so the result is an upper bound on the
    minimal gain and the witness attains it. For p in {1, ∞} the extreme rays of the
    linearity cones are added, which makes the estimate exact up to round-off when
    they can be enumerated.
    """
    if not p >= 1:
        raise InputError(f"Exponent must satisfy p >= 1, got {p!r}")
    if M.is_vacuous:
        raise PreconditionError("Block has no columns")
    A = M.entries
    n = A.shape[1]
    if n == 1:
        return BlockBoundReport(M.center, M.half_width, p, lp_norm(A[:, 0], p), BoundMethod.BRUTE, np.ones(1))

    per_axis = max(2, int((samples / n) ** (1.0 / (n - 1))))
    grid = np.array(list(itertools.product(np.linspace(-1.0, 1.0, per_axis), repeat=n - 1)))
    faces = []
    for t in range(n):
        face = np.insert(grid, t, 1.0, axis=1)
        faces.append(face)
    candidates = np.vstack(faces)
    if (p == 1 or math.isinf(p)) and M.is_real:
        rays = _arrangement_rays(M.real_entries(), p)
        if rays is not None and rays.size:
            candidates = np.vstack([candidates, rays])
    gains = _gains(A, candidates, p)
    order = np.argsort(gains)[:5]
    best, witness = float(gains[order[0]]), candidates[order[0]]
    step = 2.0 / (per_axis - 1)
    for idx in order:
        value, x = _pattern_search(A, p, candidates[idx], float(gains[idx]), step)
        if value < best:
            best, witness = value, x
    witness = witness / np.abs(witness).max()
    logger.debug(f"Brute estimate at n={M.center}, p={p}: {best:.6g}")
    return BlockBoundReport(M.center, M.half_width, p, best, BoundMethod.BRUTE, witness)


def brute_lower_bound(M: BlockMatrix, p: float, samples: int = 20_000) -> float:
    """The value of brute_report."""
    return brute_report(M, p, samples).lower_bound
