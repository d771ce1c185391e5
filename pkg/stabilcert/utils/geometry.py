"""Point-set geometry of relatively-separated index sets, windows and cut-off multipliers."""
import itertools
import logging
import math
from typing import Sequence, Union

import numpy as np

from stabilcert.exceptions import InputError
from stabilcert.models import IndexSet

logger = logging.getLogger(__name__)


def _as_index_set(points: Union[IndexSet, Sequence], dim=None) -> IndexSet:
    if isinstance(points, IndexSet):
        return points
    return IndexSet.from_points(points, dim)


def _as_point(point, dim: int) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(point, dtype=float))
    if arr.shape != (dim,):
        raise InputError(f"Point {point!r} does not have dimension {dim}")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"Non-finite coordinate in point {point!r}")
    return arr


def check_lattice_center(n: np.ndarray, N: int):
    if N < 1 or int(N) != N:
        raise InputError(f"Scale N must be a positive integer, got {N!r}")
    if not np.all(np.mod(n, N) == 0):
        raise InputError(f"Center {n.tolist()} is not in {N}·Z^d")


def lp_norm(values: np.ndarray, p: float) -> float:
    values = np.abs(np.asarray(values))
    if values.size == 0:
        return 0.0
    if math.isinf(p):
        return float(values.max())
    if p == 1:
        return float(values.sum())
    if p == 2:
        return float(np.sqrt(np.sum(values ** 2)))
    return float(np.sum(values ** p) ** (1.0 / p))


def relative_separation(points: Union[IndexSet, Sequence], dim: int = None) -> int:
    """R(Λ): the largest number of points inside one half-open unit box x + [-1/2, 1/2)^d.

    The count is piecewise constant in x, so it suffices to anchor the lower corner
    of the box [a, a+1)^d at point coordinates.
    """
    index_set = _as_index_set(points, dim)
    if len(index_set) == 0:
        return 0
    X = index_set.as_array()
    # inside[a, i]: point i lies in [anchor_a, anchor_a + 1) along that axis
    per_axis = []
    for axis in range(index_set.dim):
        coords = X[:, axis]
        per_axis.append((coords[None, :] >= coords[:, None]) & (coords[None, :] < coords[:, None] + 1.0))
    if index_set.dim == 1:
        counts = per_axis[0].sum(axis=1)
    else:
        counts = per_axis[0].astype(np.int64) @ per_axis[1].astype(np.int64).T
    return int(counts.max())


def psi0_weights(X: np.ndarray) -> np.ndarray:
    """ψ0 evaluated row-wise on an (n, d) array."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    ramps = np.clip(np.minimum(2.0 - 2.0 * np.abs(X), 1.0), 0.0, None)
    return np.prod(ramps, axis=1)


def cutoff_psi0(x) -> float:
    """ψ0(x) = prod_i max(min(2 - 2|x_i|, 1), 0)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if not np.all(np.isfinite(x)):
        raise InputError(f"Non-finite argument {x.tolist()}")
    return float(psi0_weights(x[None, :])[0])


def window_mask(index_set: IndexSet, values, y, N: int) -> np.ndarray:
    """χ_y^N: keep entries with ||λ - y||_∞ < N (open box), zero the rest."""
    values = np.asarray(values)
    center = _as_point(y, index_set.dim)
    if len(index_set) == 0:
        return values.copy()
    inside = np.max(np.abs(index_set.as_array() - center), axis=1) < N
    return np.where(inside, values, 0)


def psi_multiply(index_set: IndexSet, values, n, N: int) -> np.ndarray:
    """Ψ_n^N: pointwise multiplication by ψ0((λ - n)/N), n in N·Z^d."""
    values = np.asarray(values)
    center = _as_point(n, index_set.dim)
    check_lattice_center(center, N)
    if len(index_set) == 0:
        return values.copy()
    return psi0_weights((index_set.as_array() - center) / N) * values


def lattice_centers(index_set: IndexSet, N: int, reach: float):
    """Centers n in N·Z^d whose open box of half-width `reach` can meet the index set."""
    if len(index_set) == 0:
        return []
    X = index_set.as_array()
    ranges = []
    for axis in range(index_set.dim):
        lo = math.floor((X[:, axis].min() - reach) / N)
        hi = math.ceil((X[:, axis].max() + reach) / N)
        ranges.append([N * t for t in range(lo, hi + 1)])
    return [np.array(center, dtype=float) for center in itertools.product(*ranges)]


def cutoff_partition_norm(index_set: IndexSet, values, N: int, p: float, widen: int = 1) -> float:
    """(Σ_{n ∈ N·Z^d} ||Ψ_n^{widen·N} c||_p^p)^{1/p}, or the supremum over n for p = ∞."""
    values = np.asarray(values)
    # centers stay on N·Z^d while the multiplier widens, so ψ0 is applied directly
    scale = widen * N
    pieces = [
        lp_norm(psi0_weights((index_set.as_array() - n) / scale) * values, p)
        for n in lattice_centers(index_set, N, scale)
    ]
    if not pieces:
        return 0.0
    if math.isinf(p):
        return max(pieces)
    return float(np.sum(np.array(pieces) ** p) ** (1.0 / p))
