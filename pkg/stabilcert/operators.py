"""Convolution-dominated matrices: entries, C-norms, truncation and application to vectors."""
import logging
import math
from typing import Callable, Dict, List, Sequence, Tuple, Union

import numpy as np

from stabilcert.exceptions import DomainError, InputError
from stabilcert.models import (
    DiagonalProfile,
    IndexSet,
    OperatorKind,
    OperatorSpec,
    Scalar,
    TradeoffResult,
    normalize_scalar,
)
from stabilcert.utils.geometry import check_lattice_center, psi0_weights

logger = logging.getLogger(__name__)

# exp(-2 pi i t / 4) for t = 0..3
_QUARTER_TURNS = np.array([1.0, -1.0j, -1.0, 1.0j])

Coordinates = Union[IndexSet, Sequence, np.ndarray]


# ---------------------------------------------------------------------------
# Coordinates and entry rules
# ---------------------------------------------------------------------------

def _coords(points: Coordinates) -> np.ndarray:
    if isinstance(points, IndexSet):
        return points.coordinates()
    arr = np.asarray(points, dtype=float)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1:
        raise InputError("Operator specs act on one-dimensional index sets")
    if not np.all(np.isfinite(arr)):
        raise InputError("Non-finite coordinate in index list")
    return arr


def _lattice_coords(coords: np.ndarray) -> np.ndarray:
    if not np.all(coords == np.round(coords)):
        raise DomainError(f"Lattice operators are indexed by integers, got {coords[coords != np.round(coords)][:3].tolist()}")
    return coords.astype(np.int64)


def _scalar_coordinate(point) -> float:
    arr = np.atleast_1d(np.asarray(point, dtype=float))
    if arr.shape != (1,):
        raise InputError(f"Operator specs are one-dimensional, got point {point!r}")
    if not math.isfinite(arr[0]):
        raise InputError(f"Non-finite coordinate {point!r}")
    return float(arr[0])


def twist_phase(theta, cols: np.ndarray, k: int) -> np.ndarray:
    """exp(-2 pi i theta j' k) for integer columns j', reduced exactly modulo the period."""
    r, q = theta.numerator, theta.denominator
    m = (r * k * np.asarray(cols, dtype=np.int64)) % q
    phase = np.exp(-2.0j * np.pi * m / q)
    quarter = (4 * m) % q == 0
    phase[quarter] = _QUARTER_TURNS[((4 * m[quarter]) // q) % 4]
    return phase


def _maybe_real(M: np.ndarray) -> np.ndarray:
    if np.iscomplexobj(M) and not np.any(M.imag):
        return M.real.copy()
    return M


def _declared_positions(index_set: IndexSet) -> Dict[float, int]:
    return {point[0]: pos for pos, point in enumerate(index_set.points)}


def _declared_matrix(spec: OperatorSpec) -> np.ndarray:
    complex_entries = any(isinstance(v, complex) for _, _, v in spec.entries)
    W = np.zeros((len(spec.rows), len(spec.cols)), dtype=complex if complex_entries else float)
    for i, j, v in spec.entries:
        W[i, j] = v
    return W


def dense_matrix(spec: OperatorSpec, rows: Coordinates, cols: Coordinates) -> np.ndarray:
    """The section (a(λ, λ'))_{λ in rows, λ' in cols} as a dense array.

    For DenseWindow specs, rows outside the declared row set are zero; columns must be
    declared since the operator is not defined on other points.
    """
    row_coords, col_coords = _coords(rows), _coords(cols)
    if spec.kind is OperatorKind.DENSE:
        row_pos = _declared_positions(spec.rows)
        col_pos = _declared_positions(spec.cols)
        missing = [x for x in col_coords if x not in col_pos]
        if missing:
            raise DomainError(f"Columns {missing[:3]} are outside the declared column set")
        W = _declared_matrix(spec)
        M = np.zeros((len(row_coords), len(col_coords)), dtype=W.dtype)
        cidx = np.array([col_pos[x] for x in col_coords], dtype=np.int64)
        for out, x in enumerate(row_coords):
            if x in row_pos:
                M[out, :] = W[row_pos[x], cidx]
        return M

    J, Jp = _lattice_coords(row_coords), _lattice_coords(col_coords)
    K = J[:, None] - Jp[None, :]
    M = np.zeros(K.shape, dtype=complex)
    for k, a_k in spec.nonzero_coeffs.items():
        mask = K == k
        if not mask.any():
            continue
        if spec.kind is OperatorKind.TWISTED:
            M += np.where(mask, a_k * twist_phase(spec.theta, Jp, k)[None, :], 0)
        else:
            M[mask] = a_k
    if spec.kind is OperatorKind.PERIODIC:
        weights = np.array(spec.weights, dtype=complex)
        M *= weights[Jp % spec.period][None, :]
    return _maybe_real(M)


def entry_at(spec: OperatorSpec, row, col) -> Scalar:
    """a(λ, λ') by the entry rule of the spec's kind."""
    x, y = _scalar_coordinate(row), _scalar_coordinate(col)
    if spec.kind is OperatorKind.DENSE:
        i, j = spec.rows.position(x), spec.cols.position(y)
        if i is None or j is None:
            raise DomainError(f"({x}, {y}) is outside the declared index sets")
        for ei, ej, v in spec.entries:
            if ei == i and ej == j:
                return v
        return 0.0
    return normalize_scalar(dense_matrix(spec, [x], [y])[0, 0])


# ---------------------------------------------------------------------------
# Diagonals and norms
# ---------------------------------------------------------------------------

def offset_bucket(delta):
    """Unit bucket k with delta in k + [-1/2, 1/2]; boundary offsets go to the smaller k."""
    return np.ceil(np.asarray(delta, dtype=float) - 0.5).astype(np.int64)


def _offset_sups(spec: OperatorSpec) -> List[Tuple[float, float]]:
    """(offset, sup |a| along that exact offset) for every nonzero diagonal."""
    if spec.is_lattice:
        scale = max((abs(w) for w in spec.weights), default=1.0) if spec.kind is OperatorKind.PERIODIC else 1.0
        return [(float(k), abs(v) * scale) for k, v in spec.nonzero_coeffs.items() if abs(v) * scale > 0]
    rows, cols = spec.rows.coordinates(), spec.cols.coordinates()
    sups: Dict[float, float] = {}
    for i, j, v in spec.entries:
        if v != 0:
            delta = float(rows[i] - cols[j])
            sups[delta] = max(sups.get(delta, 0.0), abs(v))
    return sorted(sups.items())


def _bucketed_norm(sups: List[Tuple[float, float]], keep: Callable[[float], bool], gamma: float = 0.0) -> float:
    buckets: Dict[int, float] = {}
    for delta, value in sups:
        if keep(delta):
            k = int(offset_bucket(delta))
            buckets[k] = max(buckets.get(k, 0.0), value)
    return math.fsum((1.0 + abs(k)) ** gamma * v for k, v in buckets.items())


def diagonal_profile(spec: OperatorSpec) -> DiagonalProfile:
    values: Dict[int, float] = {}
    for delta, value in _offset_sups(spec):
        k = int(offset_bucket(delta))
        values[k] = max(values.get(k, 0.0), value)
    return DiagonalProfile(values=values)


def c_norm(spec: OperatorSpec) -> float:
    """||A||_C, the sum of the diagonal suprema."""
    return diagonal_profile(spec).total()


def c_gamma_norm(spec: OperatorSpec, gamma: float) -> float:
    if not (gamma > 0 and math.isfinite(gamma)):
        raise InputError(f"The decay weight needs gamma > 0, got {gamma!r}")
    return _bucketed_norm(_offset_sups(spec), lambda delta: True, gamma)


def matrix_cnorm(rows: Coordinates, cols: Coordinates, M: np.ndarray) -> float:
    """C-norm of a finite section given with its row and column coordinates."""
    row_coords, col_coords = _coords(rows), _coords(cols)
    M = np.abs(np.asarray(M))
    if M.size == 0:
        return 0.0
    K = offset_bucket(row_coords[:, None] - col_coords[None, :]).ravel()
    keys, inverse = np.unique(K, return_inverse=True)
    sups = np.zeros(keys.size)
    np.maximum.at(sups, inverse, M.ravel())
    return math.fsum(sups)


# ---------------------------------------------------------------------------
# Truncation
# ---------------------------------------------------------------------------

def truncate(spec: OperatorSpec, s: float) -> OperatorSpec:
    """A_s: keep the entries with |λ - λ'| < s."""
    if not (s >= 0):
        raise InputError(f"Truncation radius must be non-negative, got {s!r}")
    if spec.is_lattice:
        return OperatorSpec(
            spec.kind,
            coeffs={k: v for k, v in spec.coeffs.items() if abs(k) < s},
            theta=spec.theta,
            weights=spec.weights,
        )
    rows, cols = spec.rows.coordinates(), spec.cols.coordinates()
    entries = tuple((i, j, v) for i, j, v in spec.entries if abs(rows[i] - cols[j]) < s)
    return OperatorSpec(OperatorKind.DENSE, rows=spec.rows, cols=spec.cols, entries=entries)


def _breakpoints(sups: List[Tuple[float, float]], upper: float, include_upper: bool) -> List[float]:
    """Integers 0..upper together with every offset magnitude in range."""
    last = int(math.floor(upper))
    candidates = set(float(m) for m in range(0, last + 1))
    candidates.update(abs(delta) for delta, _ in sups if abs(delta) <= upper)
    if not include_upper:
        candidates.discard(float(upper))
    return sorted(candidates)


def truncation_tradeoff(spec: OperatorSpec, N: int, d: int = 1) -> TradeoffResult:
    """min over m of ||A - A_{<=m}||_C + (d m / N) ||A||_C, the right limits of the infimum over s in [0, N]."""
    if N < 1:
        raise InputError(f"N must be a positive integer, got {N!r}")
    sups = _offset_sups(spec)
    total = _bucketed_norm(sups, lambda delta: True)
    best = None
    for m in _breakpoints(sups, N, include_upper=True):
        tail = _bucketed_norm(sups, lambda delta: abs(delta) > m)
        value = tail + d * m / N * total
        if best is None or value < best.value:
            best = TradeoffResult(value=value, argmin=m)
    logger.debug(f"Truncation trade-off at N={N}: {best.value:.6g} (m={best.argmin})")
    return best


def decay_tradeoff_bound(spec: OperatorSpec, gamma: float, N: int, d: int = 1) -> float:
    """(d + 1) ||A||_{C_gamma} N^{-gamma/(1+gamma)}, an upper bound of the truncation trade-off."""
    if N < 1:
        raise InputError(f"N must be a positive integer, got {N!r}")
    return (d + 1) * c_gamma_norm(spec, gamma) * N ** (-gamma / (1.0 + gamma))


# ---------------------------------------------------------------------------
# Application and commutators
# ---------------------------------------------------------------------------

def apply_operator(spec: OperatorSpec, cols: Coordinates, values, rows: Coordinates) -> np.ndarray:
    """(A c)(λ) for λ in `rows`, where c is supported on `cols`."""
    values = np.asarray(values)
    col_coords = _coords(cols)
    if values.shape != (len(col_coords),):
        raise InputError(f"{values.shape[0] if values.ndim else 0} values given for {len(col_coords)} columns")
    return dense_matrix(spec, rows, col_coords) @ values


def _commutator_window(spec: OperatorSpec, n: float, N: int) -> Tuple[np.ndarray, np.ndarray]:
    if spec.kind is OperatorKind.DENSE:
        return spec.rows.coordinates(), spec.cols.coordinates()
    # ψ0 differences vanish unless λ or λ' is within N of n, and a_N needs |λ - λ'| < N
    window = np.arange(int(n) - 2 * N + 1, int(n) + 2 * N, dtype=float)
    return window, window


def commutator_cnorm(spec: OperatorSpec, n, N: int) -> float:
    """||Ψ_n^N A_N - A_N Ψ_n^N||_C."""
    center = np.atleast_1d(np.asarray(n, dtype=float))
    if center.shape != (1,):
        raise InputError(f"Operator specs are one-dimensional, got center {n!r}")
    check_lattice_center(center, N)
    truncated = truncate(spec, N)
    rows, cols = _commutator_window(spec, center[0], N)
    A_N = dense_matrix(truncated, rows, cols)
    psi_rows = psi0_weights((rows - center[0]) / N)
    psi_cols = psi0_weights((cols - center[0]) / N)
    return matrix_cnorm(rows, cols, (psi_rows[:, None] - psi_cols[None, :]) * A_N)


def commutator_bound(spec: OperatorSpec, N: int, d: int = 1) -> float:
    """inf over s in [0, N] of ||A_N - A_s||_C + (2 d s / N) ||A_s||_C."""
    if N < 1:
        raise InputError(f"N must be a positive integer, got {N!r}")
    sups = [(delta, value) for delta, value in _offset_sups(spec) if abs(delta) < N]
    full = _bucketed_norm(sups, lambda delta: True)
    # exact endpoints s = 0 and s = N, then right limits at every breakpoint below N
    values = [full, 2.0 * d * full]
    for t in _breakpoints(sups, N, include_upper=False):
        if t >= N:
            continue
        kept = _bucketed_norm(sups, lambda delta: abs(delta) <= t)
        tail = _bucketed_norm(sups, lambda delta: abs(delta) > t)
        values.append(tail + 2.0 * d * t / N * kept)
    return min(values)


def cnorm_where(spec: OperatorSpec, keep: Callable[[float], bool]) -> float:
    """C-norm of the part of A whose offsets λ - λ' satisfy `keep`."""
    return _bucketed_norm(_offset_sups(spec), keep)
