"""Ground truth for Toeplitz specs through the symbol, plus finite-section trends for every kind."""
import logging
import math
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple

import numpy as np

from stabilcert.blocks import certified_lower_bound
from stabilcert.certifier import certifiable_exponent
from stabilcert.config import Config
from stabilcert.exceptions import InputError
from stabilcert.models import (
    BlockMatrix,
    OperatorKind,
    OperatorSpec,
    Scalar,
    SpectrumPoint,
    SymbolAnalysis,
    SymbolVerdict,
    TrendPoint,
    normalize_scalar,
)
from stabilcert.operators import dense_matrix

logger = logging.getLogger(__name__)


def _normalized(coeffs: Mapping[int, object]) -> Dict[int, Scalar]:
    normalized = {}
    for k, v in coeffs.items():
        if int(k) != k:
            raise InputError(f"Symbol offsets must be integers, got {k!r}")
        value = normalize_scalar(v)
        if value != 0:
            normalized[int(k)] = value
    return normalized


def symbol_eval(coeffs: Mapping[int, object], xi):
    """â(ξ) = Σ_j a(j) e^{-i j ξ}; `xi` may be a scalar or an array."""
    coeffs = _normalized(coeffs)
    xi_arr = np.asarray(xi, dtype=float)
    values = np.zeros(xi_arr.shape, dtype=complex)
    for j, a in coeffs.items():
        values += a * np.exp(-1j * j * xi_arr)
    return complex(values) if values.ndim == 0 else values


def _exact_sum(coeffs: Dict[int, Scalar], alternating: bool) -> Tuple[Fraction, Fraction]:
    re, im = Fraction(0), Fraction(0)
    for j, a in coeffs.items():
        sign = -1 if alternating and j % 2 else 1
        z = complex(a)
        re += sign * Fraction(z.real)
        im += sign * Fraction(z.imag)
    return re, im


def _lipschitz(coeffs: Dict[int, Scalar]) -> float:
    return math.fsum(abs(j) * abs(a) for j, a in coeffs.items())


def certified_symbol_analysis(coeffs: Mapping[int, object]) -> SymbolAnalysis:
    """Decide whether â vanishes, certifying min |â| from below on refined grids.

    Between grid points |â| moves by at most L h / 2 with L = Σ |j| |a(j)|, so
    min_grid |â| - L h / 2 is a true lower bound. ξ = 0 and ξ = π are checked in
    exact rational arithmetic first.
    """
    coeffs = _normalized(coeffs)
    L = _lipschitz(coeffs)
    for xi, alternating in ((0.0, False), (math.pi, True)):
        re, im = _exact_sum(coeffs, alternating)
        if re == 0 and im == 0:
            logger.info(f"Symbol vanishes exactly at xi={xi:g}")
            return SymbolAnalysis(0.0, L, 0.0, SymbolVerdict.ZERO_FOUND, 0.0, (xi, 0.0))

    # slack for round-off in the grid evaluation itself
    slack = 64 * np.finfo(float).eps * (1.0 + math.fsum(abs(a) for a in coeffs.values()))
    points = Config.ORACLE_INITIAL_POINTS
    smallest, witness = math.inf, None
    while True:
        h = 2.0 * math.pi / points
        grid = h * np.arange(points)
        moduli = np.abs(symbol_eval(coeffs, grid))
        i = int(np.argmin(moduli))
        if moduli[i] < smallest:
            smallest, witness = float(moduli[i]), (float(grid[i]), float(moduli[i]))
        if smallest <= Config.ORACLE_ZERO_TOLERANCE:
            logger.info(f"Symbol has a numerical zero at xi={witness[0]:.12g}")
            return SymbolAnalysis(0.0, L, h, SymbolVerdict.ZERO_FOUND, smallest, witness)
        bound = float(moduli[i]) - L * h / 2.0 - slack
        if bound > 0:
            logger.debug(f"Symbol bounded below by {bound:.6g} at resolution {h:.3g}")
            return SymbolAnalysis(bound, L, h, SymbolVerdict.CERTIFIED_STABLE, smallest)
        if h <= Config.ORACLE_RESOLUTION_FLOOR * (1 + 1e-12):
            logger.info(f"Symbol analysis inconclusive: smallest observed |a^| = {smallest:.3e}")
            return SymbolAnalysis(0.0, L, h, SymbolVerdict.INCONCLUSIVE, smallest, witness)
        points *= Config.ORACLE_REFINEMENT_FACTOR


def spectrum_probe(coeffs: Mapping[int, object], points: Iterable) -> List[SpectrumPoint]:
    """Symbol analysis of a - z δ_0 for each sampled z: stable means z lies outside the spectrum."""
    base = _normalized(coeffs)
    results = []
    for z in points:
        z = normalize_scalar(z)
        shifted = dict(base)
        shifted[0] = normalize_scalar(complex(shifted.get(0, 0.0)) - complex(z))
        analysis = certified_symbol_analysis(shifted)
        results.append(SpectrumPoint(z=z, verdict=analysis.verdict,
                                     min_modulus_lower_bound=analysis.min_modulus_lower_bound))
    return results


def finite_section_block(spec: OperatorSpec, N: int) -> BlockMatrix:
    """Columns in (-N, N) with every row that can meet them."""
    if N < 1:
        raise InputError(f"N must be a positive integer, got {N!r}")
    if spec.kind is OperatorKind.DENSE:
        col_coords = spec.cols.coordinates()
        cols = col_coords[np.abs(col_coords) < N]
        rows = spec.rows.coordinates()
    else:
        k = int(spec.support_radius)
        cols = np.arange(-N + 1, N, dtype=float)
        rows = np.arange(-N + 1 - k, N + k, dtype=float)
    return BlockMatrix(rows=rows, cols=cols, entries=dense_matrix(spec, rows, cols), center=0.0, half_width=N)


def finite_section_trend(spec: OperatorSpec, p, N_list: Sequence[int]) -> List[TrendPoint]:
    """Lower bounds of growing finite sections; they decay to zero for unstable Toeplitz specs."""
    p = certifiable_exponent(p)
    trend = []
    for N in N_list:
        block = finite_section_block(spec, int(N))
        if block.is_vacuous:
            continue
        report = certified_lower_bound(block, p)
        trend.append(TrendPoint(N=int(N), lower_bound=report.lower_bound, method=report.method))
    return trend
