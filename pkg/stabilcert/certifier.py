"""Stability certificates from block lower bounds, plus the diagonal-dominance shortcuts."""
import logging
import math
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from stabilcert.blocks import block_matrix, certified_lower_bound
from stabilcert.config import Config
from stabilcert.exceptions import DomainError, InputError, PreconditionError, UnsupportedMethodError
from stabilcert.extensions import map_concurrently
from stabilcert.models import (
    BlockBoundReport,
    BlockMatrix,
    IndexSet,
    OperatorKind,
    OperatorSpec,
    ScanRow,
    ScanTable,
    StabilityCertificate,
    TransferInterval,
    Verdict,
    parse_exponent,
)
from stabilcert.operators import c_norm, cnorm_where, dense_matrix, truncation_tradeoff
from stabilcert.utils.geometry import relative_separation

logger = logging.getLogger(__name__)

CERTIFIABLE_EXPONENTS = (1.0, 2.0, math.inf)


def _inverse_exponent(p: float) -> float:
    return 0.0 if math.isinf(p) else 1.0 / p


def certifiable_exponent(p) -> float:
    p = parse_exponent(p)
    if p not in CERTIFIABLE_EXPONENTS:
        raise UnsupportedMethodError(f"Certification is offered for p in {{1, 2, inf}}, got p={p}")
    return p


def kappa_constant(p, d: int = 1) -> float:
    """2 (5 + 2^{1-p})^{d/p}, and its limit 2 at p = ∞."""
    p = parse_exponent(p)
    if math.isinf(p):
        return 2.0
    return 2.0 * (5.0 + 2.0 ** (1.0 - p)) ** (d / p)


def separation_factor(p: float, R_rows: float, R_cols: float) -> float:
    """R(Λ)^{1/p} R(Λ')^{1-1/p}."""
    inv = _inverse_exponent(p)
    return R_rows ** inv * R_cols ** (1.0 - inv)


def spec_separations(spec: OperatorSpec) -> Tuple[int, int]:
    """(R(Λ), R(Λ')) of the index sets the operator acts between; 1 for the integer lattice."""
    if spec.is_lattice:
        return 1, 1
    return max(1, relative_separation(spec.rows)), max(1, relative_separation(spec.cols))


def stability_threshold(
    spec: OperatorSpec,
    p,
    N0: int,
    rows: Optional[IndexSet] = None,
    cols: Optional[IndexSet] = None,
    d: int = 1,
) -> float:
    """κ(p, d) R(Λ)^{1/p} R(Λ')^{1-1/p} times the truncation trade-off at N0."""
    p = parse_exponent(p)
    R_rows, R_cols = spec_separations(spec)
    if rows is not None:
        R_rows = max(1, relative_separation(rows))
    if cols is not None:
        R_cols = max(1, relative_separation(cols))
    tradeoff = truncation_tradeoff(spec, N0, d)
    return kappa_constant(p, d) * separation_factor(p, R_rows, R_cols) * tradeoff.value


def block_centers(spec: OperatorSpec, N0: int) -> List[float]:
    """Centers n in N0·Z whose blocks represent every block of the operator."""
    if spec.kind is OperatorKind.TOEPLITZ:
        return [0.0]
    if spec.kind in (OperatorKind.TWISTED, OperatorKind.PERIODIC):
        # blocks repeat under n -> n + q, and N0·t runs through the classes of N0·Z mod q
        q = spec.period
        return [float(N0 * t) for t in range(q // math.gcd(N0, q))]
    cols = spec.cols.coordinates()
    if cols.size == 0:
        return []
    lo = math.floor((cols.min() - N0) / N0)
    hi = math.ceil((cols.max() + N0) / N0)
    return [float(N0 * t) for t in range(lo, hi + 1)]


def _rounded_verdict(alpha: float, threshold: float, p: float, d: int) -> Tuple[Verdict, Optional[float]]:
    margin = Config.SAFETY_MARGIN
    alpha_down, threshold_up = alpha - margin, threshold + margin
    if alpha_down > threshold_up:
        return Verdict.CERTIFIED_STABLE, 2.0 ** (-d * _inverse_exponent(p)) * (alpha_down - threshold_up)
    return Verdict.NOT_CERTIFIED, None


def _sweep(spec: OperatorSpec, p: float, N0: int, centers: Iterable[float]) -> List[BlockBoundReport]:
    blocks = map_concurrently(lambda n: block_matrix(spec, n, N0), list(centers))
    blocks = [block for block in blocks if not block.is_vacuous]
    return map_concurrently(lambda block: certified_lower_bound(block, p), blocks)


def certify_condition_iii(
    spec: OperatorSpec,
    p,
    N0: int,
    centers: Optional[Sequence[float]] = None,
    d: int = 1,
) -> StabilityCertificate:
    """Certify ℓ^p-stability from the worst block lower bound at scale N0.

    `centers` overrides the representative block centers, e.g. to run a full sweep.
    """
    p = certifiable_exponent(p)
    if not isinstance(N0, (int, np.integer)) or N0 < 1:
        raise InputError(f"N0 must be a positive integer, got {N0!r}")
    if p != 2 and not spec.is_real:
        raise UnsupportedMethodError(f"Complex operators can only be certified at p=2, got p={p}")

    R_rows, R_cols = spec_separations(spec)
    factor = separation_factor(p, R_rows, R_cols)
    kappa = kappa_constant(p, d)
    tradeoff = truncation_tradeoff(spec, N0, d)
    threshold = kappa * factor * tradeoff.value
    C2 = factor * c_norm(spec)

    reports = _sweep(spec, p, N0, block_centers(spec, N0) if centers is None else centers)
    if not reports:
        logger.info(f"No nonvacuous block at N0={N0}; verdict Vacuous")
        return StabilityCertificate(
            p=p, N0=N0, alpha=0.0, kappa=kappa, R_rows=R_rows, R_cols=R_cols,
            trunc_inf=tradeoff.value, argmin_m=tradeoff.argmin, threshold=threshold,
            C1_lower=None, C2_upper=C2, verdict=Verdict.VACUOUS, route="condition_iii",
            provenance="no block has columns",
        )

    worst = min(reports, key=lambda report: report.lower_bound)
    alpha = worst.lower_bound
    verdict, C1 = _rounded_verdict(alpha, threshold, p, d)
    methods = sorted({report.method.value for report in reports})
    provenance = (
        f"{len(reports)} block(s) at N0={N0}, worst at n={worst.center:g} "
        f"by {'/'.join(methods)}; trade-off minimized at m={tradeoff.argmin:g}"
    )
    logger.info(f"Condition (iii) at p={p}, N0={N0}: alpha={alpha:.6g}, threshold={threshold:.6g} -> {verdict.value}")
    return StabilityCertificate(
        p=p, N0=N0, alpha=alpha, kappa=kappa, R_rows=R_rows, R_cols=R_cols,
        trunc_inf=tradeoff.value, argmin_m=tradeoff.argmin, threshold=threshold,
        C1_lower=C1, C2_upper=C2, verdict=verdict, route="condition_iii",
        block_reports=reports, provenance=provenance,
    )


def stability_scan(spec: OperatorSpec, p, N_range: Iterable[int], d: int = 1) -> ScanTable:
    """alpha(N) against threshold(N) over a finite range of scales."""
    p = certifiable_exponent(p)
    rows = []
    for N in N_range:
        certificate = certify_condition_iii(spec, p, int(N), d=d)
        rows.append(ScanRow(N=int(N), alpha=certificate.alpha, threshold=certificate.threshold,
                            certified=certificate.is_certified))
    table = ScanTable(p=p, rows=tuple(rows))
    logger.info(f"Scan at p={p} over {len(rows)} scale(s): first certified N = {table.first_certified()}")
    return table


# ---------------------------------------------------------------------------
# Diagonal dominance
# ---------------------------------------------------------------------------

def _dense_square(spec: OperatorSpec) -> Tuple[np.ndarray, np.ndarray]:
    """Declared entries reordered so that row and column positions name the same points."""
    if set(spec.rows.points) != set(spec.cols.points):
        raise DomainError("Diagonal dominance needs identical row and column point sets")
    points = spec.cols.coordinates()
    return points, dense_matrix(spec, points, points)


def _inf_diagonal(spec: OperatorSpec) -> float:
    if spec.kind is OperatorKind.DENSE:
        points, W = _dense_square(spec)
        return float(np.min(np.abs(np.diag(W)))) if points.size else 0.0
    a0 = abs(spec.coeffs.get(0, 0.0))
    if spec.kind is OperatorKind.PERIODIC:
        return a0 * min(abs(w) for w in spec.weights)
    return a0


def diagonal_dominance_certify(spec: OperatorSpec) -> StabilityCertificate:
    """ℓ∞ certificate at N0 = 1 from inf |a(λ, λ)| - 2 Σ_{k≠0} h(k) > 0."""
    diagonal = _inf_diagonal(spec)
    off_diagonal = cnorm_where(spec, lambda delta: delta != 0)
    R_rows, R_cols = spec_separations(spec)
    dominance = diagonal - 2.0 * off_diagonal
    threshold = 2.0 * R_cols * off_diagonal
    verdict, C1 = _rounded_verdict(diagonal, threshold, math.inf, 1)
    logger.info(f"Diagonal dominance margin {dominance:.6g} -> {verdict.value}")
    return StabilityCertificate(
        p=math.inf, N0=1, alpha=diagonal, kappa=2.0, R_rows=R_rows, R_cols=R_cols,
        trunc_inf=off_diagonal, argmin_m=0, threshold=threshold,
        C1_lower=C1, C2_upper=R_cols * c_norm(spec), verdict=verdict, route="diagonal_dominance",
        provenance="inf |a(j,j)| - 2 sum_{k != 0} h(k)", margin=dominance,
    )


def classical_dominance_margin(spec: OperatorSpec) -> float:
    """inf_j |a(j,j)| - max(Σ_{j'≠j} |a(j,j')|, Σ_{j'≠j} |a(j',j)|).

    A positive value gives ℓ^1- and ℓ^∞-stability.
    """
    if spec.kind is OperatorKind.DENSE:
        points, W = _dense_square(spec)
        if points.size == 0:
            return 0.0
        magnitudes = np.abs(W)
        diagonal = np.diag(magnitudes)
        row_sums = magnitudes.sum(axis=1) - diagonal
        col_sums = magnitudes.sum(axis=0) - diagonal
        return float(np.min(diagonal - np.maximum(row_sums, col_sums)))

    off = {k: abs(v) for k, v in spec.coeffs.items() if k != 0}
    a0 = abs(spec.coeffs.get(0, 0.0))
    if spec.kind is not OperatorKind.PERIODIC:
        return a0 - math.fsum(off.values())
    weights = [abs(w) for w in spec.weights]
    q = spec.period
    margins = []
    for j in range(q):
        row = math.fsum(a * weights[(j - k) % q] for k, a in off.items())
        col = weights[j] * math.fsum(off.values())
        margins.append(a0 * weights[j] - max(row, col))
    return min(margins)


# ---------------------------------------------------------------------------
# Band Toeplitz shortcut
# ---------------------------------------------------------------------------

def toeplitz_block_certify(spec: OperatorSpec, p, N0: int) -> StabilityCertificate:
    """Certify a band Toeplitz matrix from its single finite section at N0 > k.

    The section has the open column window (-N0, N0) and every nonzero row, so its
    bound agrees with the block of certify_condition_iii.
    """
    p = certifiable_exponent(p)
    if spec.kind is not OperatorKind.TOEPLITZ:
        raise PreconditionError(f"The band shortcut applies to Toeplitz specs, got {spec.kind.value}")
    if p != 2 and not spec.is_real:
        raise UnsupportedMethodError(f"Complex operators can only be certified at p=2, got p={p}")
    k = int(spec.support_radius)
    if N0 <= k:
        raise PreconditionError(f"N0={N0} must exceed the bandwidth parameter k={k}")

    rows = np.arange(-N0 + 1 - k, N0 + k, dtype=float)
    cols = np.arange(-N0 + 1, N0, dtype=float)
    block = BlockMatrix(rows=rows, cols=cols, entries=dense_matrix(spec, rows, cols), center=0.0, half_width=N0)
    report = certified_lower_bound(block, p)

    kappa = kappa_constant(p, 1)
    trunc = k / N0 * c_norm(spec)
    threshold = kappa * trunc
    verdict, C1 = _rounded_verdict(report.lower_bound, threshold, p, 1)
    logger.info(f"Band section at p={p}, N0={N0}: bound={report.lower_bound:.6g}, threshold={threshold:.6g} -> {verdict.value}")
    return StabilityCertificate(
        p=p, N0=N0, alpha=report.lower_bound, kappa=kappa, R_rows=1, R_cols=1,
        trunc_inf=trunc, argmin_m=k, threshold=threshold,
        C1_lower=C1, C2_upper=c_norm(spec), verdict=verdict, route="toeplitz_block",
        block_reports=[report], provenance=f"single section, bandwidth parameter k={k}",
    )


# ---------------------------------------------------------------------------
# Changing the exponent
# ---------------------------------------------------------------------------

def p_transfer_step(p, gamma: float, d: int = 1) -> TransferInterval:
    """Exponents q with d |1/p - 1/q| < γ / (1 + γ), and the steps needed to reach all of [1, ∞]."""
    p = parse_exponent(p)
    if not (gamma > 0 and math.isfinite(gamma)):
        raise InputError(f"Transfer needs gamma > 0, got {gamma!r}")
    radius = gamma / (d * (1.0 + gamma))
    inv = _inverse_exponent(p)
    low, high = inv - radius, inv + radius
    includes_low = low < 0
    includes_high = high > 1
    steps = math.ceil(d * (1.0 + gamma) / gamma - 1e-12)
    return TransferInterval(
        p=p, gamma=gamma, d=d,
        inv_q_low=max(low, 0.0), inv_q_high=min(high, 1.0),
        includes_low=includes_low, includes_high=includes_high, steps=steps,
    )


def block_bound_transfer(C0: float, p, q, N: int, d: int = 1, R_rows: float = 1, R_cols: float = 1) -> float:
    """Lower bound at exponent q implied by a block lower bound C0 at exponent p.

    Columns of a block lie in a box of side 2N and rows in one of side 4N, which
    bounds how far the two norms can drift apart on each side.
    """
    if C0 < 0:
        raise InputError(f"Block bound must be non-negative, got {C0!r}")
    if N < 1:
        raise InputError(f"N must be a positive integer, got {N!r}")
    u = _inverse_exponent(parse_exponent(p)) - _inverse_exponent(parse_exponent(q))
    return C0 * ((2 * N) ** d * R_cols) ** min(u, 0.0) * ((4 * N) ** d * R_rows) ** (-max(u, 0.0))
