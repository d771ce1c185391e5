import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from stabilcert.exceptions import InputError

Scalar = Union[float, complex]
Point = Tuple[float, ...]


class OperatorKind(Enum):
    TOEPLITZ = "toeplitz"
    TWISTED = "twisted"
    PERIODIC = "periodic"
    DENSE = "dense"


class BoundMethod(Enum):
    SVD = "svd"
    LP_INF = "lp_inf"
    LP_ONE = "lp_one"
    BRUTE = "brute"
    LEFT_INVERSE = "left_inverse"


class Verdict(Enum):
    CERTIFIED_STABLE = "CertifiedStable"
    NOT_CERTIFIED = "NotCertified"
    CERTIFIED_UNSTABLE = "CertifiedUnstable"  # oracle-backed only
    VACUOUS = "Vacuous"


class SymbolVerdict(Enum):
    CERTIFIED_STABLE = "CertifiedStable"
    ZERO_FOUND = "ZeroFound"
    INCONCLUSIVE = "Inconclusive"


def format_exponent(p: float) -> str:
    """Render an exponent the way reports and the command line spell it."""
    if math.isinf(p):
        return "inf"
    return str(int(p)) if float(p).is_integer() else repr(float(p))


def parse_exponent(text: Union[str, float, int]) -> float:
    if isinstance(text, str):
        text = text.strip().lower()
        if text in ("inf", "infinity", "∞"):
            return math.inf
    try:
        p = float(text)
    except (TypeError, ValueError):
        raise InputError(f"Exponent {text!r} is not a number")
    if math.isnan(p) or p < 1:
        raise InputError(f"Exponent must satisfy p >= 1, got {text!r}")
    return p


def normalize_scalar(value) -> Scalar:
    """Coerce a number to float when its imaginary part vanishes, rejecting NaN and infinities."""
    z = complex(value)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise InputError(f"Non-finite scalar {value!r}")
    return float(z.real) if z.imag == 0 else z


def scalar_to_json(value: Scalar):
    z = complex(value)
    return z.real if z.imag == 0 else [z.real, z.imag]


# ---------------------------------------------------------------------------
# Index geometry
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IndexSet:
    """A finite point set in R^d, d in {1, 2}, kept in the order it was given."""
    points: Tuple[Point, ...]
    dim: int = 1

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise InputError(f"Index sets live in dimension 1 or 2, got d={self.dim}")
        for point in self.points:
            if len(point) != self.dim:
                raise InputError(f"Point {point} does not have dimension {self.dim}")
            if not all(math.isfinite(x) for x in point):
                raise InputError(f"Non-finite coordinate in point {point}")
        if len(set(self.points)) != len(self.points):
            raise InputError("Index set points must be pairwise distinct")

    @classmethod
    def from_points(cls, points: Sequence, dim: Optional[int] = None) -> "IndexSet":
        normalized = []
        for point in points:
            if np.ndim(point) == 0:
                normalized.append((float(point),))
            else:
                normalized.append(tuple(float(x) for x in point))
        if dim is None:
            dim = len(normalized[0]) if normalized else 1
        return cls(points=tuple(normalized), dim=dim)

    @classmethod
    def integer_window(cls, lo: int, hi: int) -> "IndexSet":
        """The integers lo, lo+1, ..., hi (empty when hi < lo)."""
        return cls(points=tuple((float(j),) for j in range(lo, hi + 1)), dim=1)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def is_integer_lattice(self) -> bool:
        return all(float(x).is_integer() for point in self.points for x in point)

    def as_array(self) -> np.ndarray:
        return np.array(self.points, dtype=float).reshape(len(self.points), self.dim)

    def coordinates(self) -> np.ndarray:
        """One-dimensional coordinates (d = 1 only)."""
        if self.dim != 1:
            raise InputError("coordinates() is defined for one-dimensional index sets")
        return self.as_array()[:, 0]

    def position(self, point) -> Optional[int]:
        key = (float(point),) if np.ndim(point) == 0 else tuple(float(x) for x in point)
        try:
            return self.points.index(key)
        except ValueError:
            return None

    def to_dict(self):
        if self.dim == 1:
            return {"dim": 1, "points": [p[0] for p in self.points]}
        return {"dim": self.dim, "points": [list(p) for p in self.points]}


# ---------------------------------------------------------------------------
# Operators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OperatorSpec:
    """A finitely-parameterized convolution-dominated matrix.

    Toeplitz:  a(j, j') = a(j - j')
    Twisted:   a(j, j') = a(j - j') exp(-2 pi i theta j' (j - j')), theta = r/q
    Periodic:  a(j, j') = a(j - j') m(j' mod q)
    Dense:     explicit entries on rows x cols, zero elsewhere
    """
    kind: OperatorKind
    coeffs: Mapping[int, Scalar] = field(default_factory=dict)
    theta: Optional[Fraction] = None
    weights: Tuple[Scalar, ...] = ()
    rows: Optional[IndexSet] = None
    cols: Optional[IndexSet] = None
    entries: Tuple[Tuple[int, int, Scalar], ...] = ()

    def __post_init__(self):
        for k in self.coeffs:
            if not isinstance(k, (int, np.integer)):
                raise InputError(f"Coefficient offsets must be integers, got {k!r}")
        if self.kind is OperatorKind.TWISTED:
            if not isinstance(self.theta, Fraction):
                raise InputError("Twisted specs need a rational theta")
        if self.kind is OperatorKind.PERIODIC and len(self.weights) < 1:
            raise InputError("Periodic specs need a period q >= 1 (at least one weight)")
        if self.kind is OperatorKind.DENSE:
            if self.rows is None or self.cols is None:
                raise InputError("Dense specs need row and column index sets")
            if self.rows.dim != 1 or self.cols.dim != 1:
                raise InputError("Operator specs are one-dimensional")
            seen = set()
            for i, j, _ in self.entries:
                if not (0 <= i < len(self.rows) and 0 <= j < len(self.cols)):
                    raise InputError(f"Entry position ({i}, {j}) outside the declared window")
                if (i, j) in seen:
                    raise InputError(f"Duplicate entry at position ({i}, {j})")
                seen.add((i, j))

    @classmethod
    def toeplitz(cls, coeffs: Mapping[int, object]) -> "OperatorSpec":
        return cls(OperatorKind.TOEPLITZ, coeffs={int(k): normalize_scalar(v) for k, v in coeffs.items()})

    @classmethod
    def twisted(cls, coeffs: Mapping[int, object], theta) -> "OperatorSpec":
        return cls(
            OperatorKind.TWISTED,
            coeffs={int(k): normalize_scalar(v) for k, v in coeffs.items()},
            theta=Fraction(theta),
        )

    @classmethod
    def periodic_modulated(cls, coeffs: Mapping[int, object], weights: Sequence) -> "OperatorSpec":
        return cls(
            OperatorKind.PERIODIC,
            coeffs={int(k): normalize_scalar(v) for k, v in coeffs.items()},
            weights=tuple(normalize_scalar(w) for w in weights),
        )

    @classmethod
    def dense_window(cls, rows: IndexSet, cols: IndexSet, entries: Sequence) -> "OperatorSpec":
        return cls(
            OperatorKind.DENSE,
            rows=rows,
            cols=cols,
            entries=tuple((int(i), int(j), normalize_scalar(v)) for i, j, v in entries),
        )

    @property
    def is_lattice(self) -> bool:
        return self.kind is not OperatorKind.DENSE

    @property
    def period(self) -> int:
        if self.kind is OperatorKind.TWISTED:
            return self.theta.denominator
        if self.kind is OperatorKind.PERIODIC:
            return len(self.weights)
        return 1

    @property
    def nonzero_coeffs(self) -> Dict[int, Scalar]:
        return {k: v for k, v in sorted(self.coeffs.items()) if v != 0}

    @property
    def support_radius(self) -> float:
        """Largest |j - j'| carrying a nonzero entry (0 for the zero operator)."""
        if self.is_lattice:
            return float(max((abs(k) for k in self.nonzero_coeffs), default=0))
        rows, cols = self.rows.coordinates(), self.cols.coordinates()
        return float(max((abs(rows[i] - cols[j]) for i, j, v in self.entries if v != 0), default=0.0))

    @property
    def is_real(self) -> bool:
        values = list(self.coeffs.values()) + list(self.weights) + [v for _, _, v in self.entries]
        if any(complex(v).imag != 0 for v in values):
            return False
        if self.kind is OperatorKind.TWISTED:
            # every phase exp(-2 pi i r j' k / q) is real iff 2 r k / q is an integer
            r, q = self.theta.numerator, self.theta.denominator
            return all((2 * r * k) % q == 0 for k in self.nonzero_coeffs)
        return True

    def to_dict(self):
        data = {"kind": self.kind.value}
        if self.is_lattice:
            data["coeffs"] = {str(k): scalar_to_json(v) for k, v in sorted(self.coeffs.items())}
        if self.kind is OperatorKind.TWISTED:
            data["theta"] = f"{self.theta.numerator}/{self.theta.denominator}"
        if self.kind is OperatorKind.PERIODIC:
            data["weights"] = [scalar_to_json(w) for w in self.weights]
        if self.kind is OperatorKind.DENSE:
            data["points_rows"] = [p[0] for p in self.rows.points]
            data["points_cols"] = [p[0] for p in self.cols.points]
            data["entries"] = [[i, j, scalar_to_json(v)] for i, j, v in self.entries]
        return data


@dataclass(frozen=True)
class DiagonalProfile:
    """h(k) = sup of |a(λ, λ')| over pairs whose offset falls in the k-th unit bucket."""
    values: Mapping[int, float]

    def total(self) -> float:
        return math.fsum(self.values.values())

    @property
    def radius(self) -> int:
        return max((abs(k) for k, v in self.values.items() if v > 0), default=0)

    def to_dict(self):
        return {str(k): v for k, v in sorted(self.values.items())}


@dataclass(frozen=True)
class TradeoffResult:
    value: float
    argmin: float

    def to_dict(self):
        argmin = int(self.argmin) if float(self.argmin).is_integer() else self.argmin
        return {"value": self.value, "argmin_m": argmin}


# ---------------------------------------------------------------------------
# Blocks
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class BlockMatrix:
    """The finite block χ_n^{2N} A χ_n^N restricted to its support."""
    rows: np.ndarray
    cols: np.ndarray
    entries: np.ndarray
    center: float = 0.0
    half_width: int = 0

    def __post_init__(self):
        if self.entries.shape != (len(self.rows), len(self.cols)):
            raise InputError(
                f"Entry array of shape {self.entries.shape} does not match "
                f"{len(self.rows)} rows x {len(self.cols)} columns"
            )

    @classmethod
    def from_array(cls, entries) -> "BlockMatrix":
        entries = np.asarray(entries)
        if entries.ndim == 1:
            entries = entries.reshape(-1, 1)
        return cls(
            rows=np.arange(entries.shape[0], dtype=float),
            cols=np.arange(entries.shape[1], dtype=float),
            entries=entries,
        )

    @property
    def shape(self) -> Tuple[int, int]:
        return self.entries.shape

    @property
    def is_vacuous(self) -> bool:
        return len(self.cols) == 0

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.entries) or not np.any(self.entries.imag)

    def real_entries(self) -> np.ndarray:
        return np.real(self.entries).astype(float) if np.iscomplexobj(self.entries) else self.entries.astype(float)

    def nonzero_rows(self) -> "BlockMatrix":
        keep = np.any(self.entries != 0, axis=1)
        return BlockMatrix(self.rows[keep], self.cols, self.entries[keep], self.center, self.half_width)


@dataclass(frozen=True, eq=False)
class BlockBoundReport:
    center: float
    half_width: int
    p: float
    lower_bound: float
    method: BoundMethod
    witness: Optional[np.ndarray] = None

    def to_dict(self):
        return {
            "n": self.center,
            "N": self.half_width,
            "p": format_exponent(self.p),
            "lower_bound": self.lower_bound,
            "method": self.method.value,
        }


# ---------------------------------------------------------------------------
# Certificates
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class StabilityCertificate:
    p: float
    N0: int
    alpha: float
    kappa: float
    R_rows: float
    R_cols: float
    trunc_inf: float
    argmin_m: float
    threshold: float
    C1_lower: Optional[float]
    C2_upper: float
    verdict: Verdict
    route: str
    block_reports: List[BlockBoundReport] = field(default_factory=list)
    provenance: str = ""
    margin: Optional[float] = None

    @property
    def is_certified(self) -> bool:
        return self.verdict is Verdict.CERTIFIED_STABLE

    def to_dict(self):
        data = {
            "route": self.route,
            "p": format_exponent(self.p),
            "N0": self.N0,
            "alpha": self.alpha,
            "kappa": self.kappa,
            "R_rows": self.R_rows,
            "R_cols": self.R_cols,
            "trunc_inf": self.trunc_inf,
            "argmin_m": int(self.argmin_m) if float(self.argmin_m).is_integer() else self.argmin_m,
            "threshold": self.threshold,
            "C1_lower": self.C1_lower,
            "C2_upper": self.C2_upper,
            "verdict": self.verdict.value,
            "blocks": [report.to_dict() for report in self.block_reports],
            "provenance": self.provenance,
        }
        if self.margin is not None:
            data["margin"] = self.margin
        return data


@dataclass(frozen=True)
class ScanRow:
    N: int
    alpha: float
    threshold: float
    certified: bool

    def to_dict(self):
        return {"N": self.N, "alpha": self.alpha, "threshold": self.threshold, "certified": self.certified}


@dataclass(frozen=True)
class ScanTable:
    """Evidence for condition (ii) over a finite range of N; never a verdict on its own."""
    p: float
    rows: Tuple[ScanRow, ...]

    def first_certified(self) -> Optional[int]:
        return next((row.N for row in self.rows if row.certified), None)

    def to_dict(self):
        return {
            "p": format_exponent(self.p),
            "label": "evidence",
            "rows": [row.to_dict() for row in self.rows],
            "first_certified_N": self.first_certified(),
        }


@dataclass(frozen=True)
class TransferInterval:
    """Exponents q reachable from p in one transfer step: 1/q in (inv_q_low, inv_q_high)."""
    p: float
    gamma: float
    d: int
    inv_q_low: float
    inv_q_high: float
    includes_low: bool
    includes_high: bool
    steps: int

    @property
    def q_low(self) -> float:
        return 1.0 / self.inv_q_high

    @property
    def q_high(self) -> float:
        return math.inf if self.inv_q_low == 0 else 1.0 / self.inv_q_low

    def contains(self, q: float) -> bool:
        t = 0.0 if math.isinf(q) else 1.0 / q
        above = t >= self.inv_q_low if self.includes_low else t > self.inv_q_low
        below = t <= self.inv_q_high if self.includes_high else t < self.inv_q_high
        return above and below

    def to_dict(self):
        return {
            "p": format_exponent(self.p),
            "gamma": self.gamma,
            "d": self.d,
            "inv_q": [self.inv_q_low, self.inv_q_high],
            "inv_q_closed": [self.includes_low, self.includes_high],
            "q": [self.q_low, format_exponent(self.q_high)],
            "steps": self.steps,
        }


# ---------------------------------------------------------------------------
# Oracle
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SymbolAnalysis:
    min_modulus_lower_bound: float
    lipschitz_const: float
    resolution: float
    verdict: SymbolVerdict
    smallest_observed: float
    zero_witness: Optional[Tuple[float, float]] = None

    def to_dict(self):
        return {
            "verdict": self.verdict.value,
            "min_modulus_lower_bound": self.min_modulus_lower_bound,
            "lipschitz_const": self.lipschitz_const,
            "resolution": self.resolution,
            "smallest_observed": self.smallest_observed,
            "zero_witness": list(self.zero_witness) if self.zero_witness else None,
        }


@dataclass(frozen=True)
class TrendPoint:
    N: int
    lower_bound: float
    method: BoundMethod

    def to_dict(self):
        return {"N": self.N, "lower_bound": self.lower_bound, "method": self.method.value}


@dataclass(frozen=True)
class SpectrumPoint:
    z: complex
    verdict: SymbolVerdict
    min_modulus_lower_bound: float

    def to_dict(self):
        return {
            "z": scalar_to_json(self.z),
            "verdict": self.verdict.value,
            "min_modulus_lower_bound": self.min_modulus_lower_bound,
        }
