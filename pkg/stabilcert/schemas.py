"""JSON documents: operator specs in, run reports out."""
import json
import logging
from fractions import Fraction
from typing import Annotated, Any, Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, ValidationError, field_validator, model_validator

from stabilcert.config import Config
from stabilcert.exceptions import InputError, SpecParseError
from stabilcert.models import IndexSet, OperatorSpec, SymbolVerdict, Verdict

logger = logging.getLogger(__name__)

FiniteNumber = Annotated[float, Field(strict=True, allow_inf_nan=False)]
ComplexPair = Annotated[List[FiniteNumber], Field(min_length=2, max_length=2)]
ScalarValue = Union[FiniteNumber, ComplexPair]


def _to_scalar(value: ScalarValue):
    if isinstance(value, list):
        re, im = value
        return complex(re, im) if im != 0 else float(re)
    return float(value)


class _Document(BaseModel):
    model_config = ConfigDict(extra="forbid")


class _LatticeDocument(_Document):
    coeffs: Dict[str, ScalarValue]

    @field_validator("coeffs")
    @classmethod
    def offsets_are_integers(cls, coeffs):
        for key in coeffs:
            try:
                int(key.strip())
            except ValueError:
                raise ValueError(f"coefficient key {key!r} is not a decimal integer")
        return coeffs

    def coefficient_map(self) -> Dict[int, Any]:
        return {int(key.strip()): _to_scalar(value) for key, value in self.coeffs.items()}


class ToeplitzDocument(_LatticeDocument):
    kind: Literal["toeplitz"]

    def to_spec(self) -> OperatorSpec:
        return OperatorSpec.toeplitz(self.coefficient_map())


class TwistedDocument(_LatticeDocument):
    kind: Literal["twisted"]
    theta: Union[str, int]

    @field_validator("theta")
    @classmethod
    def theta_is_rational(cls, theta):
        if isinstance(theta, bool):
            raise ValueError("theta must be written as \"r/q\"")
        try:
            value = Fraction(theta) if isinstance(theta, int) else Fraction(theta.strip())
        except (ValueError, ZeroDivisionError):
            raise ValueError(f"theta {theta!r} is not a rational number r/q")
        if isinstance(theta, str) and any(c in theta for c in ".eE"):
            raise ValueError("theta must be written as \"r/q\", not as a decimal")
        return f"{value.numerator}/{value.denominator}"

    def to_spec(self) -> OperatorSpec:
        return OperatorSpec.twisted(self.coefficient_map(), Fraction(self.theta))


class PeriodicDocument(_LatticeDocument):
    kind: Literal["periodic"]
    weights: Annotated[List[ScalarValue], Field(min_length=1)]
    period: Optional[int] = None

    @model_validator(mode="after")
    def period_matches_weights(self):
        if self.period is not None and self.period != len(self.weights):
            raise ValueError(f"period {self.period} does not match {len(self.weights)} weights")
        return self

    def to_spec(self) -> OperatorSpec:
        return OperatorSpec.periodic_modulated(self.coefficient_map(), [_to_scalar(w) for w in self.weights])


class DenseDocument(_Document):
    kind: Literal["dense"]
    points_rows: List[FiniteNumber]
    points_cols: List[FiniteNumber]
    entries: List[Tuple[int, int, ScalarValue]]

    def to_spec(self) -> OperatorSpec:
        return OperatorSpec.dense_window(
            IndexSet.from_points(self.points_rows, dim=1),
            IndexSet.from_points(self.points_cols, dim=1),
            [(i, j, _to_scalar(v)) for i, j, v in self.entries],
        )


SpecDocument = Annotated[
    Union[ToeplitzDocument, TwistedDocument, PeriodicDocument, DenseDocument],
    Field(discriminator="kind"),
]
_spec_adapter = TypeAdapter(SpecDocument)


def _reject_constant(token: str):
    raise ValueError(f"non-finite number {token}")


def _location(error: Dict[str, Any], default: str) -> str:
    if not error.get("loc") and error.get("type", "").startswith("union_tag"):
        return "kind"
    return ".".join(str(part) for part in error.get("loc", ())) or default


def parse_operator_spec(text: str) -> OperatorSpec:
    """Validate a spec document and build the operator it describes."""
    try:
        data = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as e:
        raise SpecParseError(e.msg, f"line {e.lineno} column {e.colno}")
    except ValueError as e:
        raise SpecParseError(str(e), "document")

    try:
        document = _spec_adapter.validate_python(data)
    except ValidationError as e:
        first = e.errors()[0]
        logger.debug(f"Spec rejected with {e.error_count()} error(s)")
        raise SpecParseError(first["msg"], _location(first, "document"))

    try:
        return document.to_spec()
    except InputError as e:
        raise SpecParseError(str(e), document.kind)


# ---------------------------------------------------------------------------
# Run reports
# ---------------------------------------------------------------------------

REPORT_VERDICTS = {v.value for v in Verdict} | {"Inconclusive", "Reproduced", "Failed"}


class RunReport(BaseModel):
    """Everything one command run produced, in a form that re-parses to an equal value."""
    model_config = ConfigDict(extra="forbid")

    format: Literal[1] = Config.REPORT_FORMAT
    tool: str = "stabilcert"
    version: str
    command: str
    parameters: Dict[str, Any] = Field(default_factory=dict)
    spec: Optional[Dict[str, Any]] = None
    certificate: Optional[Dict[str, Any]] = None
    routes: List[Dict[str, Any]] = Field(default_factory=list)
    scan: Optional[Dict[str, Any]] = None
    symbol: Optional[Dict[str, Any]] = None
    extras: Dict[str, Any] = Field(default_factory=dict)
    verdict: str
    timing_seconds: float = 0.0

    @model_validator(mode="after")
    def verdict_is_consistent(self):
        if self.verdict not in REPORT_VERDICTS:
            raise ValueError(f"unknown verdict {self.verdict!r}")
        if self.certificate is not None:
            if self.certificate.get("verdict") != self.verdict:
                raise ValueError(
                    f"verdict {self.verdict!r} differs from the certificate's {self.certificate.get('verdict')!r}"
                )
        elif self.scan is not None:
            expected = Verdict.CERTIFIED_STABLE.value if self.scan.get("first_certified_N") is not None \
                else Verdict.NOT_CERTIFIED.value
            if self.verdict != expected:
                raise ValueError(f"verdict {self.verdict!r} does not match the scan rows")
        elif self.symbol is not None:
            mapped = {
                SymbolVerdict.CERTIFIED_STABLE.value: Verdict.CERTIFIED_STABLE.value,
                SymbolVerdict.ZERO_FOUND.value: Verdict.CERTIFIED_UNSTABLE.value,
                SymbolVerdict.INCONCLUSIVE.value: "Inconclusive",
            }
            if mapped.get(self.symbol.get("verdict")) != self.verdict:
                raise ValueError(f"verdict {self.verdict!r} does not match the symbol analysis")
        return self


def parse_run_report(text: str) -> RunReport:
    try:
        return RunReport.model_validate_json(text)
    except ValidationError as e:
        first = e.errors()[0]
        raise SpecParseError(first["msg"], _location(first, "report"))
