import logging
import time

from stabilcert.commands import emit, load_spec, parameters, run_guarded
from stabilcert.exceptions import InputError, PreconditionError
from stabilcert.models import OperatorKind, SymbolVerdict, Verdict, format_exponent, parse_exponent, scalar_to_json
from stabilcert.oracle import certified_symbol_analysis, finite_section_trend, spectrum_probe

logger = logging.getLogger(__name__)

SYMBOL_REPORT_VERDICTS = {
    SymbolVerdict.CERTIFIED_STABLE: Verdict.CERTIFIED_STABLE.value,
    SymbolVerdict.ZERO_FOUND: Verdict.CERTIFIED_UNSTABLE.value,
    SymbolVerdict.INCONCLUSIVE: "Inconclusive",
}


def register(subparsers):
    parser = subparsers.add_parser("oracle", help="Decide stability of a Toeplitz spec from its symbol")
    parser.add_argument("--spec", required=True, help="Toeplitz spec JSON file")
    parser.add_argument("--trend-p", help="Also tabulate finite-section bounds at this exponent")
    parser.add_argument("--trend-n", type=int, nargs="+", default=[], help="Section sizes for the trend")
    parser.add_argument("--probe", nargs="+", default=[],
                        help="Points z to test against the spectrum, e.g. 2 or 1+0.5j")
    parser.add_argument("--report", help="Write the report here instead of stdout")
    parser.set_defaults(handler=cmd_oracle)


def _parse_probe(text: str) -> complex:
    try:
        return complex(text.replace(" ", ""))
    except ValueError:
        raise InputError(f"Cannot read probe point {text!r} as a complex number")


def cmd_oracle(args) -> int:
    def body():
        started = time.perf_counter()
        spec = load_spec(args.spec)
        if spec.kind is not OperatorKind.TOEPLITZ:
            raise PreconditionError(f"The symbol oracle applies to Toeplitz specs, got {spec.kind.value}")
        analysis = certified_symbol_analysis(spec.coeffs)

        extras = {}
        trend_p = None
        if args.trend_p is not None:
            if not args.trend_n:
                raise InputError("--trend-p needs at least one --trend-n size")
            trend_p = parse_exponent(args.trend_p)
            trend = finite_section_trend(spec, trend_p, args.trend_n)
            extras["trend"] = {"p": format_exponent(trend_p), "points": [t.to_dict() for t in trend]}
        if args.probe:
            points = [_parse_probe(text) for text in args.probe]
            extras["spectrum_probe"] = [point.to_dict() for point in spectrum_probe(spec.coeffs, points)]

        return emit(
            "oracle",
            started,
            SYMBOL_REPORT_VERDICTS[analysis.verdict],
            args.report,
            parameters=parameters(
                spec_file=args.spec,
                trend_p=format_exponent(trend_p) if trend_p is not None else None,
                trend_n=list(args.trend_n) or None,
                probe=[scalar_to_json(_parse_probe(t)) for t in args.probe] or None,
            ),
            spec=spec.to_dict(),
            symbol=analysis.to_dict(),
            extras=extras,
        )

    return run_guarded("oracle", body)
