import dataclasses
import logging
import math
import time

from stabilcert.certifier import (
    certify_condition_iii,
    classical_dominance_margin,
    diagonal_dominance_certify,
    toeplitz_block_certify,
)
from stabilcert.commands import emit, load_spec, parameters, run_guarded
from stabilcert.exceptions import DomainError
from stabilcert.models import OperatorKind, SymbolVerdict, Verdict, format_exponent, parse_exponent
from stabilcert.oracle import certified_symbol_analysis

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser("certify", help="Certify ℓ^p-stability at a fixed block scale N0")
    parser.add_argument("--spec", required=True, help="Operator spec JSON file")
    parser.add_argument("--p", required=True, help="Exponent: 1, 2 or inf")
    parser.add_argument("--n0", type=int, required=True, help="Block scale N0 >= 1")
    parser.add_argument("--report", help="Write the report here instead of stdout")
    parser.set_defaults(handler=cmd_certify)


def _dominance_routes(spec, p):
    """Diagonal-dominance certificate (p = ∞) and the classical margin (p in {1, ∞}), where they apply."""
    certificate, margin = None, None
    try:
        if math.isinf(p):
            certificate = diagonal_dominance_certify(spec)
        if p == 1 or math.isinf(p):
            margin = classical_dominance_margin(spec)
    except DomainError as e:
        logger.warning(f"Dominance routes skipped: {e}")
    return certificate, margin


def cmd_certify(args) -> int:
    def body():
        started = time.perf_counter()
        spec = load_spec(args.spec)
        p = parse_exponent(args.p)

        dominance, classical_margin = _dominance_routes(spec, p)
        condition_iii = certify_condition_iii(spec, p, args.n0)
        routes = [c for c in (dominance, condition_iii) if c is not None]

        symbol = None
        if spec.kind is OperatorKind.TOEPLITZ:
            if args.n0 > spec.support_radius:
                routes.append(toeplitz_block_certify(spec, p, args.n0))
            symbol = certified_symbol_analysis(spec.coeffs)

        headline = next((c for c in routes if c.is_certified), None)
        if headline is not None and symbol is not None and symbol.verdict is SymbolVerdict.ZERO_FOUND:
            logger.error("A route certified a spec whose symbol vanishes; reporting the certificate")
        if headline is None:
            headline = condition_iii
            if symbol is not None and symbol.verdict is SymbolVerdict.ZERO_FOUND:
                xi = symbol.zero_witness[0]
                headline = dataclasses.replace(
                    condition_iii,
                    verdict=Verdict.CERTIFIED_UNSTABLE,
                    provenance=f"{condition_iii.provenance}; symbol vanishes at xi={xi:.12g}",
                )

        extras = {}
        if classical_margin is not None:
            extras["classical_dominance_margin"] = classical_margin
        logger.info(f"certify: {headline.route} -> {headline.verdict.value}")
        return emit(
            "certify",
            started,
            headline.verdict.value,
            args.report,
            parameters=parameters(spec_file=args.spec, p=format_exponent(p), N0=args.n0),
            spec=spec.to_dict(),
            certificate=headline.to_dict(),
            routes=[c.to_dict() for c in routes],
            symbol=symbol.to_dict() if symbol is not None else None,
            extras=extras,
        )

    return run_guarded("certify", body)
