import logging
import time

from stabilcert.certifier import stability_scan
from stabilcert.commands import emit, load_spec, parameters, run_guarded
from stabilcert.exceptions import InputError
from stabilcert.models import Verdict, format_exponent, parse_exponent

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser("scan", help="Tabulate alpha(N) against threshold(N) over a range of N")
    parser.add_argument("--spec", required=True, help="Operator spec JSON file")
    parser.add_argument("--p", required=True, help="Exponent: 1, 2 or inf")
    parser.add_argument("--nmin", type=int, required=True)
    parser.add_argument("--nmax", type=int, required=True)
    parser.add_argument("--report", help="Write the report here instead of stdout")
    parser.set_defaults(handler=cmd_scan)


def cmd_scan(args) -> int:
    def body():
        started = time.perf_counter()
        if args.nmin < 1 or args.nmax < args.nmin:
            raise InputError(f"Need 1 <= nmin <= nmax, got nmin={args.nmin}, nmax={args.nmax}")
        spec = load_spec(args.spec)
        p = parse_exponent(args.p)
        table = stability_scan(spec, p, range(args.nmin, args.nmax + 1))

        verdict = Verdict.CERTIFIED_STABLE if table.first_certified() is not None else Verdict.NOT_CERTIFIED
        return emit(
            "scan",
            started,
            verdict.value,
            args.report,
            parameters=parameters(spec_file=args.spec, p=format_exponent(p), nmin=args.nmin, nmax=args.nmax),
            spec=spec.to_dict(),
            scan=table.to_dict(),
        )

    return run_guarded("scan", body)
