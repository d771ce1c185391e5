"""Re-derive the worked examples: the difference-matrix sandwich and its exact left inverse."""
import logging
import math
import time
from typing import Any, Dict, Tuple

import numpy as np

from stabilcert.blocks import certified_lower_bound, closed_block, difference_left_inverse
from stabilcert.certifier import CERTIFIABLE_EXPONENTS, kappa_constant
from stabilcert.commands import emit, parameters, run_guarded
from stabilcert.models import format_exponent

logger = logging.getLogger(__name__)

DIFFERENCE_COEFFS = {0: 1, -1: -1}
SANDWICH_SIZES = (4, 8, 16, 32)
INVERSE_SIZES = (2, 4, 8)
TOLERANCE = 1e-9


def register(subparsers):
    parser = subparsers.add_parser("paper-examples", help="Reproduce the difference-matrix examples")
    parser.add_argument("--report", help="Write the report here instead of stdout")
    parser.set_defaults(handler=cmd_reproduce_examples)


def _sandwich(p: float, N: int) -> Dict[str, Any]:
    block = closed_block(DIFFERENCE_COEFFS, N)
    bound = certified_lower_bound(block, p).lower_bound
    low = 1.0 / (N + 1) - TOLERANCE
    high = kappa_constant(p, 1) * 2.0 / N + TOLERANCE
    return {
        "p": format_exponent(p),
        "N": N,
        "lower_bound": bound,
        "interval": [low, high],
        "ok": bool(low <= bound <= high),
    }


def _left_inverse_check(N: int) -> Dict[str, Any]:
    A = closed_block(DIFFERENCE_COEFFS, N).entries
    B = difference_left_inverse(N)
    exact = bool(np.array_equal(B @ A, np.eye(2 * N + 1, dtype=np.int64)))
    norm_one = int(np.abs(B).sum(axis=0).max())
    norm_inf = int(np.abs(B).sum(axis=1).max())
    return {
        "N": N,
        "identity": exact,
        "norm_1": norm_one,
        "norm_inf": norm_inf,
        "ok": exact and norm_one <= N + 1 and norm_inf <= N + 1,
    }


def reproduce_difference_examples() -> Tuple[Dict[str, Any], bool]:
    """Run every check; returns the report extras and whether all of them held."""
    kappa_squared = kappa_constant(2, 1) ** 2
    kappa_ok = math.isclose(kappa_squared, 22.0, rel_tol=0.0, abs_tol=1e-12)
    sandwich = [_sandwich(p, N) for p in CERTIFIABLE_EXPONENTS for N in SANDWICH_SIZES]
    sizes = sorted(set(INVERSE_SIZES) | set(SANDWICH_SIZES))
    inverses = [_left_inverse_check(N) for N in sizes]

    for row in sandwich + inverses:
        if not row["ok"]:
            logger.error(f"Example check failed: {row}")
    passed = kappa_ok and all(row["ok"] for row in sandwich + inverses)
    extras = {
        "kappa_2_squared": kappa_squared,
        "kappa_ok": kappa_ok,
        "sandwich": sandwich,
        "left_inverse": inverses,
    }
    return extras, passed


def cmd_reproduce_examples(args) -> int:
    def body():
        started = time.perf_counter()
        extras, passed = reproduce_difference_examples()
        return emit(
            "paper-examples",
            started,
            "Reproduced" if passed else "Failed",
            args.report,
            parameters=parameters(sandwich_N=list(SANDWICH_SIZES), inverse_N=list(INVERSE_SIZES)),
            extras=extras,
        )

    return run_guarded("paper-examples", body)
