"""Sub-commands of the stabilcert command line and their shared plumbing."""
import logging
import sys
import time
from typing import Any, Dict

from stabilcert import __version__
from stabilcert.exceptions import (
    DomainError,
    InputError,
    ResourceLimitError,
    SpecParseError,
    StabilCertError,
    UnsupportedMethodError,
)
from stabilcert.models import OperatorSpec, Verdict
from stabilcert.schemas import RunReport, parse_operator_spec
from stabilcert.utils.report_writer import write_report

logger = logging.getLogger(__name__)

EXIT_STABLE = 0
EXIT_UNSTABLE = 1
EXIT_NOT_CERTIFIED = 2
EXIT_INPUT_ERROR = 3
EXIT_METHOD_ERROR = 4
EXIT_INTERNAL_ERROR = 5

VERDICT_EXIT_CODES = {
    Verdict.CERTIFIED_STABLE.value: EXIT_STABLE,
    Verdict.CERTIFIED_UNSTABLE.value: EXIT_UNSTABLE,
    Verdict.NOT_CERTIFIED.value: EXIT_NOT_CERTIFIED,
    Verdict.VACUOUS.value: EXIT_NOT_CERTIFIED,
    "Inconclusive": EXIT_NOT_CERTIFIED,
    "Reproduced": EXIT_STABLE,
    "Failed": EXIT_INPUT_ERROR,
}


def exit_code_for(error: Exception) -> int:
    if isinstance(error, (SpecParseError, InputError, DomainError)):
        return EXIT_INPUT_ERROR
    if isinstance(error, (UnsupportedMethodError, ResourceLimitError)):
        return EXIT_METHOD_ERROR
    return EXIT_INTERNAL_ERROR


def load_spec(path: str) -> OperatorSpec:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as e:
        raise InputError(f"Cannot read spec file {path}: {e.strerror}")
    spec = parse_operator_spec(text)
    logger.info(f"Loaded {spec.kind.value} spec from {path}")
    return spec


def emit(command: str, started: float, verdict: str, report_path: str = None, **sections: Any) -> int:
    """Build, write and grade the run report of one command."""
    report = RunReport(
        version=__version__,
        command=command,
        verdict=verdict,
        timing_seconds=round(time.perf_counter() - started, 6),
        **sections,
    )
    write_report(report, report_path)
    return VERDICT_EXIT_CODES[verdict]


def run_guarded(command: str, body) -> int:
    """Run a command body, mapping every failure to an exit code >= 3 with one diagnostic line."""
    try:
        return body()
    except StabilCertError as e:
        logger.error(f"{command} failed: {e}", exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return exit_code_for(e)
    except Exception as e:
        logger.error(f"Unexpected error in {command}: {str(e)}", exc_info=True)
        print(f"internal error: {e}", file=sys.stderr)
        return EXIT_INTERNAL_ERROR


def parameters(**values: Any) -> Dict[str, Any]:
    return {key: value for key, value in values.items() if value is not None}
