import json
import logging
import os
import sys
from typing import Optional

from stabilcert.schemas import RunReport

logger = logging.getLogger(__name__)


def render_report(report: RunReport) -> str:
    """Canonical JSON: sorted keys, two-space indent, trailing newline."""
    return json.dumps(report.model_dump(mode="json"), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_report(report: RunReport, path: Optional[str] = None) -> str:
    """Write the report to `path`, or to stdout when no path is given. Returns the rendered text."""
    text = render_report(report)
    if not path:
        sys.stdout.write(text)
        sys.stdout.flush()
        return text
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(text)
    logger.info(f"Report written to {path}")
    return text
