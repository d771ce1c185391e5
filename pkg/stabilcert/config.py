import os
import math
import logging
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

logger = logging.getLogger(__name__)


def strtobool(val: str) -> bool:
    """Convert a string to a boolean value."""
    return val.lower() in ("yes", "true", "t", "1")


def _env_number(name: str, default: str, cast):
    """Read a numeric setting; malformed values fall back to the default and are reported by validate_env_vars."""
    raw = os.getenv(name, default)
    try:
        return cast(raw)
    except ValueError:
        logger.warning(f"Ignoring malformed {name}={raw!r}, using {default}")
        return cast(default)


class Config:
    # Worker pool (0 = one worker per CPU)
    THREADS = _env_number("STABILCERT_THREADS", "0", int)

    # Logging Configuration
    LOG_LEVEL = os.getenv("STABILCERT_LOG_LEVEL", "INFO").upper()
    LOG_DIR = os.getenv("STABILCERT_LOG_DIR", "")
    DEBUG = strtobool(os.getenv("DEBUG", "0"))

    # Certificate arithmetic: thresholds rounded up, alphas rounded down by this amount
    SAFETY_MARGIN = _env_number("STABILCERT_SAFETY_MARGIN", "1e-12", float)

    # p=1 sign-pattern enumeration
    P1_COLUMN_CAP = _env_number("STABILCERT_P1_COLUMN_CAP", "20", int)
    P1_PATTERN_BUDGET = _env_number("STABILCERT_P1_PATTERN_BUDGET", "2048", int)

    # Linear algebra tolerances
    JACOBI_TOLERANCE = 1e-14
    JACOBI_MAX_SWEEPS = 100
    SIMPLEX_PIVOT_TOLERANCE = 1e-10
    SIMPLEX_FEASIBILITY_TOLERANCE = 1e-8
    SIMPLEX_MAX_PIVOTS = 50000
    SIMPLEX_REFACTOR_INTERVAL = 50
    SIMPLEX_RATIO_TIE_ULPS = 64

    # Row-subset bound: enumerate every deletion set up to this many combinations
    ROW_SUBSET_COMBINATIONS = 2000

    # Symbol oracle
    ORACLE_ZERO_TOLERANCE = 1e-14
    ORACLE_INITIAL_POINTS = 64
    ORACLE_REFINEMENT_FACTOR = 4
    ORACLE_RESOLUTION_FLOOR = 2.0 ** -20 * 2.0 * math.pi

    # Report schema
    REPORT_FORMAT = 1


def resolve_worker_count() -> int:
    """Number of workers for block sweeps; 0 in the environment means one per CPU."""
    if Config.THREADS > 0:
        return Config.THREADS
    return os.cpu_count() or 1
