import argparse
import logging
import os
import sys
from logging.handlers import RotatingFileHandler

from stabilcert import __version__
from stabilcert.commands import EXIT_INPUT_ERROR, certify_commands, oracle_commands, reproduce_commands, scan_commands
from stabilcert.config import Config
from stabilcert.exceptions import InputError

# Centralized CLI Configuration
CLI_CONFIG = {
    "PROG": "stabilcert",
    "LOG_DIR": Config.LOG_DIR,
    "LOG_LEVEL": Config.LOG_LEVEL,
    "LOG_FILE": "stabilcert.log",
    "NUMERIC_ENV_VARS": {
        "STABILCERT_THREADS": int,
        "STABILCERT_SAFETY_MARGIN": float,
        "STABILCERT_P1_COLUMN_CAP": int,
        "STABILCERT_P1_PATTERN_BUDGET": int,
    },
}

_HANDLER_TAG = "_stabilcert_handler"


def validate_env_vars():
    """Reject malformed numeric settings before any work starts."""
    malformed = []
    for name, cast in CLI_CONFIG["NUMERIC_ENV_VARS"].items():
        raw = os.getenv(name)
        if raw is None:
            continue
        try:
            value = cast(raw)
        except ValueError:
            malformed.append(name)
            continue
        if value < 0:
            malformed.append(name)
    if not isinstance(logging.getLevelName(CLI_CONFIG["LOG_LEVEL"]), int):
        malformed.append("STABILCERT_LOG_LEVEL")
    if malformed:
        raise EnvironmentError(f"Malformed environment variables: {', '.join(malformed)}")


def setup_logging():
    """Console logging on stderr (stdout carries reports) and an optional rotating log file."""
    root = logging.getLogger()
    for handler in [h for h in root.handlers if getattr(h, _HANDLER_TAG, False)]:
        root.removeHandler(handler)
        handler.close()

    log_format = logging.Formatter(
        "%(asctime)s [%(levelname)s] %(name)s: %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S"
    )
    handlers = [logging.StreamHandler(sys.stderr)]
    if CLI_CONFIG["LOG_DIR"]:
        os.makedirs(CLI_CONFIG["LOG_DIR"], exist_ok=True)
        log_file = os.path.join(CLI_CONFIG["LOG_DIR"], CLI_CONFIG["LOG_FILE"])
        handlers.append(RotatingFileHandler(log_file, maxBytes=10*1024*1024, backupCount=5))
    for handler in handlers:
        handler.setFormatter(log_format)
        setattr(handler, _HANDLER_TAG, True)
        root.addHandler(handler)

    root.setLevel(logging.DEBUG if Config.DEBUG else CLI_CONFIG["LOG_LEVEL"])
    return logging.getLogger(__name__)


class CommandParser(argparse.ArgumentParser):
    """Usage errors become InputError so they share the exit code of other bad input."""

    def error(self, message):
        raise InputError(message)


def create_app() -> argparse.ArgumentParser:
    parser = CommandParser(
        prog=CLI_CONFIG["PROG"],
        description="Certify ℓ^p-stability of convolution-dominated infinite matrices from finite blocks.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True, parser_class=CommandParser)

    # Register all commands
    certify_commands.register(subparsers)
    scan_commands.register(subparsers)
    oracle_commands.register(subparsers)
    reproduce_commands.register(subparsers)
    return parser


def main(argv=None) -> int:
    try:
        validate_env_vars()
    except EnvironmentError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR

    logger = setup_logging()
    parser = create_app()
    try:
        args = parser.parse_args(argv)
    except InputError as e:
        logger.error(f"Invalid command line: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR

    logger.debug(f"Running {args.command}")
    return args.handler(args)


if __name__ == "__main__":
    sys.exit(main())
