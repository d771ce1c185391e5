class StabilCertError(Exception):
    """Base class for every error raised by the certification library."""


class InputError(StabilCertError, ValueError):
    """An argument is outside the domain of an operation (non-finite point, p < 1, ...)."""


class PreconditionError(InputError):
    """A documented precondition of an operation does not hold."""


class DomainError(StabilCertError):
    """A lookup falls outside the declared index sets of an operator."""


class UnsupportedMethodError(StabilCertError):
    """No exact method exists for the requested exponent and scalar field."""


class ResourceLimitError(StabilCertError):
    """A block exceeds a configured size cap of an exact method."""


class InternalSolverError(StabilCertError):
    """A linear program ended in a state its construction rules out."""


class SpecParseError(StabilCertError):
    """An operator-spec document is malformed; `location` points at the offending field."""

    def __init__(self, message: str, location: str = ""):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)
