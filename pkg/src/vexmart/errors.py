"""Exception hierarchy shared by all modules.

Each class carries the CLI exit code used when the error escapes to the
command-line entry point.
"""


class VexmartError(Exception):
    exit_code = 1


class ValidationError(VexmartError):
    """Structural input rejected (bad filtration, bad stopping time, ...)."""

    exit_code = 1


class DomainError(VexmartError):
    """Inputs outside an operation's mathematical hypotheses."""

    exit_code = 1


class ResourceError(VexmartError):
    """Request would exceed a configured size cap."""

    exit_code = 2


class NumericalError(VexmartError):
    """Iteration failed to converge, or a proven inequality was violated
    numerically (which indicates a bug, not bad input)."""

    exit_code = 3
