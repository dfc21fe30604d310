"""Exception types shared across the package; the CLI maps them to exit codes."""


class InvalidInputError(ValueError):
    """Malformed data: non-monotone abscissae, non-finite values, bad domain."""


class BoundaryDecayError(InvalidInputError):
    """Data does not decay at the grid edges beyond the configured tolerance."""


class ConfigurationError(Exception):
    """Invalid run configuration or violated stability bound (exit code 1)."""


class SolverFailureError(RuntimeError):
    """A solver could not continue: non-finite state, lost monotonicity,
    or a fixed-point iteration that failed to converge (exit code 2)."""


class AuditViolationError(Exception):
    """A runtime invariant check failed beyond tolerance (exit code 3)."""
