"""Exception types shared across the package.

Two families matter for exit-code mapping: PreconditionError covers bad
inputs, infeasible parameters, and size-cap rejections (things the caller
can fix); InvariantViolation covers internal consistency failures that
indicate a bug and should never be swallowed.
"""


class PreconditionError(ValueError):
    """Input or parameter rejected before any work was done."""


class CircuitFormatError(PreconditionError):
    """Circuit text did not parse as the qcv v1 format."""


class CapExceeded(PreconditionError):
    """Requested computation is larger than the configured size caps."""


class InvariantViolation(RuntimeError):
    """An internal cross-check failed; the result cannot be trusted."""
