"""Exception hierarchy shared across the package."""


class LagflowError(Exception):
    """Base class for all package errors."""


class StructuralError(LagflowError):
    """Malformed inputs: wrong array lengths, NaN/Inf samples, bad arguments."""


class ConfigError(StructuralError):
    """Invalid or unparseable run configuration."""


class InvalidInitialDataError(LagflowError):
    """Initial data violates the well-posedness hypotheses."""


class DegenerateDataError(LagflowError):
    """Initial density is identically zero, or vanishes with eps = 0."""


class DegenerateJacobianError(LagflowError):
    """A Jacobian (or derived coefficient) is nonpositive where positivity is required."""


class DegenerateMapError(LagflowError):
    """Reconstructed flow map is not strictly increasing."""


class QueryRangeError(LagflowError):
    """Requested sample location lies outside the computed domain."""


class NumericalError(LagflowError):
    """Linear-algebra breakdown inside a solve."""


class RunAbortedError(LagflowError):
    """Time stepping could not continue (dt fell below dt_min)."""


class StepRejected(Exception):
    """Control-flow signal: a trial step violated positivity and must be retried.

    Not a LagflowError: rejection is an expected event that the adaptive
    loop consumes; it only escalates to RunAbortedError at dt_min.
    """

    def __init__(self, reason: str, detail: str = ""):
        self.reason = reason
        self.detail = detail
        super().__init__(f"{reason}: {detail}" if detail else reason)


JACOBIAN_FLOOR = "jacobian_floor"
NEGATIVE_TEMPERATURE = "negative_temperature"
