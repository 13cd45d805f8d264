"""Exception taxonomy shared by all lab modules."""


class RobustLabError(Exception):
    """Base class for every error raised by this package."""


class GraphInputError(RobustLabError, ValueError):
    """Invalid edge data passed to a graph constructor."""


class VertexRangeError(GraphInputError):
    pass


class SelfLoopError(GraphInputError):
    pass


class DuplicateEdgeError(GraphInputError):
    pass


class FormatError(RobustLabError, ValueError):
    """Malformed edge-list / triple-list / CSV text."""


class ParameterError(RobustLabError, ValueError):
    """Infeasible or out-of-contract parameters."""


class CapExceededError(RobustLabError, ValueError):
    """Instance too large for an exhaustive or exact mode."""


class RetryBudgetError(RobustLabError, RuntimeError):
    """A rejection sampler ran out of attempts."""


class SearchBudgetError(RobustLabError, RuntimeError):
    """A combinatorial search exceeded its node budget (inconclusive, not 'none')."""


class DegreeBandError(RobustLabError, ValueError):
    """A degree fell outside the required (1 +- gamma) band."""


class ConvergenceError(RobustLabError, RuntimeError):
    """Iterative eigensolver failed to reach the requested residual."""


class RegimeError(RobustLabError, RuntimeError):
    """A sampler hit a state its parameter regime is supposed to exclude."""

    def __init__(self, message, *, round_index=None, vertex=None):
        super().__init__(message)
        self.round_index = round_index
        self.vertex = vertex


class PipelineStageError(RobustLabError, RuntimeError):
    """Failure inside a named stage of the factor pipeline."""

    def __init__(self, stage, message, *, cause=None):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage
        self.cause = cause
