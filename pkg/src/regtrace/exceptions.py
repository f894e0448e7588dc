"""Exception hierarchy.

Every error raised on purpose by the library derives from
:class:`RegTraceError`; the CLI turns these into machine-readable JSON.
"""


class RegTraceError(Exception):
    """Base class for all library errors."""


class GraphError(RegTraceError, ValueError):
    """Invalid graph input."""


class NonRegular(GraphError):
    pass


class IllegalSimple(GraphError):
    pass


class OddProduct(GraphError):
    pass


class DecorationMismatch(RegTraceError, ValueError):
    pass


class RejectionBudgetExceeded(RegTraceError, RuntimeError):
    pass


class BudgetExceeded(RegTraceError, RuntimeError):
    pass


class PolePoint(RegTraceError, ValueError):
    pass


class NotHermitian(RegTraceError, ValueError):
    pass


class EndpointSingular(RegTraceError, ValueError):
    pass


class AllEigenvaluesExcluded(RegTraceError, ValueError):
    pass


class BipartiteInput(RegTraceError, ValueError):
    pass


class OutOfSupport(RegTraceError, ValueError):
    pass


class PoleAtD(RegTraceError, ValueError):
    pass


class DegeneratePhase(RegTraceError, ValueError):
    pass


class Pole(RegTraceError, ValueError):
    pass


class NoRootInBranch(RegTraceError, RuntimeError):
    pass


class BranchJump(RegTraceError, RuntimeError):
    pass
