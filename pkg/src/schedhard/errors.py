"""Exception hierarchy shared by every module.

The CLI maps each class onto an exit code, so library code raises these
rather than returning error values.
"""


class SchedHardError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ParameterError(SchedHardError, ValueError):
    exit_code = 2


class StructuralError(SchedHardError, ValueError):
    """Malformed input: unknown ids, cycles, empty intervals and the like."""

    exit_code = 2


class PreconditionError(SchedHardError, ValueError):
    exit_code = 2


class UnsupportedModelError(SchedHardError, ValueError):
    exit_code = 2


class CapacityError(SchedHardError):
    exit_code = 3


class GenerationError(SchedHardError):
    """Rejection sampling gave up. ``graph`` and ``failing_pair`` hold the last attempt."""

    exit_code = 3

    def __init__(self, message, graph=None, failing_pair=None):
        super().__init__(message)
        self.graph = graph
        self.failing_pair = failing_pair


class BudgetError(SchedHardError):
    exit_code = 4


class SizeError(BudgetError):
    pass
