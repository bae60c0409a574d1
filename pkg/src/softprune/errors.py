"""Exception hierarchy. Each CLI-facing error carries the process exit code."""


class SoftPruneError(Exception):
    exit_code = 1


class ConfigError(SoftPruneError, ValueError):
    """Invalid configuration or command usage."""

    exit_code = 2


class DimensionError(SoftPruneError, ValueError):
    exit_code = 2


class BoundsError(SoftPruneError, IndexError):
    exit_code = 2


class StructuralError(SoftPruneError, ValueError):
    """A pruning plan does not match the model it is applied to."""

    exit_code = 2


class DataIOError(SoftPruneError, OSError):
    exit_code = 3


class FormatError(SoftPruneError, ValueError):
    exit_code = 4


class LengthError(FormatError):
    """Payload shorter or longer than the header promises."""


class InfeasibleError(SoftPruneError):
    """No coefficient vector satisfies the sparsity window within budget.

    ``reason`` is a short machine-readable tag, ``details`` holds the
    constraint values that should be relaxed.
    """

    exit_code = 5

    def __init__(self, message, reason="infeasible", **details):
        super().__init__(message)
        self.reason = reason
        self.details = details


class DivergenceError(SoftPruneError, ArithmeticError):
    exit_code = 6

    def __init__(self, message, epoch=None):
        super().__init__(message)
        self.epoch = epoch
