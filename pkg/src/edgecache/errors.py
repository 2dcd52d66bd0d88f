"""Exception hierarchy shared by all modules."""


class EdgeCacheError(Exception):
    """Base class for every error raised by :mod:`edgecache`."""


class ParameterError(EdgeCacheError, ValueError):
    """An argument or configuration value is outside its valid domain."""


class TopologyError(EdgeCacheError):
    """A sampled network realization cannot be used (e.g. no macro cell)."""


class ModelDomainError(EdgeCacheError):
    """A closed-form approximation left [0, 1] for the given parameters."""


class NumericError(EdgeCacheError):
    """Quadrature or another numerical routine failed to converge."""


class OptimizerError(EdgeCacheError):
    """The swarm produced an unusable objective value."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
