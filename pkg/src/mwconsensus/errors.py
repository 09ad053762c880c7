"""Exception types shared across the package."""


class ConsensusLabError(Exception):
    """Base class for all errors raised by this package."""


class DegenerateInput(ConsensusLabError):
    """A vector or matrix input is degenerate (e.g. a zero direction vector)."""


class DimensionError(ConsensusLabError):
    """Operands have incompatible shapes."""


class InvalidInput(ConsensusLabError):
    """An input violates a structural requirement (e.g. asymmetry)."""


class InvalidWeight(ConsensusLabError):
    """An edge weight matrix violates its structural requirements."""


class InvalidAgent(ConsensusLabError):
    """An agent index is outside the network."""


class InvalidQuery(ConsensusLabError):
    """A query does not apply to the given agent (e.g. wrong role)."""


class InvalidStep(ConsensusLabError):
    """A step index is outside the domain of the periodic schedule."""


class ConfigError(ConsensusLabError):
    """A run configuration is missing, malformed, or inconsistent."""


class NumericalError(ConsensusLabError):
    """A numerical computation produced an unusable result."""


class DegenerateWeight(ConsensusLabError):
    """A weight coefficient is numerically zero where a positive one is required."""


class PreconditionError(ConsensusLabError):
    """A documented precondition of an analysis routine is violated."""


class PrivacyViolation(ConsensusLabError):
    """Two worlds that must be observationally identical are not."""
