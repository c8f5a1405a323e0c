"""Exception hierarchy shared by every module."""


class AvgDegError(Exception):
    """Base class for all errors raised by this package."""


# graph construction
class GraphError(AvgDegError):
    pass


class SelfLoop(GraphError):
    pass


class DuplicateEdge(GraphError):
    pass


class InconsistentNHint(GraphError):
    pass


class InvalidSpec(GraphError):
    pass


class ScaleTooSmall(InvalidSpec):
    pass


# oracle access
class OracleError(AvgDegError):
    pass


class OracleDisabled(OracleError):
    pass


class UnknownVertex(OracleError):
    pass


class BudgetExhausted(OracleError):
    pass


class IsolatedVertices(OracleError):
    pass


# estimator outcomes that are not ordinary values
class EstimatorError(AvgDegError):
    pass


class InvalidP(EstimatorError):
    pass


class NoDensePair(EstimatorError):
    pass


class Exhausted(EstimatorError):
    """Guess-halving ran below 1 without producing an answer."""


# harness
class ConfigError(AvgDegError):
    pass


class InsufficientPoints(AvgDegError):
    pass
