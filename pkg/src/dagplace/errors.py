"""Exception hierarchy shared across the package.

Three families matter to callers: input validation failures, enumeration /
table-size budget failures, and solver precondition failures.  The CLI maps
them to distinct exit codes.
"""


class DagplaceError(Exception):
    """Base class for all package errors."""


class ValidationError(DagplaceError):
    """Malformed or inconsistent input data."""


class DisconnectedGraph(ValidationError):
    def __init__(self, components):
        self.components = tuple(tuple(sorted(c)) for c in components)
        super().__init__(
            "network is not connected; components: "
            + ", ".join(str(list(c)) for c in self.components)
        )


class NegativeWeight(ValidationError):
    pass


class DuplicateEdge(ValidationError):
    pass


class UnknownNodeId(ValidationError):
    pass


class SelfLoop(ValidationError):
    pass


class CyclicGraph(ValidationError):
    pass


class BudgetExceeded(DagplaceError):
    """An enumeration or DP table would exceed the configured budget."""


class PreconditionError(DagplaceError):
    """A solver was invoked on an instance outside its contract."""


class NotATree(PreconditionError):
    pass


class NotLayered(PreconditionError):
    pass


class SinkNotLast(PreconditionError):
    pass


class PreconditionViolated(PreconditionError):
    pass


class WidthExceeded(PreconditionError):
    pass


class DanglingEdit(PreconditionError):
    pass


class InvalidDecomposition(PreconditionError):
    pass


class MaxResamplesExceeded(DagplaceError):
    """Random graph stayed disconnected after the retry limit."""
