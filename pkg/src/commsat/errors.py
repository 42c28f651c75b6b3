"""Exception hierarchy shared by all commsat modules."""


class CommsatError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(CommsatError, ValueError):
    """A layout, clause type or mixture violates one of its invariants."""


class WeightSumError(ValidationError):
    pass


class TypeTooLong(ValidationError):
    pass


class EntryTooLarge(ValidationError):
    pass


class DuplicateType(ValidationError):
    pass


class NonMonotoneType(ValidationError):
    pass


class InvalidType(ValidationError):
    pass


class OutOfRange(ValidationError, IndexError):
    pass


class ParseError(CommsatError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ClauseTooLong(CommsatError, ValueError):
    pass


class BudgetExceeded(CommsatError):
    """DPLL ran out of its node budget; the instance is undecided."""

    def __init__(self, nodes):
        self.nodes = nodes
        super().__init__(f"node budget exhausted after {nodes} nodes")


class PartialAssignment(CommsatError, ValueError):
    pass


class ComplementaryPair(CommsatError, ValueError):
    pass


class IndexOutOfRange(CommsatError, IndexError):
    pass


class ZeroBins(CommsatError, ValueError):
    pass


class InfeasibleParameters(CommsatError, ValueError):
    pass


class ConvergenceFailure(CommsatError, ArithmeticError):
    pass


class BranchUndefined(CommsatError, ValueError):
    pass
