"""Exception hierarchy for the debtstream package.

``ValidationError`` subclasses flag rejected input data; the remaining
errors flag states that make a requested computation meaningless
(unpruned networks, singular systems, degenerate statistics).
"""


class DebtstreamError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(DebtstreamError):
    """Input data violates the network construction rules."""


class NegativeAmount(ValidationError):
    """A credit amount is negative."""


class SelfLoan(ValidationError):
    """A firm appears as its own creditor."""


class UnknownFirm(ValidationError):
    """An attribute map references a firm that is not in the network."""


class ParseError(ValidationError):
    """A CSV input file could not be parsed.

    Carries the offending file and 1-based line number so command-line
    diagnostics can point at the exact input row.
    """

    def __init__(self, path, line, message):
        super().__init__(f"{path}:{line}: {message}")
        self.path = str(path)
        self.line = line


class ZeroDebtFirm(DebtstreamError):
    """A firm with zero total debt reached a share computation."""


class EmptyNetwork(DebtstreamError):
    """No firms remain (or were supplied)."""


class NotPruned(DebtstreamError):
    """The network still contains firms whose score is undefined."""


class SingularSystem(DebtstreamError):
    """A linear solve could not reach the requested residual."""


class NoConvergence(DebtstreamError):
    """The path series did not converge within the term budget."""


class EmptyAggregate(DebtstreamError):
    """Sector aggregation received no firms."""


class MissingTotals(DebtstreamError):
    """No firm reports a total inter-firm credit figure."""


class NoZeroSlots(DebtstreamError):
    """A row has residual credit but no empty creditor slots to place it."""


class NoSuchEdge(DebtstreamError):
    """The requested credit link does not exist."""


class EmptyIntersection(DebtstreamError):
    """Two networks share no firms after pruning."""


class DegenerateScope(DebtstreamError):
    """A correlation scope is too small or has no variance."""


class DegenerateInput(DebtstreamError):
    """Statistical input is too short, mismatched, or constant."""


class NonPositiveSample(DegenerateInput):
    """A sample for a log-scale fit is zero or negative."""


class InvalidConfig(DebtstreamError):
    """A generator or estimator configuration is out of range."""
