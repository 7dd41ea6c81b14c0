"""Exception hierarchy for the workbench."""


class DeddensError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatch(DeddensError, ValueError):
    pass


class NotPositive(DeddensError, ValueError):
    pass


class NotMeasurable(DeddensError, ValueError):
    """A function expected to be constant on partition blocks is not."""


class ZeroVector(DeddensError, ValueError):
    pass


class NotInvertible(DeddensError, ValueError):
    pass


class NotRankOneCompatible(DeddensError, ValueError):
    pass


class NotQuasiIsometry(DeddensError, ValueError):
    pass


class TruncationFailure(DeddensError, ArithmeticError):
    """The R_m series did not settle within the term cap."""

    def __init__(self, message, terms=None, last_term=None, tail=None):
        super().__init__(message)
        self.terms = terms
        self.last_term = last_term
        self.tail = tail


class ConsistencyFailure(DeddensError):
    """Two independently computed answers to the same question disagree.

    ``verdicts`` maps the name of each route to its answer so the caller can
    report every side of the disagreement.
    """

    def __init__(self, check, verdicts, detail=""):
        self.check = check
        self.verdicts = dict(verdicts)
        self.detail = detail
        parts = ", ".join(f"{k}={v!r}" for k, v in self.verdicts.items())
        msg = f"{check}: routes disagree ({parts})"
        if detail:
            msg += f"; {detail}"
        super().__init__(msg)


class ParseError(DeddensError, ValueError):
    def __init__(self, message, path="$"):
        super().__init__(f"{path}: {message}")
        self.path = path


class ValidationError(DeddensError, ValueError):
    def __init__(self, message, field="$"):
        super().__init__(f"{field}: {message}")
        self.field = field


class ScenarioError(DeddensError):
    """A structural error raised while running one test of a scenario."""

    def __init__(self, index, kind, cause):
        super().__init__(f"test #{index} ({kind}): {type(cause).__name__}: {cause}")
        self.index = index
        self.kind = kind
        self.cause = cause
