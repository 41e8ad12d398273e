"""Exception types shared across the package."""


class StableKMError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(StableKMError, ValueError):
    pass


class KOutOfRange(StableKMError, ValueError):
    pass


class RhoOutOfRange(StableKMError, ValueError):
    pass


class InvalidConfig(StableKMError, ValueError):
    pass


class InvalidAlpha(StableKMError, ValueError):
    pass


class BudgetExceeded(StableKMError, RuntimeError):
    """An exhaustive search would exceed its configured budget.

    Partial results are never reported as verdicts.
    """


class SpecInvalid(StableKMError, ValueError):
    pass


class ParseError(StableKMError, ValueError):
    pass


class RepeatedVariable(StableKMError, ValueError):
    pass


class EmptyClause(StableKMError, ValueError):
    pass


class NotExactly3SAT(StableKMError, ValueError):
    pass


class UnusedVariable(StableKMError, ValueError):
    pass


class BadOverride(StableKMError, ValueError):
    pass


class MalformedTripleSystem(StableKMError, ValueError):
    pass


class NotUniquelySatisfiable(StableKMError, ValueError):
    pass
