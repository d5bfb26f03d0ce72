"""Exception hierarchy shared by every module of the package."""


class AsyncSysError(Exception):
    """Base class for all errors raised by asyncstab."""


class WidthMismatch(AsyncSysError, ValueError):
    pass


class MalformedSignal(AsyncSysError, ValueError):
    pass


class EmptyDomain(AsyncSysError, ValueError):
    pass


class EmptyValueSet(AsyncSysError, ValueError):
    def __init__(self, msg, u=None):
        super().__init__(msg)
        self.u = u


class SideConditionError(AsyncSysError, ValueError):
    def __init__(self, msg, u=None):
        super().__init__(msg)
        self.u = u


class NotAnInput(AsyncSysError, KeyError):
    pass


class PreconditionError(AsyncSysError):
    """A checker-verified hypothesis does not hold; ``counterexample`` says why."""

    def __init__(self, msg, counterexample=None):
        super().__init__(msg)
        self.counterexample = counterexample


class SigmaClosureViolation(AsyncSysError):
    def __init__(self, msg, signal=None):
        super().__init__(msg)
        self.signal = signal


class TheoremFalsified(AsyncSysError):
    """Raised when a machine-checked implication fails on a concrete instance."""

    def __init__(self, msg, instance=None):
        super().__init__(msg)
        self.instance = instance


class BudgetExceeded(AsyncSysError):
    pass


class ParseError(AsyncSysError, ValueError):
    def __init__(self, msg, line=None, col=None):
        loc = ""
        if line is not None:
            loc = f"line {line}" + (f", col {col}" if col is not None else "") + ": "
        super().__init__(loc + msg)
        self.line = line
        self.col = col
