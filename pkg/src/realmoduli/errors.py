"""Exception types shared across the package."""


class InvalidArgument(ValueError):
    """Inputs violate an operation's preconditions."""


class InvalidState(RuntimeError):
    """An object is not in the state an operation requires (e.g. not converged)."""


class UndeterminedEntry(LookupError):
    """A table cell the reference tables leave open (only bounds or gaps are known)."""
