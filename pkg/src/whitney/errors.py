"""Exception hierarchy shared by all modules."""


class WhitneyError(Exception):
    """Base class for library errors."""


class ParseError(WhitneyError):
    """Syntax error in an expression string; carries the offset."""

    def __init__(self, message, position):
        super().__init__(f"{message} (at offset {position})")
        self.position = position


class DomainError(WhitneyError):
    """Evaluation outside a function's validity domain, or an argument
    outside an operation's stated hypotheses."""


class PreconditionError(WhitneyError):
    """A caller-visible precondition failed.  Distinct from a computed
    FAIL verdict: the requested check was refused, not run."""


class SpecError(WhitneyError):
    """A problem specification violates its structural requirements
    (profile not decreasing/convex/increasing, ordering, ...)."""
