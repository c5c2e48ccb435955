"""Exceptions raised across the laboratory."""


class GlabError(Exception):
    """Base class for every laboratory failure."""


class DegreeCapError(GlabError, ValueError):
    """A Hermite degree exceeded the supported cap."""


class InvalidIntervalError(GlabError, ValueError):
    """An interval had its endpoints in the wrong order."""


class NoSignChangeError(GlabError, ValueError):
    """A root bracket did not change sign."""


class ConvergenceError(GlabError, RuntimeError):
    """An iterative routine stopped before meeting its tolerance."""


class DomainError(GlabError, ValueError):
    """An argument lies outside the domain of a formula."""


class SupportViolationError(GlabError, ValueError):
    """A step function has values outside its admissible support."""


class NoRootInCellError(GlabError, ValueError):
    """No breakpoint position in the feasible cell balances the pattern."""


class NotAStripPairError(GlabError, ValueError):
    """A pair of sign functions is not a Davie-Reeds strip pair."""


class GapNotPositiveError(GlabError, ValueError):
    """The degree-3 gap term of the bound chain is not positive."""


class PreconditionError(GlabError, ValueError):
    """A documented precondition of an audit does not hold."""


class SizeBoundError(GlabError, ValueError):
    """A size or parameter is outside the supported range."""
