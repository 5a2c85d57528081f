"""Exception hierarchy.

Everything raised on purpose by the package derives from :class:`TakagiError`.
Computational caps form their own branch so callers (and the CLI) can tell
"bad input" apart from "input fine, budget exhausted".
"""


class TakagiError(Exception):
    """Base class for package errors."""


class PointError(TakagiError, ValueError):
    """A point or digit stream is invalid, or unsuitable for the operation."""


class GrammarError(PointError):
    """A point specification string does not parse."""


class CapError(TakagiError, RuntimeError):
    """A configured computational cap was exceeded."""


class CycleCapError(CapError):
    pass


class LookaheadCapError(CapError):
    pass


class IntervalCapError(CapError):
    pass
