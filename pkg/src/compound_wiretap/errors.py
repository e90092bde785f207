"""Exception hierarchy shared by the library and the command line."""


class WiretapError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(WiretapError, ValueError):
    """An input violates a documented invariant or precondition."""


class RankConstraintError(ValidationError):
    """The legitimate channel rank exceeds the eavesdropper rank bound."""


class ConvergenceError(WiretapError, RuntimeError):
    """An iterative routine hit its iteration cap without converging."""


class InputFormatError(WiretapError, ValueError):
    """An input file or argument could not be parsed (malformed JSON, wrong schema)."""
