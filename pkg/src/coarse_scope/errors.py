"""Exception hierarchy shared by every module."""

from __future__ import annotations


class CoarseScopeError(Exception):
    """Base class; ``code`` is the CLI exit status used when it escapes."""

    code = 1
    kind = "error"


class ConfigError(CoarseScopeError, ValueError):
    code = 2
    kind = "config"


class SingularMatrix(ConfigError):
    kind = "singular_matrix"


class DimensionMismatch(ConfigError):
    kind = "dimension_mismatch"


class DuplicateName(ConfigError):
    kind = "duplicate_name"


class UnknownToken(ConfigError):
    kind = "unknown_token"


class MalformedVector(ConfigError):
    kind = "malformed_vector"


class ExponentOutOfRange(ConfigError):
    kind = "exponent_out_of_range"


class PresentationMismatch(CoarseScopeError, ValueError):
    kind = "presentation_mismatch"


class RankNotOne(CoarseScopeError, ValueError):
    kind = "rank_not_one"


class BudgetExceeded(CoarseScopeError, RuntimeError):
    code = 3
    kind = "budget_exceeded"

    def __init__(self, what: str, limit: int):
        super().__init__(f"{what} exceeded budget of {limit}")
        self.what = what
        self.limit = limit
