"""Exception hierarchy shared by every module."""


class PirError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(PirError, ValueError):
    """Malformed or mismatched parameters (lengths, moduli, ranges)."""


class InfeasibleParametersError(ParameterError):
    """Parameters are well-formed but no scheme exists for them (field too small,
    incompatible characteristic, divisibility)."""


class ValidationError(PirError, ValueError):
    """A constructed object violates one of its invariants."""


class NotDecodableError(ValidationError):
    """A noise response cannot be written in terms of the noise positions."""


class NotRotatableError(NotDecodableError):
    """A cyclic re-placement of the mixed queries has no decoding equations."""


class RetryExhaustedError(PirError, RuntimeError):
    """Rejection sampling did not produce an admissible draw within budget."""


class EnumerationInfeasibleError(PirError):
    """Exhaustive enumeration of sampler randomness exceeds the size bound."""


class ConsistencyError(PirError, AssertionError):
    """An internal cross-check (closed form vs enumeration) disagreed."""


class ConstructionUnsupportedError(ValidationError):
    """A construction's standing assumption (e.g. the ratio condition of the
    geometrical scheme) fails for the given code."""
