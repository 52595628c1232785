"""Exception types shared across the package."""


class QueryError(ValueError):
    """Invalid input: bad arity, out-of-range point, unsupported exponent or size."""


class RootOfUnityError(ArithmeticError):
    """A factor collides with a root of unity and the requested expansion degenerates."""


class TruncationError(RuntimeError):
    """A series or lattice truncation could not reach the requested tolerance."""
