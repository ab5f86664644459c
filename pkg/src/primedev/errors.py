"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class CapacityError(ValueError):
    """A size limit (sieve bound, memory budget, factorization range) was exceeded."""


class NumericError(ArithmeticError):
    """An iterative solver failed to converge or an evaluation overflowed."""


class UnsupportedSpecError(ValueError):
    """The additive function cannot be handled by the requested exact method."""


class InfeasibleError(ValueError):
    """The requested construction has no solution for the given parameters."""
