"""Exception types shared across the package."""


class InputError(ValueError):
    """Malformed or inconsistent user input (bad game file, bad dimensions)."""


class DimensionError(InputError):
    """Objects with incompatible dimensions were combined."""


class RankError(ValueError):
    """An operation received a matrix whose numerical rank it cannot handle."""


class FactorizationError(RuntimeError):
    """A numerical factorization failed to reach the required residual."""


class SolverFailure(RuntimeError):
    """The conic backend failed to produce a usable solution."""
