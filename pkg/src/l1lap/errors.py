"""Exception hierarchy shared by all l1lap modules."""


class L1LapError(Exception):
    """Base class for every error raised by l1lap."""


class DimensionMismatch(L1LapError, ValueError):
    pass


class NonFinite(L1LapError, ValueError):
    pass


class RankDeficient(L1LapError, ValueError):
    def __init__(self, rank, expected):
        self.rank = rank
        self.expected = expected
        super().__init__(f"matrix has numerical rank {rank} < {expected} rows")


class InvalidDensity(L1LapError, ValueError):
    pass


class DisconnectedGraph(L1LapError, ValueError):
    pass


class InvalidNodeIndex(L1LapError, ValueError):
    pass


class NonPositiveWeight(L1LapError, ValueError):
    pass


class NonPositiveInput(L1LapError, ValueError):
    pass


class ZeroEntry(L1LapError, ValueError):
    pass


class InvalidEps(L1LapError, ValueError):
    pass


class SizeLimitExceeded(L1LapError, ValueError):
    pass


class IllConditioned(L1LapError, ArithmeticError):
    """The Laplacian system is too ill-conditioned to trust the solve."""

    def __init__(self, estimate, limit):
        self.estimate = estimate
        self.limit = limit
        super().__init__(
            f"condition estimate {estimate:.3e} exceeds limit {limit:.3e}")


class NoConvergence(L1LapError, ArithmeticError):
    def __init__(self, residual, iterations):
        self.residual = residual
        self.iterations = iterations
        super().__init__(
            f"iterative solve stopped after {iterations} iterations "
            f"with relative residual {residual:.3e}")


class StepOverflow(L1LapError, OverflowError):
    """Multiplicative step exponent beyond the safe range of exp()."""


class TooLarge(L1LapError, ValueError):
    pass


class Infeasible(L1LapError, ValueError):
    pass


class StepTooLarge(L1LapError, ValueError):
    pass


class ParseError(L1LapError, ValueError):
    pass
