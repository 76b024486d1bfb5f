"""Exception types shared across the package."""


class SiciakError(Exception):
    """Base class for all package errors."""


class DimensionError(SiciakError, ValueError):
    """A point or disc does not match the dimension of the region."""


class NotInConeError(SiciakError):
    """No admissible scaling was found for a point within the search budget."""


class GaugeError(SiciakError):
    """The Minkowski gauge could not be bracketed or is not applicable."""


class RootFindingError(SiciakError):
    """Aberth iteration did not reach the residual target."""

    def __init__(self, message, residual):
        super().__init__(f"{message} (best residual {residual:.3e})")
        self.residual = residual


class DegenerateDiscError(SiciakError):
    """Reduction of a projective lift destroyed the normalisation f0(0) = 1."""


class InfeasibleDiscError(SiciakError):
    """Boundary values of a disc leave the admissible set.

    Carries the feasibility report: indices of offending quadrature nodes and
    the largest per-node violation.
    """

    def __init__(self, message, nodes=(), residual=float("inf")):
        super().__init__(message)
        self.nodes = tuple(int(k) for k in nodes)
        self.residual = float(residual)


class NoFeasibleDiscError(SiciakError):
    """The optimizer found no feasible disc at any degree."""

    def __init__(self, message, residual, budget_exhausted=False):
        super().__init__(f"{message} (best penalty residual {residual:.3e})")
        self.residual = residual
        self.budget_exhausted = budget_exhausted


class ExprSyntaxError(SiciakError, ValueError):
    def __init__(self, message, offset):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class ScenarioError(SiciakError, ValueError):
    """Invalid scenario configuration."""


class PreconditionError(SiciakError):
    """The scenario does not satisfy the hypothesis needed by the requested computation."""
