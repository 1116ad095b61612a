"""Exception types shared by all modules.

Every failure mode that callers are expected to catch gets its own class;
plain ValueError is reserved for programming errors (bad argument types,
shape mismatches) that no experiment config should be able to trigger.
"""


class ZarembaError(Exception):
    """Base class for all library errors."""


class SingularEvaluation(ZarembaError):
    """A weight with a negative power exponent was evaluated at its center."""


class QuadratureSingularity(ZarembaError):
    """A quadrature node produced a non-finite weight value."""


class EmptyRegion(ZarembaError):
    """A measure-comparison region has zero volume."""


class InvalidResolution(ZarembaError):
    """Grid resolution below the minimum of 2 cells per axis."""


class InvalidLambda(ZarembaError):
    """Cantor ratio outside the open interval (0, 1/2)."""


class OutOfDomain(ZarembaError):
    """A requested shape or node set is not contained in the grid's box."""


class EmptyDirichletSet(ZarembaError):
    """A solve was requested with no Dirichlet nodes; uniqueness fails."""


class EmptyConstraintSet(ZarembaError):
    """Poincare constant requested with empty K; the constant is unbounded."""


class CenterOffD(ZarembaError):
    """A capacity-density sample center does not lie on the Dirichlet set."""


class NoConvergence(ZarembaError):
    """Iteration budget exhausted before reaching tolerance.

    The last iterate is attached as ``.result`` so callers can inspect it.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class ZeroData(ZarembaError):
    """Energy ratio requested for identically vanishing data."""


class CubeOutOfDomain(ZarembaError):
    """A sampled cube for a local estimate leaves the solution domain."""


class InfiniteData(ZarembaError):
    """A weighted data norm diverges under refinement."""


class ConfigError(ZarembaError):
    """Experiment config failed validation; message names key and constraint."""
