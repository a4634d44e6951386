"""Exception types shared across the package."""


class ConcavematchError(Exception):
    """Base class for all package-specific errors."""


class DimensionError(ConcavematchError):
    """Inputs have inconsistent or invalid dimensions."""


class DuplicatePointsError(ConcavematchError):
    """A point cloud contains coincident points; kernel definiteness needs
    pairwise distinct points."""


class DisconnectedGraphError(ConcavematchError):
    """A graph has unreachable vertices, so geodesic distances are infinite."""


class ConvergenceError(ConcavematchError):
    """An iterative projection failed to reach its tolerance.

    Carries the last residual in ``residual``.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class DenseLimitError(ConcavematchError):
    """A dense eigendecomposition was requested above the configured size
    limit. Use Monte-Carlo direction sampling instead."""


class DegenerateEmbeddingError(ConcavematchError):
    """The double-centered matrix has no positive eigenvalue to embed."""


class InputFormatError(ConcavematchError):
    """An input file could not be parsed."""
