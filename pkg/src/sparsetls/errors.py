"""Exception hierarchy shared by all solver and harness modules."""


class SparseTlsError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParam(SparseTlsError):
    """A parameter is outside its admissible range."""


class DimensionMismatch(SparseTlsError):
    """Vector/matrix dimensions are inconsistent."""


class NonConvergence(SparseTlsError):
    """An iterative routine hit its iteration cap before reaching tolerance."""


class NotPositiveDefinite(SparseTlsError):
    """A matrix expected to be SPD failed its Cholesky factorization."""


class RankDeficient(SparseTlsError):
    """A matrix expected to have full row rank is numerically singular."""


class DegenerateSolution(SparseTlsError):
    """The homogeneous-coordinate entry of a TLS solution is numerically zero."""
