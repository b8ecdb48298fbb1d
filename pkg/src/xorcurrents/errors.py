"""Exception types shared across the package."""


class XorCurrentsError(Exception):
    """Base class for all package errors."""


class DegenerateDomain(XorCurrentsError):
    """Mesh too coarse: the discretized domain has no interior vertex."""


class InvalidParameter(XorCurrentsError):
    """A numeric parameter is outside its admissible range."""


class ShapeMismatch(XorCurrentsError):
    """Two fields/configurations do not live on the same graph."""


class InvalidVertex(XorCurrentsError):
    """A vertex argument is not an interior vertex of the grid/domain."""


class OracleCapacityExceeded(XorCurrentsError):
    """The requested exact computation is too large for the oracle."""


class CouplingViolation(XorCurrentsError):
    """An exact identity of the master coupling failed (implementation bug)."""


class ParityInconsistency(XorCurrentsError):
    """Parity labels came out path-dependent (implementation bug)."""


class SignCountMismatch(XorCurrentsError):
    """Cluster sign list does not match the trace partition."""


class OverlappingSupports(XorCurrentsError):
    """Excursion supports are not pairwise disjoint."""


class ContractViolation(XorCurrentsError):
    """An API contract was broken (e.g. an ordering that reads signs)."""


class OutOfDomain(XorCurrentsError):
    """A point lies outside the domain of a continuum evaluator."""


class DiagonalSingularity(XorCurrentsError):
    """Two-point kernel evaluated on the diagonal z == w."""


class PointSwallowed(XorCurrentsError):
    """The Loewner flow swallowed the point before the requested time."""

    def __init__(self, t_swallow, message=None):
        self.t_swallow = t_swallow
        super().__init__(message or f"point swallowed near t = {t_swallow:.6g}")


class ConfigError(XorCurrentsError):
    """Experiment configuration could not be parsed or validated."""
