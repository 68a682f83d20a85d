"""Exception types shared across the package.

Every guard that can abort a computation raises one of these, so the
service layer and the CLI can map failures onto HTTP status codes and
process exit codes without string matching.
"""


class ZakLabError(Exception):
    """Base class for all package-specific failures."""


class DimensionMismatchError(ZakLabError):
    """Vectors or sets of different ambient dimension were combined."""


class UnsupportedShapeError(ZakLabError):
    """An operation requiring structured input (single box/ball) got a union."""


class QuadratureError(ZakLabError):
    """Node-doubling refinement did not converge; carries the last two values."""

    def __init__(self, message: str, last_values: tuple[float, float] | None = None):
        super().__init__(message)
        self.last_values = last_values


class ResolutionError(ZakLabError):
    """A lattice or grid is too coarse for the thinnest feature of a set."""


class LatticeCoverageError(ZakLabError):
    """No lattice point falls inside a set that must carry data."""


class AliasingError(ZakLabError):
    """Spectral data extends beyond the half-lattice product-safety band."""


class StabilityError(ZakLabError):
    """A nonlinear evolution blew up within a single substep."""
