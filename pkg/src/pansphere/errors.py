"""Domain exceptions. The CLI maps every PansphereError to exit code 2."""


class PansphereError(Exception):
    """Base class for all domain errors raised by this package."""


class InvalidErpShape(PansphereError):
    """Input is not a valid 2:1 equirectangular grid."""


class InvalidUnitVector(PansphereError):
    """A supposed unit vector is too far from unit norm."""


class InvalidZoom(PansphereError):
    """Zoom level must be strictly positive."""


class InvalidMobius(PansphereError):
    """Mobius coefficients are singular (|ad - bc| too small)."""


class WrongDepthUnits(PansphereError):
    """A depth map with the wrong units flag was supplied."""


class DegenerateDepthRange(PansphereError):
    """Percentile span of the valid depth values is (near) zero."""


class DegenerateAlignment(PansphereError):
    """Least-squares scale/shift system is rank deficient."""


class ShapeMismatch(PansphereError):
    """Two grids that must share a resolution do not."""


class EmptyOverlap(PansphereError):
    """No jointly valid pixels between prediction and target."""


class TooSmall(PansphereError):
    """Image is too small for the requested multi-scale reduction."""


class AllPatchesDegenerate(PansphereError):
    """Every sampled patch was flat; the patch loss is undefined."""


class NoRegionSplit(PansphereError):
    """The representation has no equator/pole region grouping."""


class InternalCoverageError(PansphereError):
    """A pixel direction was covered by no patch (should not happen)."""
