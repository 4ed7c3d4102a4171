"""Exception and warning types shared across the package."""


class VasculsynthError(Exception):
    """Base class for all package errors."""


class ZeroDirection(VasculsynthError):
    """A direction vector with zero magnitude was supplied."""


class ZeroAxis(VasculsynthError):
    """A rotation axis with zero magnitude was supplied."""


class InvalidRadii(VasculsynthError):
    """Radii violate the bifurcation/Murray constraints."""


class DegenerateBlend(VasculsynthError):
    """Target pull produced a zero-magnitude blended vector."""


class ParallelDirections(VasculsynthError):
    """Parent and existing-child directions are collinear; pivot undefined."""


class NotEligible(VasculsynthError):
    """Node does not satisfy the bifurcation eligibility rules."""


class RootOutOfSupport(VasculsynthError):
    """Requested root position lies outside the atlas support."""


class ShapeMismatch(VasculsynthError):
    """Grids that must share dims/spacing do not."""


class IndexOutOfRange(VasculsynthError):
    """A voxel index falls outside the grid."""


class EmptyGrid(VasculsynthError):
    """A grid with zero extent along some axis was requested."""


class TooFewFrames(VasculsynthError):
    """Temporal denoising needs at least two frames."""


class LabeledBackgroundRefused(VasculsynthError):
    """Synthetic vessels must never be rendered into labeled scans."""


class ParseError(VasculsynthError):
    """A container or tree file is malformed."""


class TruncatedPayload(ParseError):
    """Container payload is shorter than the header promises."""


class KindMismatch(VasculsynthError):
    """Container holds a different kind than the caller expects."""


class ContrastOutOfRangeWarning(UserWarning):
    """Blend contrast falls outside the typical contrast band (warning only)."""
