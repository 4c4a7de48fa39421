"""Exception types shared across the package."""


class SoftTextError(Exception):
    """Base class for all errors raised by this package."""


class DegenerateQuad(SoftTextError):
    """Quadrilateral has (near-)zero area or is self-intersecting."""


class OutsideQuad(SoftTextError):
    """Point lies outside the quadrilateral it was required to be inside."""


class DegenerateInput(SoftTextError):
    """Point set too small or collinear for the requested construction."""


class DimensionMismatch(SoftTextError):
    """Rasters that must share dimensions do not."""


class ParseError(SoftTextError):
    """Malformed annotation/detection text.

    Carries the 1-based line number of the offending line.
    """

    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


class FormatError(SoftTextError):
    """Malformed binary raster file.

    Carries the byte offset at which parsing failed.
    """

    def __init__(self, offset: int, reason: str):
        super().__init__(f"byte {offset}: {reason}")
        self.offset = offset
        self.reason = reason


class PlacementFailure(SoftTextError):
    """Scene synthesis could not place the requested number of boxes."""

    def __init__(self, requested: int, achieved: int):
        super().__init__(
            f"placed {achieved} of {requested} boxes before the attempt budget ran out"
        )
        self.requested = requested
        self.achieved = achieved


class MissingImage(SoftTextError):
    """A ground-truth image has no matching detection file."""
