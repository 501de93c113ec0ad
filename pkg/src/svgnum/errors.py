"""Exception hierarchy shared by every module."""


class SvgNumError(ValueError):
    """Base class for all typed errors raised by the package."""


# svg_core
class MalformedPath(SvgNumError):
    def __init__(self, message, offset=None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at byte {offset})"
        super().__init__(message)


class MalformedDocument(SvgNumError):
    pass


class UnsupportedFeature(SvgNumError):
    def __init__(self, feature, message=None):
        self.feature = feature
        super().__init__(message or f"unsupported feature: {feature}")


# preprocess
class DegenerateDocument(SvgNumError):
    pass


# dual_sequence
class CountMismatch(SvgNumError):
    pass


# svgfloat codec
class SvgFloatError(SvgNumError):
    """Any failure to read or write an SVGFloat stream."""


class InvalidOpcode(SvgFloatError):
    pass


class UnknownOpcode(SvgFloatError):
    pass


class SignalingValue(SvgFloatError):
    pass


class ValueOverflow(SvgFloatError):
    pass


class NonFiniteValue(SvgFloatError):
    pass


class BadMagic(SvgFloatError):
    pass


class UnsupportedVersion(SvgFloatError):
    pass


class TruncatedBlock(SvgFloatError):
    pass


class StrayNaN(SvgFloatError):
    pass


class MalformedStream(SvgFloatError):
    """Framing is readable but violates the layout (bad kind byte, empty block, non-ASCII run...)."""


class NonCanonicalStream(SvgFloatError):
    """The stream decodes, but re-encoding the result does not reproduce it byte for byte."""


# number_codec
class EmptyIndexSet(SvgNumError):
    pass


class IndexOutOfRange(SvgNumError):
    pass


class DimensionMismatch(SvgNumError):
    pass


class Divergence(SvgNumError):
    pass


# raster_metrics
class TooSmall(SvgNumError):
    pass


class RenderFailure(SvgNumError):
    pass


class MissingComponent(SvgNumError):
    pass


class GroupTooSmall(SvgNumError):
    pass
