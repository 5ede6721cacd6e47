"""Exception types shared across the toolkit."""


class DerevError(Exception):
    """Base class for all toolkit errors."""


class MalformedFileError(DerevError):
    """Audio file has a corrupt or unparseable header/payload."""


class UnsupportedFormatError(DerevError):
    """Audio file is readable but not in a supported layout (channels, depth)."""


class SampleRateMismatchError(DerevError):
    """Two signals that must share a sample rate do not."""


class SignalTooShortError(DerevError):
    """Signal is shorter than the minimum required for the operation."""


class DimensionMismatchError(DerevError):
    """Matrix/spectrogram shapes are inconsistent."""


class NumericalFailureError(DerevError):
    """An update produced NaN/Inf or a solve could not be completed."""


class InvalidGeometryError(DerevError):
    """Room geometry is inconsistent (source/mic outside room, etc.)."""
