"""Exception types raised across the package."""


class AccelStreamError(Exception):
    """Base class for every error this package raises on purpose."""


class MissingInput(AccelStreamError):
    """An input directory has no (or too few) matching files."""


class DecodeError(AccelStreamError):
    """A file exists but cannot be decoded as the expected format."""


class DimensionMismatch(AccelStreamError):
    """Two rasters or fields that must share dimensions do not."""


class BadDimensions(AccelStreamError):
    """A requested output size is too small to be meaningful."""


class NonGrayInput(AccelStreamError):
    """A single-channel image was required but a color one was given."""


class BadBound(AccelStreamError):
    """A quantization bound must be a positive finite number."""


class OutOfRange(AccelStreamError):
    """An index or iteration count fell outside its valid range."""


class BadConfig(AccelStreamError):
    """A configuration value or model hyperparameter is invalid."""


class ShapeMismatch(AccelStreamError):
    """Classifier input does not match the model's input geometry."""


class EmptyDataset(AccelStreamError):
    """Training requires at least one labeled sample."""


class LabelOutOfRange(AccelStreamError):
    """A class label lies outside [0, n_classes)."""


class BadMagic(AccelStreamError):
    """A binary file does not start with the expected magic bytes."""


class VersionMismatch(AccelStreamError):
    """A binary file carries an unsupported format version."""


class TruncatedFile(AccelStreamError):
    """A binary file is shorter than its header promises."""


class LengthMismatch(AccelStreamError):
    """Score vectors being fused have different lengths."""


class TooShort(AccelStreamError):
    """A video has too few frames to build one classifier stack."""


class TooFewFlows(AccelStreamError):
    """Acceleration needs at least one (spatial) or two (temporal) flows."""


class EmptySplit(AccelStreamError):
    """Evaluation requires a non-empty test split."""


class BadSpec(AccelStreamError):
    """A synthetic motion spec would move content out of the frame."""
