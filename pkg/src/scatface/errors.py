"""Exception hierarchy shared by every stage of the pipeline."""


class ScatfaceError(Exception):
    """Base class for all errors raised by this package."""

    kind = "error"


class ImageError(ScatfaceError):
    kind = "image"


class UnreadableImageError(ImageError):
    kind = "unreadable-file"


class UnsupportedFormatError(ImageError):
    kind = "unsupported-format"


class EmptyImageError(ImageError):
    kind = "zero-sized-image"


class FilterBankError(ScatfaceError):
    kind = "filterbank"


class ShapeMismatchError(ScatfaceError, ValueError):
    kind = "shape-mismatch"


class PcaError(ScatfaceError):
    kind = "pca"


class ZeroRankError(PcaError):
    kind = "zero-rank-data"


class SvmError(ScatfaceError):
    kind = "svm"


class DatasetError(ScatfaceError):
    kind = "dataset"


class ConfigError(ScatfaceError):
    kind = "config"


class ContainerError(ScatfaceError):
    kind = "container"


class ExperimentError(ScatfaceError):
    """Component failure wrapped with the (repeat, K) it happened at."""

    kind = "experiment"

    def __init__(self, message, repeat=None, k=None):
        super().__init__(message)
        self.repeat = repeat
        self.k = k
