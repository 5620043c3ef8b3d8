"""Exception types shared across the package."""


class DepthConvError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(DepthConvError):
    """Inconsistent or invalid configuration (sensor model, window size, ...)."""


class FormatError(DepthConvError):
    """A file does not have the expected structure (bit depth, channels, size)."""


class ParseError(FormatError):
    """A text file failed to parse. Carries the offending line number."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        prefix = ""
        if path is not None:
            prefix += str(path)
        if line is not None:
            prefix += f":{line}"
        super().__init__(f"{prefix}: {message}" if prefix else message)


class MetricError(DepthConvError):
    """A trajectory metric could not be computed (too few associations, ...)."""


class AlignmentError(MetricError):
    """Rigid alignment is underdetermined (too few or collinear points)."""
