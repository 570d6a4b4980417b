"""Exception hierarchy shared across the package."""


class SwimgapError(Exception):
    """Base class for all package errors."""


class ConfigError(SwimgapError):
    """Invalid user input: bad parameters, malformed files, schema mismatch."""


class CapabilityError(SwimgapError):
    """The request is valid but exceeds what this implementation can do,
    e.g. exact coset enumeration on a graph with too many edges."""


class DecodingError(SwimgapError):
    """Inconsistent decoding inputs, e.g. a syndrome/correction mismatch."""


class CalibrationError(SwimgapError):
    """Calibration is infeasible on the given data."""
