"""Exception hierarchy shared across the toolkit."""


class SubsurfError(Exception):
    """Base class for all toolkit errors."""


class SegyFormatError(SubsurfError):
    """Malformed or unsupported SEG-Y content."""


class GeometryError(SubsurfError):
    """Volume / section geometry inconsistency (bad dims, out-of-range index)."""


class DataError(SubsurfError):
    """Invalid numeric content (non-finite samples, negative features, ...)."""


class DegenerateInputError(SubsurfError):
    """Input too uniform / trivial for the requested operation."""
