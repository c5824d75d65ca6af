"""Exception hierarchy shared by every module."""


class BEBPError(Exception):
    """Base class for all package errors."""


class SizeError(BEBPError, ValueError):
    """Too few points/samples for the requested operation."""


class SchemaError(BEBPError, ValueError):
    """Vector dimensionality does not match what the operation expects."""


class DimensionalityError(SchemaError):
    """Operation only supports a specific dimensionality (e.g. 2-D rasters)."""


class DegenerateDirectionError(BEBPError, ValueError):
    """All neighbour directions vanish (every neighbour coincides with the point)."""


class ParseError(BEBPError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class QuotaError(BEBPError, ValueError):
    """Stratified sampling asked for more rows than a category holds."""

    def __init__(self, category, requested, available):
        self.category = category
        self.requested = requested
        self.available = available
        super().__init__(
            f"category {category!r}: requested {requested}, only {available} available"
        )


class DegenerateTrainingError(BEBPError, ValueError):
    """Training data contains a single class."""


class BoundError(BEBPError, ValueError):
    pass


class ConfigError(BEBPError, ValueError):
    pass
