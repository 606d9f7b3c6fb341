"""Exception types shared across the package."""


class HdaError(Exception):
    """Base class for all errors raised by hda."""


class DimensionError(HdaError):
    """Shapes or requested dimensions are incompatible."""


class RankDeficiencyError(HdaError):
    """The data cannot support the requested subspace dimension."""

    def __init__(self, message, achievable_rank):
        super().__init__(message)
        self.achievable_rank = achievable_rank


class GeometryError(HdaError):
    """The requested construction is geometrically impossible."""


class ParameterError(HdaError):
    """A scalar parameter is outside its valid range."""


class ValidationError(HdaError):
    """Input data or a file violates a documented contract."""


class ConfigError(HdaError):
    """A run configuration is inconsistent with the data it names."""
