"""Exception hierarchy shared by all modules."""


class CutProjectError(Exception):
    """Base class for every error raised by the package."""


class ArgumentError(CutProjectError, ValueError):
    """An argument is outside its documented domain."""


class SpecMismatchError(CutProjectError, TypeError):
    """Operands belong to different (or incompatible) group variants."""


class PrecisionError(CutProjectError):
    """A p-adic operation needs digits beyond the truncation depth."""


class EnumerationBoundError(CutProjectError):
    """No finite enumeration box exists for a model set request."""


class UnboundedSupportError(CutProjectError):
    """A euclidean internal function was given without support or decay radius."""


class UnsupportedSchemeError(CutProjectError):
    """The operation is only defined for a narrower class of schemes."""


class CatalogError(CutProjectError, KeyError):
    """Unknown gallery or builtin name."""


class WitnessUnavailableError(CutProjectError):
    """A covering witness cannot be built (reference set not relatively dense)."""


class InsufficientDataError(CutProjectError):
    """The finite truncation is too small to decide the question."""


class NotLiftableError(CutProjectError):
    """The support function failed the uniform continuity pre-check."""


class ConfigError(CutProjectError):
    """Malformed run configuration."""
