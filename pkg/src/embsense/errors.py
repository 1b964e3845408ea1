"""Exception types shared across the package."""


class EmbsenseError(Exception):
    """Base class for all package-specific errors."""


class InvalidParameterError(EmbsenseError, ValueError):
    """An effect or operation parameter is outside its legal range."""


class InvalidInputError(EmbsenseError, ValueError):
    """Input data violates a precondition (too short, non-finite, ...)."""


class DegenerateInputError(EmbsenseError, ValueError):
    """Statistically degenerate input, e.g. a constant vector where
    variation is required."""


class DegenerateGeometryError(EmbsenseError, ValueError):
    """The requested direction or basis does not exist for this data,
    e.g. a zero CCA direction or a vanishing LDA discriminant."""


class DimensionMismatchError(EmbsenseError, ValueError):
    """Operands have incompatible dimensions."""


class ConfigError(EmbsenseError, ValueError):
    """Pipeline configuration is malformed or carries unknown keys."""


class Emb1FormatError(EmbsenseError, ValueError):
    """Base class for embedding-file parse errors."""


class BadMagicError(Emb1FormatError):
    """File does not start with the EMB1 magic."""


class VersionMismatchError(Emb1FormatError):
    """File declares an unsupported format version."""


class TruncatedPayloadError(Emb1FormatError):
    """Declared matrix shape or trailer exceeds the available bytes."""


class DimensionOverflowError(Emb1FormatError):
    """Declared matrix shape is implausibly large or inconsistent."""
