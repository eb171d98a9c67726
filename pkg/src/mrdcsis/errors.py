"""Exception hierarchy shared by all modules."""


class MrdcError(Exception):
    """Base class for every error raised by this package."""


class ShapeError(MrdcError, ValueError):
    """Array shapes or sample counts do not line up."""


class DomainError(MrdcError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class CapabilityError(MrdcError, ValueError):
    """The request exceeds what the method or table supports."""


class DegenerateInputError(MrdcError, ValueError):
    """Zero distance variance, all-zero scores, and similar degeneracies."""


class ParseError(MrdcError, ValueError):
    """A text input (direction numbers, CSV) could not be parsed."""


class ConfigError(MrdcError, ValueError):
    """Invalid configuration: unknown example id, bad rule string, etc."""


class IngestionError(MrdcError, ValueError):
    """Dataset files could not be aligned into a usable tensor."""


class ReportWriteError(MrdcError, OSError):
    """A report file could not be written."""
