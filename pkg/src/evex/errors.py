class EvexError(Exception):
    """Base class for all toolkit errors."""


class ParseError(EvexError):
    """A file could not be parsed (bad syntax, bad record layout)."""


class ValidationError(EvexError):
    """Parsed data violates an invariant (bad offsets, bad config, ...)."""
