"""Exception types shared across the package."""


class CapacityError(ValueError):
    """Requested size exceeds a configured memory or runtime budget."""


class ConfigurationError(ValueError):
    """Inconsistent configuration detected before compute starts."""


class IncompleteInputError(ValueError):
    """An input series does not cover the requested range."""


class DataCorruptionError(RuntimeError):
    """A computed table violates an unconditional integrity bound."""


class CacheFormatError(RuntimeError):
    """A cache file has an unknown magic, version, or kind."""


class ChecksumError(CacheFormatError):
    """A cache file payload does not match its stored checksum."""
